import numpy as np
import pytest

from salientrank.errors import UndefinedApError, ValidationError
from salientrank.subitizing import (
    PASCALS_SCHEME,
    SOS_SCHEME,
    SubitizingPrediction,
    average_precision,
    class_distribution,
    count_to_class,
    one_vs_rest_ap,
    scheme_by_name,
    subitizing_report,
)


def enumeration_ap(confidences, positives, method):
    """Oracle: precision at every rank from an explicit stable sort."""
    order = sorted(range(len(confidences)), key=lambda i: (-confidences[i], i))
    npos = sum(positives)
    tp = 0
    prec, rec = [], []
    for rank, idx in enumerate(order, start=1):
        if positives[idx]:
            tp += 1
        prec.append(tp / rank)
        rec.append(tp / npos)
    if method == "continuous":
        return sum(p for p, idx in zip(prec, order) if positives[idx]) / npos
    total = 0.0
    for t in np.arange(0.0, 1.05, 0.1):
        candidates = [p for p, r in zip(prec, rec) if r >= t]
        total += (max(candidates) if candidates else 0.0) / 11.0
    return total


def test_count_to_class():
    assert count_to_class(3, SOS_SCHEME) == "3"
    assert count_to_class(9, SOS_SCHEME) == "4+"
    assert count_to_class(9, PASCALS_SCHEME) == "4+"
    assert count_to_class(0, SOS_SCHEME) == "0"
    with pytest.raises(ValidationError):
        count_to_class(0, PASCALS_SCHEME)
    with pytest.raises(ValidationError):
        count_to_class(-1, SOS_SCHEME)


def test_scheme_lookup():
    assert scheme_by_name("sos") is SOS_SCHEME
    assert scheme_by_name("pascals") is PASCALS_SCHEME
    with pytest.raises(ValidationError):
        scheme_by_name("other")


def test_ap_all_positives_first():
    conf = [0.9, 0.8, 0.7, 0.2, 0.1]
    pos = [True, True, True, False, False]
    assert average_precision(conf, pos, "voc07") == pytest.approx(1.0)
    assert average_precision(conf, pos, "continuous") == pytest.approx(1.0)


def test_ap_single_positive_ranked_last():
    conf = [1.0 - 0.05 * i for i in range(10)]
    pos = [False] * 9 + [True]
    assert average_precision(conf, pos, "continuous") == pytest.approx(0.1)
    assert average_precision(conf, pos, "voc07") == pytest.approx(0.1)


def test_ap_no_positives_errors():
    with pytest.raises(UndefinedApError):
        average_precision([0.5, 0.4], [False, False])


def test_ap_matches_enumeration_oracle(rng):
    for _ in range(30):
        n = 20
        conf = rng.uniform(0, 1, size=n).tolist()
        pos = (rng.uniform(size=n) < 0.4).tolist()
        if not any(pos):
            pos[0] = True
        for method in ("voc07", "continuous"):
            assert average_precision(conf, pos, method) == pytest.approx(
                enumeration_ap(conf, pos, method), abs=1e-12
            )


def test_ap_invariant_under_monotone_transform(rng):
    conf = rng.uniform(0.1, 1, size=15)
    pos = (rng.uniform(size=15) < 0.5).tolist()
    if not any(pos):
        pos[0] = True
    for method in ("voc07", "continuous"):
        base = average_precision(conf, pos, method)
        assert average_precision(np.exp(3 * conf), pos, method) == pytest.approx(base)


def test_ap_methods_agree_on_single_step_at_full_recall():
    # all positives share the top confidence: one step at recall 1
    conf = [0.9, 0.9, 0.1, 0.1]
    pos = [True, True, False, False]
    v = average_precision(conf, pos, "voc07")
    c = average_precision(conf, pos, "continuous")
    assert v == pytest.approx(c, abs=1e-12) == pytest.approx(1.0)


def test_report_table_arithmetic_pascal():
    report = subitizing_report(
        {"1": 0.62, "2": 0.42, "3": 0.20, "4+": 0.55},
        {"1": 1, "2": 1, "3": 1, "4+": 1},
    )
    assert report.mean_ap == pytest.approx(0.4475, abs=1e-12)
    assert round(report.mean_ap, 2) == pytest.approx(0.45)


def test_report_table_arithmetic_sos():
    counts = {"0": 338, "1": 617, "2": 219, "3": 137, "4+": 69}
    ours = subitizing_report(
        {"0": 0.95, "1": 0.92, "2": 0.61, "3": 0.59, "4+": 0.67}, counts
    )
    assert ours.weighted_ap == pytest.approx(0.833, abs=0.005)
    baseline = subitizing_report(
        {"0": 0.93, "1": 0.90, "2": 0.51, "3": 0.48, "4+": 0.65}, counts
    )
    assert baseline.mean_ap == pytest.approx(0.694, abs=0.005)
    assert baseline.weighted_ap == pytest.approx(0.791, abs=0.005)


def test_weighted_equals_mean_for_equal_counts(rng):
    aps = {c: float(rng.uniform(0, 1)) for c in ("1", "2", "3", "4+")}
    counts = {c: 25 for c in aps}
    report = subitizing_report(aps, counts)
    assert report.weighted_ap == pytest.approx(report.mean_ap, rel=1e-12)


def test_report_errors():
    with pytest.raises(ValidationError):
        subitizing_report({}, {})
    with pytest.raises(ValidationError):
        subitizing_report({"1": 0.5}, {"2": 3})


def test_class_distribution_table_counts():
    counts = {"1": 300, "2": 227, "3": 136, "4": 72, "5": 43, "6": 28, "7": 18, "8+": 26}
    dist = class_distribution(counts)
    assert sum(dist.values()) == pytest.approx(1.0, abs=1e-12)
    expected = {"1": 0.35, "2": 0.27, "3": 0.16, "4": 0.08,
                "5": 0.05, "6": 0.03, "7": 0.02, "8+": 0.03}
    for label, value in expected.items():
        assert dist[label] == pytest.approx(value, abs=0.005)


def test_class_distribution_edges(rng):
    assert class_distribution({"1": 7}) == {"1": 1.0}
    with pytest.raises(ValidationError):
        class_distribution({})
    counts = {str(i): int(rng.integers(1, 50)) for i in range(5)}
    total = sum(counts.values())
    dist = class_distribution(counts)
    for label, count in counts.items():
        assert dist[label] == pytest.approx(count / total, rel=1e-12)


def test_one_vs_rest_protocol_and_tie_order():
    scheme = PASCALS_SCHEME
    predictions = [
        SubitizingPrediction("b", (0.5, 0.1, 0.1, 0.1)),
        SubitizingPrediction("a", (0.5, 0.9, 0.1, 0.1)),
        SubitizingPrediction("c", (0.2, 0.8, 0.3, 0.4)),
        SubitizingPrediction("d", (0.1, 0.2, 0.9, 0.1)),
        SubitizingPrediction("e", (0.1, 0.2, 0.3, 0.8)),
    ]
    gt = {"a": "1", "b": "2", "c": "2", "d": "3", "e": "4+"}
    missing_class = dict(gt, e="3")
    with pytest.raises(UndefinedApError):
        one_vs_rest_ap(predictions, missing_class, scheme)  # "4+" has no positives
    per_class, counts = one_vs_rest_ap(predictions, gt, scheme, "continuous")
    assert counts == {"1": 1, "2": 2, "3": 1, "4+": 1}
    # class "1": tie at 0.5 between a and b resolves by image id, a first
    assert per_class["1"] == pytest.approx(1.0)
    assert per_class["3"] == pytest.approx(1.0)
