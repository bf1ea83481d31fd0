import itertools
import math

import numpy as np
import pytest

from salientrank.core import AgreementMap, InstanceMap, SaliencyMap, normalize_saliency
from salientrank.errors import (
    DimensionMismatchError,
    IdMismatchError,
    NoInstancesError,
    UndefinedCorrelationError,
    ValidationError,
)
from salientrank.ranking import (
    InstanceScore,
    RankVector,
    dataset_sor,
    gt_rank_from_agreement,
    instance_rank_scores,
    rank_order,
    sor_score,
    spearman,
)

from conftest import random_agreement


def ranks_from_order(*pairs):
    return RankVector(tuple(pairs))


def closed_form_spearman(a, b):
    # tie-free oracle: 1 - 6 sum d^2 / (n (n^2 - 1))
    n = len(a)
    d2 = sum((x - y) ** 2 for x, y in zip(a, b))
    return 1.0 - 6.0 * d2 / (n * (n * n - 1))


def test_scores_constant_instance():
    sal = SaliencyMap(np.full((2, 2), 0.5))
    inst = InstanceMap(np.array([[1, 1], [0, 0]]))
    (score,) = instance_rank_scores(sal, inst)
    assert score.score == 0.5
    assert score.pixel_count == 2


def test_scores_exact_mean():
    sal = SaliencyMap(np.array([[0.2, 0.4], [0.6, 0.8]]))
    inst = InstanceMap(np.ones((2, 2), dtype=int))
    (score,) = instance_rank_scores(sal, inst)
    assert score.score == pytest.approx(0.5, abs=1e-15)


def test_scores_match_pixel_loop(rng):
    # oracle: per-pixel accumulator
    sal = SaliencyMap(rng.uniform(0, 1, size=(16, 16)))
    labels = rng.integers(0, 4, size=(16, 16))
    if not (labels > 0).any():
        labels[0, 0] = 1
    inst = InstanceMap(labels)
    scores = {s.instance_id: s for s in instance_rank_scores(sal, inst)}
    for instance_id in inst.instance_ids:
        total, count = 0.0, 0
        for y in range(16):
            for x in range(16):
                if labels[y, x] == instance_id:
                    total += sal.values[y, x]
                    count += 1
        assert scores[instance_id].pixel_count == count
        assert scores[instance_id].score == pytest.approx(total / count, rel=1e-12)


def test_scores_errors():
    sal = SaliencyMap(np.zeros((2, 2)))
    with pytest.raises(DimensionMismatchError):
        instance_rank_scores(sal, InstanceMap(np.ones((3, 3), dtype=int)))
    with pytest.raises(NoInstancesError):
        instance_rank_scores(sal, InstanceMap(np.zeros((2, 2), dtype=int)))


def test_zero_saliency_instance_still_scored():
    sal = SaliencyMap(np.array([[0.0, 0.9], [0.0, 0.9]]))
    inst = InstanceMap(np.array([[1, 2], [1, 2]]))
    scores = {s.instance_id: s.score for s in instance_rank_scores(sal, inst)}
    assert scores[1] == 0.0  # a miss must hurt the correlation, never be dropped


def test_rank_order_strict():
    scores = [InstanceScore(1, 0.9, 1), InstanceScore(2, 0.5, 1), InstanceScore(3, 0.1, 1)]
    ranks = dict(rank_order(scores).entries)
    assert ranks == {1: 1.0, 2: 2.0, 3: 3.0}


def test_rank_order_tie_averaging():
    scores = [InstanceScore(1, 0.5, 1), InstanceScore(2, 0.5, 1)]
    ranks = dict(rank_order(scores).entries)
    assert ranks == {1: 1.5, 2: 1.5}


def test_rank_sum_property(rng):
    for _ in range(50):
        n = int(rng.integers(1, 9))
        scores = [
            InstanceScore(i + 1, float(rng.choice([0.1, 0.4, 0.4, 0.9])), 1)
            for i in range(n)
        ]
        ranks = [r for _, r in rank_order(scores).entries]
        assert sum(ranks) == pytest.approx(n * (n + 1) / 2)


def test_spearman_identical_is_exactly_one():
    a = ranks_from_order((1, 1.0), (2, 2.0), (3, 3.0), (4, 4.0), (5, 5.0))
    assert spearman(a, a) == 1.0


def test_spearman_reversed_is_exactly_minus_one():
    a = ranks_from_order((1, 1.0), (2, 2.0), (3, 3.0), (4, 4.0), (5, 5.0))
    b = ranks_from_order((1, 5.0), (2, 4.0), (3, 3.0), (4, 2.0), (5, 1.0))
    assert spearman(a, b) == -1.0


def test_spearman_closed_form_case():
    a = ranks_from_order((1, 1.0), (2, 2.0), (3, 3.0), (4, 4.0))
    b = ranks_from_order((1, 2.0), (2, 1.0), (3, 4.0), (4, 3.0))
    assert spearman(a, b) == pytest.approx(0.6, abs=1e-12)
    assert closed_form_spearman([1, 2, 3, 4], [2, 1, 4, 3]) == pytest.approx(0.6)


def test_spearman_symmetry(rng):
    for _ in range(20):
        n = int(rng.integers(2, 7))
        perm = rng.permutation(n) + 1.0
        a = ranks_from_order(*[(i + 1, float(i + 1)) for i in range(n)])
        b = ranks_from_order(*[(i + 1, float(perm[i])) for i in range(n)])
        assert spearman(a, b) == pytest.approx(spearman(b, a), abs=1e-15)


def test_spearman_errors():
    single = ranks_from_order((1, 1.0))
    with pytest.raises(UndefinedCorrelationError):
        spearman(single, single)
    a = ranks_from_order((1, 1.0), (2, 2.0))
    c = ranks_from_order((3, 1.0), (4, 2.0))
    with pytest.raises(IdMismatchError):
        spearman(a, c)
    tied = ranks_from_order((1, 1.5), (2, 1.5))
    with pytest.raises(UndefinedCorrelationError):
        spearman(tied, a)


def test_sor_values():
    a = ranks_from_order((1, 1.0), (2, 2.0), (3, 3.0), (4, 4.0))
    b = ranks_from_order((1, 2.0), (2, 1.0), (3, 4.0), (4, 3.0))
    rev = ranks_from_order((1, 4.0), (2, 3.0), (3, 2.0), (4, 1.0))
    assert sor_score(a, a).sor == 1.0
    assert sor_score(a, rev).sor == 0.0
    assert sor_score(a, b).sor == pytest.approx(0.8, abs=1e-12)


def test_sor_invalid_for_single_instance():
    one = ranks_from_order((1, 1.0))
    result = sor_score(one, one)
    assert not result.valid
    assert math.isnan(result.sor)
    assert result.n_instances == 1


def test_sor_permutation_exhaustion_small():
    for n in (2, 3, 4):
        gt = ranks_from_order(*[(i + 1, float(i + 1)) for i in range(n)])
        for perm in itertools.permutations(range(1, n + 1)):
            pred = ranks_from_order(*[(i + 1, float(perm[i])) for i in range(n)])
            expected = (closed_form_spearman(list(range(1, n + 1)), list(perm)) + 1) / 2
            assert sor_score(gt, pred).sor == pytest.approx(expected, abs=1e-12)


def test_gt_rank_from_agreement_levels():
    agreement = AgreementMap(np.array([[10, 10, 0], [3, 3, 0]]), 12)
    inst = InstanceMap(np.array([[1, 1, 0], [2, 2, 0]]))
    ranks = dict(gt_rank_from_agreement(agreement, inst).entries)
    assert ranks == {1: 1.0, 2: 2.0}


def test_gt_rank_ties():
    agreement = AgreementMap(np.array([[5, 0, 5]]), 12)
    inst = InstanceMap(np.array([[1, 0, 2]]))
    ranks = dict(gt_rank_from_agreement(agreement, inst).entries)
    assert ranks == {1: 1.5, 2: 1.5}


def test_gt_rank_composition_oracle(rng):
    for _ in range(10):
        a = random_agreement(rng, 8, 8)
        labels = rng.integers(0, 4, size=(8, 8))
        labels[0, 0] = 1
        inst = InstanceMap(labels)
        direct = gt_rank_from_agreement(a, inst)
        composed = rank_order(instance_rank_scores(normalize_saliency(a), inst))
        assert direct.entries == composed.entries


def test_monotone_transform_leaves_ranks_unchanged(rng):
    sal_values = rng.uniform(0.05, 0.9, size=(8, 8))
    labels = rng.integers(0, 4, size=(8, 8))
    labels[0, 0] = 1
    inst = InstanceMap(labels)
    base = rank_order(instance_rank_scores(SaliencyMap(sal_values), inst))
    squashed = rank_order(instance_rank_scores(SaliencyMap(sal_values**3), inst))
    assert base.entries == squashed.entries


def test_dataset_sor_aggregation():
    from salientrank.ranking import SorResult

    all_perfect = [SorResult(1.0, 1.0, 3, True)] * 4
    assert dataset_sor(all_perfect).mean_sor == 1.0

    mixed = [
        SorResult(1.0, 1.0, 3, True),
        SorResult(-1.0, 0.0, 3, True),
        SorResult(float("nan"), float("nan"), 1, False),
    ]
    summary = dataset_sor(mixed)
    assert summary.mean_sor == 0.5
    assert summary.n_valid == 2
    assert summary.n_excluded == 1

    with pytest.raises(ValidationError):
        dataset_sor([SorResult(float("nan"), float("nan"), 1, False)])


def test_dataset_sor_matches_plain_mean(rng):
    from salientrank.ranking import SorResult

    values = rng.uniform(0, 1, size=20)
    results = [SorResult(2 * v - 1, v, 3, True) for v in values]
    assert dataset_sor(results).mean_sor == pytest.approx(
        sum(values) / len(values), rel=1e-12
    )


def test_sor_bounds_random(rng):
    for _ in range(100):
        n = int(rng.integers(2, 7))
        gt = ranks_from_order(*[(i + 1, float(i + 1)) for i in range(n)])
        perm = rng.permutation(n) + 1.0
        pred = ranks_from_order(*[(i + 1, float(perm[i])) for i in range(n)])
        result = sor_score(gt, pred)
        assert 0.0 <= result.sor <= 1.0
