"""Instance rank scores, rank ordering with ties, and the SOR metric.

Each salient instance is scored by the mean predicted saliency over its
mask; instances are ranked by score (rank 1 = most salient, exact ties
get average ranks) and the predicted order is compared against the
ground-truth order with Spearman's rank correlation, affinely rescaled
to [0, 1] as the SOR score.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import AgreementMap, InstanceMap, SaliencyMap, normalize_saliency, require_same_shape
from .errors import IdMismatchError, NoInstancesError, UndefinedCorrelationError, ValidationError


@dataclass(frozen=True)
class InstanceScore:
    """Mean saliency of one instance mask."""

    instance_id: int
    score: float
    pixel_count: int

    def __post_init__(self):
        if self.pixel_count < 1:
            raise ValidationError(f"instance {self.instance_id} has no pixels")
        if not math.isfinite(self.score):
            raise ValidationError(f"instance {self.instance_id} has non-finite score")


@dataclass(frozen=True)
class RankVector:
    """Instance ids with 1-based ranks; ties carry fractional average ranks."""

    entries: tuple[tuple[int, float], ...]

    def __post_init__(self):
        n = len(self.entries)
        if n < 1:
            raise ValidationError("rank vector must contain at least one instance")
        ids = [i for i, _ in self.entries]
        if len(set(ids)) != n:
            raise ValidationError("rank vector has duplicate instance ids")
        total = sum(r for _, r in self.entries)
        if abs(total - n * (n + 1) / 2) > 1e-9:
            raise ValidationError(
                f"ranks must sum to n(n+1)/2 = {n * (n + 1) / 2}, got {total}"
            )

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def ids(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.entries)

    def rank_of(self, instance_id: int) -> float:
        for i, r in self.entries:
            if i == instance_id:
                return r
        raise KeyError(instance_id)


@dataclass(frozen=True)
class SorResult:
    """Spearman correlation and its [0, 1] rescaling for one image."""

    rho: float
    sor: float
    n_instances: int
    valid: bool


def instance_rank_scores(saliency: SaliencyMap, instances: InstanceMap) -> list[InstanceScore]:
    """Score each instance by the mean saliency over its mask."""
    require_same_shape(saliency, instances, "saliency and instance maps")
    ids = instances.instance_ids
    if not ids:
        raise NoInstancesError("instance map contains no salient objects")
    labels = instances.labels
    values = saliency.values
    scores = []
    for instance_id in ids:
        mask = labels == instance_id
        count = int(mask.sum())
        picked = values[mask]
        if picked.min() == picked.max():
            # exact mean of a constant region; keeps ties exact so the
            # tie-averaging policy fires instead of rounding noise
            score = float(picked[0])
        else:
            score = float(picked.sum() / count)
        scores.append(
            InstanceScore(instance_id=instance_id, score=score, pixel_count=count)
        )
    return scores


def average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based descending ranks (largest value gets rank 1); ties averaged."""
    a = np.asarray(values, dtype=np.float64).reshape(-1)
    n = a.size
    order = np.argsort(-a, kind="mergesort")
    ranks = np.empty(n, dtype=np.float64)
    i = 0
    while i < n:
        j = i
        while j + 1 < n and a[order[j + 1]] == a[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def rank_order(scores: list[InstanceScore]) -> RankVector:
    """Rank instances by score, most salient first."""
    if not scores:
        raise ValidationError("cannot rank an empty score list")
    ranks = average_ranks(np.array([s.score for s in scores]))
    return RankVector(tuple((s.instance_id, float(r)) for s, r in zip(scores, ranks)))


def _aligned_rank_arrays(r_gt: RankVector, r_pred: RankVector) -> tuple[np.ndarray, np.ndarray]:
    if set(r_gt.ids) != set(r_pred.ids):
        raise IdMismatchError(
            f"rank vectors cover different instances: {sorted(r_gt.ids)} vs {sorted(r_pred.ids)}"
        )
    pred = dict(r_pred.entries)
    a = np.array([r for _, r in r_gt.entries], dtype=np.float64)
    b = np.array([pred[i] for i, _ in r_gt.entries], dtype=np.float64)
    return a, b


def spearman(r_gt: RankVector, r_pred: RankVector) -> float:
    """Spearman correlation of two tie-averaged rank vectors.

    Computed as the Pearson correlation of the rank values, which is the
    standard tie-corrected form.  Raises when fewer than two instances
    are present or when either vector has zero rank variance (all tied).
    """
    a, b = _aligned_rank_arrays(r_gt, r_pred)
    n = a.size
    if n < 2:
        raise UndefinedCorrelationError(
            f"rank correlation needs at least 2 instances, got {n}"
        )
    a = a - a.mean()
    b = b - b.mean()
    sa = float(np.dot(a, a))
    sb = float(np.dot(b, b))
    if sa == 0.0 or sb == 0.0:
        raise UndefinedCorrelationError("rank correlation undefined: all ranks tied")
    rho = float(np.dot(a, b)) / math.sqrt(sa * sb)
    return min(1.0, max(-1.0, rho))


def sor_score(r_gt: RankVector, r_pred: RankVector) -> SorResult:
    """SOR = (spearman + 1) / 2; undefined correlations yield an invalid result."""
    n = len(r_gt)
    try:
        rho = spearman(r_gt, r_pred)
    except UndefinedCorrelationError:
        return SorResult(rho=float("nan"), sor=float("nan"), n_instances=n, valid=False)
    return SorResult(rho=rho, sor=(rho + 1.0) / 2.0, n_instances=n, valid=True)


def gt_rank_from_agreement(agreement: AgreementMap, instances: InstanceMap) -> RankVector:
    """Ground-truth rank order: mean observer agreement per instance."""
    return rank_order(instance_rank_scores(normalize_saliency(agreement), instances))


@dataclass(frozen=True)
class DatasetSor:
    """Mean SOR over the valid images of a dataset."""

    mean_sor: float
    n_valid: int
    n_excluded: int


def dataset_sor(results: list[SorResult]) -> DatasetSor:
    """Average SOR over valid results; invalid images are counted, not averaged."""
    valid = [r.sor for r in results if r.valid]
    if not valid:
        raise ValidationError("no image has a defined SOR score")
    return DatasetSor(
        mean_sor=float(np.mean(valid)),
        n_valid=len(valid),
        n_excluded=len(results) - len(valid),
    )


__all__ = [
    "InstanceScore",
    "RankVector",
    "SorResult",
    "DatasetSor",
    "instance_rank_scores",
    "average_ranks",
    "rank_order",
    "spearman",
    "sor_score",
    "gt_rank_from_agreement",
    "dataset_sor",
]
