"""Pure statistical kernel: ROC-AUC, confusion metrics, F1 threshold sweeps,
DeLong's correlated-AUC test, Spearman rank correlation, tie-corrected
Kruskal-Wallis, and Bonferroni adjustment.

Everything here is a pure function of its inputs and safe to call from any
number of threads. Tie handling is midrank throughout, which keeps the AUC,
the DeLong placement values, and the rank tests mutually consistent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.stats import chi2

from .errors import (
    DegenerateLabels,
    FeatureMismatch,
    InsufficientGroups,
    LengthMismatch,
    ZeroVariance,
)

__all__ = [
    "ScoredSample",
    "ConfusionCounts",
    "DeLongResult",
    "KruskalWallisResult",
    "DEFAULT_TAU_GRID",
    "midrank",
    "roc_auc",
    "confusion_at_threshold",
    "f1_threshold_sweep",
    "delong_test",
    "spearman_rho",
    "kruskal_wallis",
    "bonferroni",
]

#: Operating-threshold sweep used for production threshold selection.
DEFAULT_TAU_GRID: tuple[float, ...] = (0.30, 0.35, 0.40, 0.45, 0.50, 0.55, 0.60)


@dataclass(frozen=True)
class ScoredSample:
    """One scored transaction: model probability, ground-truth label, metadata."""

    transaction_id: str
    score: float
    label: int
    timestamp: int
    amount: Decimal

    def __post_init__(self) -> None:
        if not self.transaction_id:
            raise ValueError("transaction_id must be non-empty")
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score {self.score} outside [0, 1]")
        if self.label not in (0, 1):
            raise ValueError(f"label {self.label} not in {{0, 1}}")
        if self.amount < 0:
            raise ValueError(f"amount {self.amount} negative")


@dataclass(frozen=True)
class ConfusionCounts:
    """Confusion counts at a fixed decision threshold."""

    tp: int
    fp: int
    tn: int
    fn: int
    threshold: float

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def precision(self) -> float | None:
        """tp / (tp + fp); None when nothing was predicted positive."""
        denom = self.tp + self.fp
        return None if denom == 0 else self.tp / denom

    @property
    def recall(self) -> float | None:
        denom = self.tp + self.fn
        return None if denom == 0 else self.tp / denom

    @property
    def f1(self) -> float:
        denom = 2 * self.tp + self.fp + self.fn
        return 0.0 if denom == 0 else 2 * self.tp / denom


@dataclass(frozen=True)
class DeLongResult:
    """Outcome of DeLong's test comparing two correlated AUCs.

    ``z_statistic`` is +/-inf only in the degenerate case where the paired
    variance collapses to zero while the AUCs differ; ``p_value_two_sided``
    is 0 there, and 1 for elementwise-identical score vectors.
    """

    auc_a: float
    auc_b: float
    variance_diff: float
    z_statistic: float
    p_value_two_sided: float

    @property
    def degenerate_variance(self) -> bool:
        return self.variance_diff == 0.0 and self.auc_a != self.auc_b


@dataclass(frozen=True)
class KruskalWallisResult:
    """Tie-corrected Kruskal-Wallis H with chi-square p and Bonferroni adjustment."""

    h_statistic: float
    degrees_freedom: int
    p_value: float
    p_adjusted: float


def midrank(values: Sequence[float] | np.ndarray) -> np.ndarray:
    """Midranks (1-based) with ties sharing the average of their positions."""
    x = np.asarray(values, dtype=float)
    order = np.argsort(x, kind="mergesort")
    z = x[order]
    n = len(x)
    ranks = np.empty(n, dtype=float)
    i = 0
    while i < n:
        j = i
        while j < n and z[j] == z[i]:
            j += 1
        ranks[i:j] = 0.5 * (i + j - 1) + 1.0
        i = j
    out = np.empty(n, dtype=float)
    out[order] = ranks
    return out


def _scores_labels(samples: Iterable[ScoredSample]) -> tuple[np.ndarray, np.ndarray]:
    scores = []
    labels = []
    for s in samples:
        scores.append(s.score)
        labels.append(s.label)
    return np.asarray(scores, dtype=float), np.asarray(labels, dtype=int)


def roc_auc(samples: Sequence[ScoredSample]) -> float:
    """Mann-Whitney AUC: (concordant + 0.5 * tied) / (positives * negatives)."""
    scores, labels = _scores_labels(samples)
    return roc_auc_from_arrays(scores, labels)


def roc_auc_from_arrays(scores: np.ndarray, labels: np.ndarray) -> float:
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    m = int((labels == 1).sum())
    n = int((labels == 0).sum())
    if m == 0 or n == 0:
        raise DegenerateLabels("need at least one positive and one negative label")
    ranks = midrank(scores)
    pos_rank_sum = float(ranks[labels == 1].sum())
    return (pos_rank_sum - m * (m + 1) / 2.0) / (m * n)


def confusion_at_threshold(samples: Sequence[ScoredSample], tau: float) -> ConfusionCounts:
    """Counts with predicted-positive defined as score >= tau."""
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau {tau} outside [0, 1]")
    tp = fp = tn = fn = 0
    for s in samples:
        predicted = s.score >= tau
        if predicted and s.label == 1:
            tp += 1
        elif predicted and s.label == 0:
            fp += 1
        elif not predicted and s.label == 0:
            tn += 1
        else:
            fn += 1
    return ConfusionCounts(tp=tp, fp=fp, tn=tn, fn=fn, threshold=tau)


def f1_threshold_sweep(
    samples: Sequence[ScoredSample],
    grid: Sequence[float] = DEFAULT_TAU_GRID,
) -> tuple[float, list[tuple[float, float]]]:
    """Sweep F1 over a threshold grid.

    Returns (best_tau, [(tau, f1), ...]) in grid order. Ties in F1 are broken
    by the smallest tau, which keeps the alerting volume conservative.
    """
    if not grid:
        raise ValueError("threshold grid must be non-empty")
    _, labels = _scores_labels(samples)
    if (labels == 1).sum() == 0 or (labels == 0).sum() == 0:
        raise DegenerateLabels("need both classes present for an F1 sweep")
    per_tau: list[tuple[float, float]] = []
    best_tau = None
    best_f1 = -1.0
    for tau in grid:
        f1 = confusion_at_threshold(samples, tau).f1
        per_tau.append((tau, f1))
        if f1 > best_f1 or (f1 == best_f1 and best_tau is not None and tau < best_tau):
            best_f1 = f1
            best_tau = tau
    assert best_tau is not None
    return best_tau, per_tau


def _placement_values(scores: np.ndarray, pos_mask: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-positive and per-negative placement values (DeLong structural components)."""
    pos = scores[pos_mask]
    neg = scores[~pos_mask]
    m, n = len(pos), len(neg)
    tz = midrank(np.concatenate([pos, neg]))
    tx = midrank(pos)
    ty = midrank(neg)
    v_pos = (tz[:m] - tx) / n
    v_neg = 1.0 - (tz[m:] - ty) / m
    return v_pos, v_neg


def delong_test(
    scores_a: Sequence[float],
    scores_b: Sequence[float],
    labels: Sequence[int],
) -> DeLongResult:
    """DeLong's test for two correlated AUCs over the same labelled transactions.

    Per-positive and per-negative placement values give each model's AUC and
    the 2x2 covariance of the paired AUC estimates;
    z = (auc_a - auc_b) / sqrt(var_a + var_b - 2 cov), two-sided normal p.
    """
    a = np.asarray(scores_a, dtype=float)
    b = np.asarray(scores_b, dtype=float)
    y = np.asarray(labels)
    if len(a) != len(b) or len(a) != len(y):
        raise LengthMismatch("paired score lists must align 1:1 with labels")
    pos_mask = y == 1
    m = int(pos_mask.sum())
    n = int((~pos_mask).sum())
    if m < 2 or n < 2:
        raise DegenerateLabels("DeLong's test needs >=2 positives and >=2 negatives")

    vpa, vna = _placement_values(a, pos_mask)
    vpb, vnb = _placement_values(b, pos_mask)
    auc_a = float(vpa.mean())
    auc_b = float(vpb.mean())

    s_pos = np.cov(np.vstack([vpa, vpb]))
    s_neg = np.cov(np.vstack([vna, vnb]))
    s = s_pos / m + s_neg / n
    variance_diff = max(float(s[0, 0] + s[1, 1] - 2.0 * s[0, 1]), 0.0)

    diff = auc_a - auc_b
    if np.array_equal(a, b) or (diff == 0.0 and variance_diff == 0.0):
        return DeLongResult(auc_a, auc_b, 0.0, 0.0, 1.0)
    if variance_diff == 0.0:
        # paired variance collapsed but the AUCs differ: infinite-z flag
        return DeLongResult(auc_a, auc_b, 0.0, math.copysign(math.inf, diff), 0.0)
    z = diff / math.sqrt(variance_diff)
    p = math.erfc(abs(z) / math.sqrt(2.0))
    return DeLongResult(auc_a, auc_b, variance_diff, z, p)


def spearman_rho(
    ranking_a: Mapping[str, float],
    ranking_b: Mapping[str, float],
) -> float:
    """Spearman rank correlation between two importance vectors.

    Both vectors must cover the identical feature set. Without ties this is
    the classical 1 - 6*sum(d^2)/(n(n^2-1)); with ties it falls back to the
    Pearson correlation of midrank vectors (the two agree when tie-free).
    """
    keys_a = set(ranking_a)
    keys_b = set(ranking_b)
    if keys_a != keys_b:
        raise FeatureMismatch(
            f"feature sets differ: only-in-a={sorted(keys_a - keys_b)[:5]}, "
            f"only-in-b={sorted(keys_b - keys_a)[:5]}"
        )
    if len(keys_a) < 2:
        raise ZeroVariance("need at least two features to correlate")
    keys = sorted(keys_a)
    ra = midrank([float(ranking_a[k]) for k in keys])
    rb = midrank([float(ranking_b[k]) for k in keys])
    if np.all(ra == ra[0]) or np.all(rb == rb[0]):
        raise ZeroVariance("constant rank vector; correlation undefined")

    n = len(keys)
    tie_free = len(np.unique(ra)) == n and len(np.unique(rb)) == n
    if tie_free:
        d2 = float(((ra - rb) ** 2).sum())
        return 1.0 - 6.0 * d2 / (n * (n * n - 1))
    da = ra - ra.mean()
    db = rb - rb.mean()
    return float((da * db).sum() / math.sqrt((da * da).sum() * (db * db).sum()))


def kruskal_wallis(
    groups: Sequence[Sequence[float]],
    m_comparisons: int = 30,
) -> KruskalWallisResult:
    """Tie-corrected Kruskal-Wallis H test across k groups.

    p comes from the chi-square approximation with df = k - 1, and
    p_adjusted = min(1, p * m_comparisons). All values identical yields
    H = 0, p = 1 by convention.
    """
    if len(groups) < 2:
        raise InsufficientGroups("need at least two groups")
    if any(len(g) == 0 for g in groups):
        raise InsufficientGroups("every group must be non-empty")
    if m_comparisons < 1:
        raise ValueError("m_comparisons must be a positive integer")
    sizes = [len(g) for g in groups]
    pooled = np.concatenate([np.asarray(g, dtype=float) for g in groups])
    total = len(pooled)
    if total < len(groups) + 1:
        raise InsufficientGroups("total observations must exceed the group count")

    df = len(groups) - 1
    _, counts = np.unique(pooled, return_counts=True)
    tie_correction = 1.0 - float((counts**3 - counts).sum()) / (total**3 - total)
    if tie_correction == 0.0:
        # every value identical
        return KruskalWallisResult(0.0, df, 1.0, 1.0)

    ranks = midrank(pooled)
    h = 0.0
    start = 0
    for size in sizes:
        h += float(ranks[start : start + size].sum()) ** 2 / size
        start += size
    h = (12.0 / (total * (total + 1)) * h - 3.0 * (total + 1)) / tie_correction
    h = max(h, 0.0)
    p = float(chi2.sf(h, df))
    return KruskalWallisResult(h, df, p, bonferroni(p, m_comparisons))


def bonferroni(p_value: float, m_comparisons: int) -> float:
    """min(1, p * m): monotone in both arguments."""
    return min(1.0, p_value * m_comparisons)
