"""Temporal drift protocol: chronological splits, out-of-time AUC deltas,
monthly attribution-stability series, and the ablation delta ledger.

Nothing here retrains a model. Ablation entries are externally supplied AUC
pairs; this module only computes deltas and ranks them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import EmptyInput, FeatureMismatch, ZeroVariance
from .metrics import ScoredSample, roc_auc, spearman_rho

__all__ = [
    "TemporalSplit",
    "DriftReport",
    "AblationEntry",
    "StabilityPoint",
    "DEFAULT_SPLIT_FRACTION",
    "DEFAULT_TEMPORAL_FLOOR",
    "split_sizes",
    "temporal_split",
    "drift_report",
    "drift_report_from_auc",
    "shap_stability_series",
    "ablation_ledger",
]

DEFAULT_SPLIT_FRACTION = 0.75
DEFAULT_TEMPORAL_FLOOR = 0.85


@dataclass(frozen=True)
class TemporalSplit:
    """Chronological train/test partition of a scored sample set."""

    train: tuple[ScoredSample, ...]
    test: tuple[ScoredSample, ...]
    split_fraction: float
    boundary_timestamp: int


@dataclass(frozen=True)
class DriftReport:
    """Random-split vs out-of-time AUC with the configured performance floor."""

    random_split_auc: float
    temporal_auc: float
    delta_auc: float
    threshold_floor: float
    passed: bool


@dataclass(frozen=True)
class AblationEntry:
    """AUC degradation from removing one feature group (externally measured)."""

    feature_group: str
    auc_full: float
    auc_without: float
    delta_auc: float
    members: tuple[str, ...] = field(default=())


@dataclass(frozen=True)
class StabilityPoint:
    """One month of the attribution-stability series; rho or a per-month error."""

    month_index: int
    rho: float | None
    error: str | None = None


def split_sizes(n: int, fraction: float) -> tuple[int, int]:
    """(train, test) sizes: train = round(fraction * n), clamped so both are non-empty."""
    k = int(math.floor(fraction * n + 0.5))
    k = min(max(k, 1), n - 1)
    return k, n - k


def temporal_split(
    samples: Sequence[ScoredSample],
    fraction: float = DEFAULT_SPLIT_FRACTION,
) -> TemporalSplit:
    """Chronological split: earliest ``fraction`` of transactions to train.

    Sorting is stable on (timestamp, transaction_id), so equal-timestamp
    boundary ties resolve deterministically and reruns are byte-identical.
    """
    if not samples:
        raise EmptyInput("cannot split an empty sample set")
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction {fraction} outside (0, 1)")
    if len(samples) < 2:
        raise EmptyInput("need at least two samples to split")
    ordered = sorted(samples, key=lambda s: (s.timestamp, s.transaction_id))
    k, _ = split_sizes(len(ordered), fraction)
    train = tuple(ordered[:k])
    test = tuple(ordered[k:])
    return TemporalSplit(
        train=train,
        test=test,
        split_fraction=fraction,
        boundary_timestamp=train[-1].timestamp,
    )


def drift_report_from_auc(
    random_split_auc: float,
    temporal_auc: float,
    floor: float = DEFAULT_TEMPORAL_FLOOR,
) -> DriftReport:
    """Assemble a DriftReport from already-computed AUCs (metric-file replay path)."""
    return DriftReport(
        random_split_auc=random_split_auc,
        temporal_auc=temporal_auc,
        delta_auc=temporal_auc - random_split_auc,
        threshold_floor=floor,
        passed=temporal_auc >= floor,
    )


def drift_report(
    random_samples: Sequence[ScoredSample],
    temporal_test_samples: Sequence[ScoredSample],
    floor: float = DEFAULT_TEMPORAL_FLOOR,
) -> DriftReport:
    """Compute both AUCs and report the out-of-time delta against the floor."""
    return drift_report_from_auc(
        roc_auc(random_samples), roc_auc(temporal_test_samples), floor
    )


def shap_stability_series(
    baseline: Mapping[str, float],
    monthly: Sequence[Mapping[str, float]],
) -> list[StabilityPoint]:
    """Spearman rho of each month's importance vector against the baseline.

    A month whose feature set mismatches (or is otherwise degenerate) is
    reported in place without aborting the rest of the series.
    """
    series: list[StabilityPoint] = []
    for index, vector in enumerate(monthly, start=1):
        try:
            rho = spearman_rho(baseline, vector)
            series.append(StabilityPoint(month_index=index, rho=rho))
        except (FeatureMismatch, ZeroVariance) as exc:
            series.append(StabilityPoint(month_index=index, rho=None, error=str(exc)))
    return series


def ablation_ledger(
    entries: Iterable[tuple[str, float, float] | tuple[str, float, float, Sequence[str]]],
) -> list[AblationEntry]:
    """Rank feature-group removals by AUC damage, most negative delta first."""
    ledger = []
    for entry in entries:
        group, auc_full, auc_without = entry[0], entry[1], entry[2]
        members = tuple(entry[3]) if len(entry) > 3 else ()
        for name, value in (("auc_full", auc_full), ("auc_without", auc_without)):
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} {value} outside [0, 1] for group {group!r}")
        ledger.append(
            AblationEntry(
                feature_group=group,
                auc_full=auc_full,
                auc_without=auc_without,
                delta_auc=auc_without - auc_full,
                members=members,
            )
        )
    return sorted(ledger, key=lambda e: (e.delta_auc, e.feature_group))
