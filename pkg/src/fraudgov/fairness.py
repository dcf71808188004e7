"""Disparate-impact screening: demographic proxy quartile binning and
per-feature Kruskal-Wallis tests over transaction-level attributions.

The screen runs the rank test on raw signed attribution values within each
proxy quartile; global top-k selection uses mean absolute attribution. Proxy
probabilities are independent per-category scores (they need not sum to 1),
and each category is quartiled separately.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import InsufficientProfiles
from .metrics import KruskalWallisResult, kruskal_wallis

__all__ = [
    "PROXY_CATEGORIES",
    "ShapPanel",
    "ProxyProfile",
    "FairnessFinding",
    "ScreenResult",
    "VERDICT_CLEAR",
    "VERDICT_WATCH",
    "VERDICT_VIOLATION",
    "verdict_for",
    "quartile_bins",
    "screen",
]

PROXY_CATEGORIES: tuple[str, ...] = ("white_nh", "black_nh", "hispanic", "asian")

VERDICT_CLEAR = "clear"
VERDICT_WATCH = "watch"
VERDICT_VIOLATION = "violation"

_VERDICT_SEVERITY = {VERDICT_CLEAR: 0, VERDICT_WATCH: 1, VERDICT_VIOLATION: 2}

DEFAULT_CLEAR_P = 0.12
DEFAULT_VIOLATION_P = 0.05


@dataclass(frozen=True, eq=False)
class ShapPanel:
    """Rectangular per-transaction attribution matrix with feature columns."""

    transaction_ids: tuple[str, ...]
    features: tuple[str, ...]
    values: np.ndarray  # shape (n_transactions, n_features), signed

    def __post_init__(self) -> None:
        if self.values.shape != (len(self.transaction_ids), len(self.features)):
            raise ValueError(
                f"matrix shape {self.values.shape} does not match "
                f"{len(self.transaction_ids)} transactions x {len(self.features)} features"
            )

    def global_importance(self) -> dict[str, float]:
        """Mean absolute attribution per feature (global importance vector)."""
        means = np.abs(self.values).mean(axis=0)
        return {f: float(v) for f, v in zip(self.features, means)}

    def top_features(self, k: int) -> list[str]:
        """Top-k features by mean |attribution|, importance ties broken by name."""
        imp = self.global_importance()
        return sorted(imp, key=lambda f: (-imp[f], f))[:k]

    def row(self, transaction_id: str) -> dict[str, float]:
        idx = self._index().get(transaction_id)
        if idx is None:
            raise KeyError(transaction_id)
        return {f: float(v) for f, v in zip(self.features, self.values[idx])}

    def _index(self) -> dict[str, int]:
        cached = getattr(self, "_id_index", None)
        if cached is None:
            cached = {t: i for i, t in enumerate(self.transaction_ids)}
            object.__setattr__(self, "_id_index", cached)
        return cached

    def __contains__(self, transaction_id: str) -> bool:
        return transaction_id in self._index()


@dataclass(frozen=True)
class ProxyProfile:
    """Per-transaction demographic proxy probabilities, one per category."""

    transaction_id: str
    proxy_probabilities: Mapping[str, float]

    def __post_init__(self) -> None:
        missing = [c for c in PROXY_CATEGORIES if c not in self.proxy_probabilities]
        if missing:
            raise ValueError(f"profile {self.transaction_id} missing categories {missing}")
        for category, p in self.proxy_probabilities.items():
            if not 0.0 <= p <= 1.0:
                raise ValueError(
                    f"profile {self.transaction_id} category {category} probability {p} outside [0, 1]"
                )


@dataclass(frozen=True)
class FairnessFinding:
    """One (feature, category) rank test with its verdict."""

    feature: str
    category: str
    kw: KruskalWallisResult
    verdict: str
    global_importance: float


@dataclass(frozen=True)
class ScreenResult:
    """All findings plus transactions excluded for missing attribution rows."""

    findings: tuple[FairnessFinding, ...]
    excluded_transaction_ids: tuple[str, ...]
    overall_verdict: str


def verdict_for(
    p_adjusted: float,
    clear_p: float = DEFAULT_CLEAR_P,
    violation_p: float = DEFAULT_VIOLATION_P,
) -> str:
    """Total verdict mapping: violation below violation_p, clear strictly above
    clear_p, watch in between (both boundaries fail closed into watch)."""
    if p_adjusted < violation_p:
        return VERDICT_VIOLATION
    if p_adjusted > clear_p:
        return VERDICT_CLEAR
    return VERDICT_WATCH


def quartile_bins(
    profiles: Sequence[ProxyProfile],
    category: str,
) -> tuple[tuple[str, ...], ...]:
    """Four disjoint transaction-id bins ordered by ascending proxy probability.

    Ties sort by transaction_id; when the count is not divisible by four the
    extra elements go to the lowest quartiles, so bin sizes differ by at most
    one and the binning is a deterministic partition of the input.
    """
    if category not in PROXY_CATEGORIES:
        raise ValueError(f"unknown proxy category {category!r}")
    if len(profiles) < 4:
        raise InsufficientProfiles(f"need >=4 profiles, got {len(profiles)}")
    ordered = sorted(
        profiles,
        key=lambda p: (p.proxy_probabilities[category], p.transaction_id),
    )
    n = len(ordered)
    base, remainder = divmod(n, 4)
    bins: list[tuple[str, ...]] = []
    start = 0
    for q in range(4):
        size = base + (1 if q < remainder else 0)
        bins.append(tuple(p.transaction_id for p in ordered[start : start + size]))
        start += size
    return tuple(bins)


def screen(
    shap_panel: ShapPanel,
    profiles: Sequence[ProxyProfile],
    top_k: int = 10,
    m_comparisons: int = 30,
    clear_p: float = DEFAULT_CLEAR_P,
    violation_p: float = DEFAULT_VIOLATION_P,
) -> ScreenResult:
    """Kruskal-Wallis screen of top-k features across proxy quartiles.

    Profiles without an attribution row are excluded (and reported) before
    binning. One finding per (feature, category); the overall verdict is the
    worst finding. Deterministic under any permutation of the inputs.
    """
    if top_k < 1:
        raise ValueError("top_k must be positive")
    if top_k > len(shap_panel.features):
        raise ValueError(
            f"top_k {top_k} exceeds feature count {len(shap_panel.features)}"
        )
    matched = [p for p in profiles if p.transaction_id in shap_panel]
    excluded = tuple(
        sorted(p.transaction_id for p in profiles if p.transaction_id not in shap_panel)
    )
    if len(matched) < 4:
        raise InsufficientProfiles(
            f"only {len(matched)} profiles matched the attribution panel; need >=4"
        )

    importance = shap_panel.global_importance()
    features = shap_panel.top_features(top_k)
    id_index = {t: i for i, t in enumerate(shap_panel.transaction_ids)}
    feature_index = {f: j for j, f in enumerate(shap_panel.features)}

    findings: list[FairnessFinding] = []
    for category in PROXY_CATEGORIES:
        bins = quartile_bins(matched, category)
        bin_rows = [np.array([id_index[t] for t in b], dtype=int) for b in bins]
        for feature in features:
            col = shap_panel.values[:, feature_index[feature]]
            groups = [col[rows] for rows in bin_rows]
            kw = kruskal_wallis(groups, m_comparisons=m_comparisons)
            findings.append(
                FairnessFinding(
                    feature=feature,
                    category=category,
                    kw=kw,
                    verdict=verdict_for(kw.p_adjusted, clear_p, violation_p),
                    global_importance=importance[feature],
                )
            )
    overall = max(
        (f.verdict for f in findings),
        key=lambda v: _VERDICT_SEVERITY[v],
        default=VERDICT_CLEAR,
    )
    return ScreenResult(
        findings=tuple(findings),
        excluded_transaction_ids=excluded,
        overall_verdict=overall,
    )
