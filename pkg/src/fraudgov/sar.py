"""SAR reason-code generation for flagged transactions.

Flagged means score >= the risk threshold (0.70 by default). Each flagged
transaction gets up to three reason codes spanning distinct feature
categories, ranked by absolute attribution, each with a quantified deviation
statement and a Form 111 suspicious-activity category from the configured
mapping table. Filing requires a human certification record; the coverage
statistics feed the FinCEN health score.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable, Mapping, Sequence

from .errors import UnmappedFeature
from .metrics import ScoredSample

__all__ = [
    "FEATURE_CATEGORIES",
    "DEFAULT_RISK_TAU",
    "DEFAULT_FORM111_TABLE",
    "ReasonCode",
    "ReasonCodeSet",
    "CertificationRecord",
    "BehaviorContext",
    "default_category",
    "build_category_map",
    "flag_alerts",
    "generate_reason_codes",
    "coverage_stats",
]

FEATURE_CATEGORIES: tuple[str, ...] = ("network", "amount", "velocity", "device", "identity")

DEFAULT_RISK_TAU = 0.70

#: Editable configuration table mapping feature categories to Form 111
#: suspicious-activity categories. The amount/device/velocity entries follow
#: the standard SAR narrative conventions; network and identity entries are
#: supplied so every category in FEATURE_CATEGORIES is coverable.
DEFAULT_FORM111_TABLE: dict[str, str] = {
    "amount": "Structuring/money laundering - amount inconsistent with known business",
    "device": "Identity theft - account takeover indicator",
    "velocity": "Rapid movement of funds - velocity anomaly",
    "network": "Suspicious use of multiple accounts - coordinated network activity",
    "identity": "Identity theft - identity verification anomaly",
}


@dataclass(frozen=True)
class ReasonCode:
    """One ranked reason code attached to a flagged transaction."""

    rank: int
    shap_value: float
    feature: str
    feature_category: str
    deviation_statement: str
    form111_category: str


@dataclass(frozen=True)
class ReasonCodeSet:
    """All reason codes generated for one alert."""

    alert_id: str
    codes: tuple[ReasonCode, ...]

    @property
    def covered(self) -> bool:
        """True when the alert carries at least three reason codes."""
        return len(self.codes) >= 3


@dataclass(frozen=True)
class CertificationRecord:
    """Human analyst attestation over one alert's reason codes."""

    alert_id: str
    analyst_id: str
    certified_at: int
    disposition: str  # certified | amended | rejected
    amended_text: str | None = None

    def __post_init__(self) -> None:
        if self.disposition not in ("certified", "amended", "rejected"):
            raise ValueError(f"unknown disposition {self.disposition!r}")
        if self.disposition in ("certified", "amended") and not self.analyst_id:
            raise ValueError("certified/amended records require an analyst_id")

    @property
    def counts_as_certified(self) -> bool:
        return self.disposition in ("certified", "amended")


@dataclass(frozen=True)
class BehaviorContext:
    """Rolling behavioural baselines for one account/transaction, if known."""

    rolling_mean_7d: Decimal | None = None
    count_24h: int | None = None
    count_24h_percentile: float | None = None
    device_mismatch: bool | None = None
    identity_mismatch: bool | None = None
    linkage_count: int | None = None


_IEEE_CIS_RULES: tuple[tuple[str, str], ...] = (
    (r"^TransactionAmt$", "amount"),
    (r"^[CD]\d+$", "network"),
    (r"^M\d+$", "velocity"),
    (r"^Device", "device"),
    (r"^id_3\d$", "device"),
    (r"^id_\d+$", "identity"),
)


def default_category(feature: str) -> str | None:
    """IEEE-CIS naming convention fallback for the feature->category map."""
    for pattern, category in _IEEE_CIS_RULES:
        if re.match(pattern, feature):
            return category
    return None


def build_category_map(
    features: Iterable[str],
    overrides: Mapping[str, str] | None = None,
) -> dict[str, str]:
    """Resolve every feature to a category via overrides then naming conventions."""
    overrides = dict(overrides or {})
    mapping: dict[str, str] = {}
    for feature in features:
        category = overrides.get(feature) or default_category(feature)
        if category is None:
            raise UnmappedFeature(f"feature {feature!r} has no category assignment")
        if category not in FEATURE_CATEGORIES:
            raise UnmappedFeature(
                f"feature {feature!r} mapped to unknown category {category!r}"
            )
        mapping[feature] = category
    return mapping


def flag_alerts(
    samples: Sequence[ScoredSample],
    risk_tau: float = DEFAULT_RISK_TAU,
) -> list[str]:
    """Transaction ids scoring at or above the risk threshold, highest first."""
    if not 0.0 <= risk_tau <= 1.0:
        raise ValueError(f"risk_tau {risk_tau} outside [0, 1]")
    flagged = [s for s in samples if s.score >= risk_tau]
    flagged.sort(key=lambda s: (-s.score, s.transaction_id))
    return [s.transaction_id for s in flagged]


def _money(value: Decimal) -> str:
    """$842 for whole amounts, $842.50 otherwise."""
    q = value.quantize(Decimal("0.01"))
    if q == q.to_integral_value():
        return f"${int(q):,}"
    return f"${q:,}"


def _ratio(value: Decimal, baseline: Decimal) -> str:
    """One-decimal multiplier, round half up: (842, 162) -> 5.2."""
    return str((value / baseline).quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))


def _statement(
    category: str,
    feature: str,
    phi: float,
    amount: Decimal | None,
    context: BehaviorContext | None,
) -> str:
    ctx = context or BehaviorContext()
    if category == "amount":
        if amount is not None and ctx.rolling_mean_7d not in (None, Decimal("0")):
            return (
                f"{feature} = {_money(amount)} is {_ratio(amount, ctx.rolling_mean_7d)}× "
                f"the account's 7-day rolling mean of {_money(ctx.rolling_mean_7d)}."
            )
        if amount is not None:
            return f"{feature} = {_money(amount)} (no 7-day baseline available)."
    elif category == "velocity":
        if ctx.count_24h is not None and ctx.count_24h_percentile is not None:
            pct = round(ctx.count_24h_percentile * 100)
            return (
                f"Transaction count in prior 24 hours = {ctx.count_24h}; "
                f"{pct}th percentile for this account type."
            )
    elif category == "device":
        if ctx.device_mismatch:
            return f"Device fingerprint does not match prior transactions ({feature} = 1)."
    elif category == "identity":
        if ctx.identity_mismatch:
            return f"Identity attribute does not match prior activity ({feature} = 1)."
    elif category == "network":
        if ctx.linkage_count is not None:
            return (
                f"Account linked to {ctx.linkage_count} related accounts "
                f"in the transaction network."
            )
    # degraded statement: no behavioural baseline available for this category
    return f"{feature} flagged (attribution {phi:+.2f}); behavioural baseline unavailable."


def generate_reason_codes(
    alert_id: str,
    shap_vector: Mapping[str, float],
    category_map: Mapping[str, str],
    amount: Decimal | None = None,
    context: BehaviorContext | None = None,
    form111_table: Mapping[str, str] = DEFAULT_FORM111_TABLE,
) -> ReasonCodeSet:
    """Up to three reason codes spanning distinct categories.

    Features are ranked by |attribution| (ties by name); a feature whose
    category is already represented is skipped so the narrative spans as many
    Form 111 categories as the attributions support. Zero-attribution
    features never generate codes.
    """
    if not shap_vector:
        raise ValueError(f"alert {alert_id}: empty attribution vector")
    for feature in shap_vector:
        if feature not in category_map:
            raise UnmappedFeature(f"feature {feature!r} has no category assignment")

    ranked = sorted(shap_vector.items(), key=lambda kv: (-abs(kv[1]), kv[0]))
    codes: list[ReasonCode] = []
    used_categories: set[str] = set()
    for feature, phi in ranked:
        if phi == 0.0 or len(codes) == 3:
            break
        category = category_map[feature]
        if category in used_categories:
            continue
        if category not in form111_table:
            raise UnmappedFeature(
                f"category {category!r} missing from the Form 111 mapping table"
            )
        used_categories.add(category)
        codes.append(
            ReasonCode(
                rank=len(codes) + 1,
                shap_value=float(phi),
                feature=feature,
                feature_category=category,
                deviation_statement=_statement(category, feature, float(phi), amount, context),
                form111_category=form111_table[category],
            )
        )
    return ReasonCodeSet(alert_id=alert_id, codes=tuple(codes))


def coverage_stats(
    alert_ids: Sequence[str],
    reason_code_sets: Iterable[ReasonCodeSet],
    certification_records: Iterable[CertificationRecord],
) -> tuple[float, float]:
    """(coverage, cert_rate) for one alert batch.

    Coverage is the fraction of alerts carrying >=3 reason codes; cert_rate
    is the fraction of alerts with any reason codes whose latest
    certification has disposition certified/amended. Both are vacuously 1.0
    when their denominators are empty (no unmet obligation).
    """
    sets_by_alert = {s.alert_id: s for s in reason_code_sets}
    certified: dict[str, bool] = {}
    for record in certification_records:
        certified[record.alert_id] = record.counts_as_certified

    if not alert_ids:
        return 1.0, 1.0
    covered = [a for a in alert_ids if a in sets_by_alert and sets_by_alert[a].covered]
    coverage = len(covered) / len(alert_ids)
    with_codes = [a for a in alert_ids if a in sets_by_alert and sets_by_alert[a].codes]
    if not with_codes:
        return coverage, 1.0
    cert_rate = sum(1 for a in with_codes if certified.get(a, False)) / len(with_codes)
    return coverage, cert_rate
