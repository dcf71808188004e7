"""Regulator health scores, the composite fitness index, and the monthly
monitoring state machine.

Each dimension scores Green/Amber/Red (1.0/0.5/0.0) from its band rules, with
Red evaluated before Amber before Green so overlapping clauses fail closed.
The composite index is the minimum of the four numeric scores: one failing
dimension drives the whole record. Everything is a pure function of its
inputs; monitoring state lives in the caller's audit store.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .errors import DuplicateDimension, NonMonotoneMonths
from .fairness import (
    VERDICT_VIOLATION,
    VERDICT_WATCH,
    FairnessFinding,
)

__all__ = [
    "GREEN",
    "AMBER",
    "RED",
    "DIMENSIONS",
    "ScoreBands",
    "DEFAULT_BANDS",
    "HealthScore",
    "RemediationTrigger",
    "RfiRecord",
    "MonthlyInputs",
    "occ_score",
    "drift_score",
    "fairness_score",
    "sar_score",
    "compose_rfi",
    "monitoring_step",
    "next_month",
]

GREEN = "Green"
AMBER = "Amber"
RED = "Red"

_NUMERIC = {GREEN: 1.0, AMBER: 0.5, RED: 0.0}
_STATUS = {1.0: "exam_ready", 0.5: "watch", 0.0: "remediation_required"}

DIM_OCC = "occ_performance"
DIM_DRIFT = "drift_monitoring"
DIM_FAIRNESS = "cfpb_fairness"
DIM_SAR = "fincen_sar"
DIMENSIONS: tuple[str, ...] = (DIM_OCC, DIM_DRIFT, DIM_FAIRNESS, DIM_SAR)

# Remediation actions per (dimension, severity). Amber reviews run on a
# 30-day clock; a Red drift score mandates retraining within 14 days; other
# Red dimensions demand immediate action (deadline 0).
_AMBER_ACTIONS = {
    DIM_OCC: "30-day model validation review",
    DIM_DRIFT: "30-day drift investigation",
    DIM_FAIRNESS: "SHAP feature review for proxy variables",
    DIM_SAR: "SAR workflow audit",
}
_RED_ACTIONS = {
    DIM_OCC: "Immediate model revalidation and supervisory notification",
    DIM_DRIFT: "Mandatory LSTM retraining within 14 days",
    DIM_FAIRNESS: "Deployment suspension pending fair-lending counsel review",
    DIM_SAR: "Immediate SAR process remediation and BSA counsel notification",
}
_RED_DEADLINES = {DIM_OCC: 0, DIM_DRIFT: 14, DIM_FAIRNESS: 0, DIM_SAR: 0}


@dataclass(frozen=True)
class ScoreBands:
    """Configurable band thresholds; defaults are the reference calibration."""

    occ_auc_green: float = 0.90
    occ_auc_red: float = 0.87
    occ_z_green: float = 17.0
    occ_z_red: float = 10.0
    occ_p_max: float = 0.001
    drift_auc_green: float = 0.85
    drift_auc_red: float = 0.82
    drift_rho_green: float = 0.80
    drift_rho_red: float = 0.75
    sar_coverage_green: float = 0.95
    sar_coverage_red: float = 0.85


DEFAULT_BANDS = ScoreBands()


@dataclass(frozen=True)
class HealthScore:
    """One regulator dimension's Green/Amber/Red verdict with its inputs."""

    dimension: str
    color: str
    inputs_digest: Mapping[str, object]

    @property
    def numeric(self) -> float:
        return _NUMERIC[self.color]


@dataclass(frozen=True)
class RemediationTrigger:
    dimension: str
    severity: str  # amber_review | red_escalation
    action: str
    deadline_days: int
    raised_on: str  # ISO date


@dataclass(frozen=True)
class RfiRecord:
    """One month's four scores, composite index, status, and triggers."""

    month: str  # YYYY-MM
    scores: tuple[HealthScore, ...]
    rfi: float
    status: str
    triggers: tuple[RemediationTrigger, ...]

    def score_for(self, dimension: str) -> HealthScore:
        for score in self.scores:
            if score.dimension == dimension:
                return score
        raise KeyError(dimension)


def occ_score(
    auc: float,
    min_delong_z: float,
    worst_delong_p: float,
    ablation_documented: bool,
    bands: ScoreBands = DEFAULT_BANDS,
) -> HealthScore:
    """Performance/conceptual-soundness score.

    Red when AUC < 0.87, any comparison p > 0.001, or z < 10; Green needs
    AUC >= 0.90, z >= 17, p <= 0.001, and a documented ablation ledger.
    """
    digest = {
        "auc": auc,
        "min_delong_z": min_delong_z,
        "worst_delong_p": worst_delong_p,
        "ablation_documented": ablation_documented,
    }
    if auc < bands.occ_auc_red or worst_delong_p > bands.occ_p_max or min_delong_z < bands.occ_z_red:
        color = RED
    elif (
        auc >= bands.occ_auc_green
        and min_delong_z >= bands.occ_z_green
        and worst_delong_p <= bands.occ_p_max
        and ablation_documented
    ):
        color = GREEN
    else:
        color = AMBER
    return HealthScore(DIM_OCC, color, digest)


def drift_score(
    temporal_auc: float,
    rho: float,
    bands: ScoreBands = DEFAULT_BANDS,
) -> HealthScore:
    """Temporal-stability score from out-of-time AUC and attribution-rank rho."""
    digest = {"temporal_auc": temporal_auc, "shap_rho": rho}
    if temporal_auc < bands.drift_auc_red or rho < bands.drift_rho_red:
        color = RED
    elif temporal_auc >= bands.drift_auc_green and rho >= bands.drift_rho_green:
        color = GREEN
    else:
        color = AMBER
    return HealthScore(DIM_DRIFT, color, digest)


def fairness_score(findings: Sequence[FairnessFinding]) -> HealthScore:
    """Disparate-impact score: worst finding wins; no findings fails closed.

    An empty findings list means screening was not run, which is scored Red
    with a screening-absent annotation rather than treated as clean.
    """
    if not findings:
        return HealthScore(
            DIM_FAIRNESS,
            RED,
            {"finding_count": 0, "screening_absent": True},
        )
    min_p = min(f.kw.p_adjusted for f in findings)
    digest = {
        "finding_count": len(findings),
        "min_p_adjusted": min_p,
        "screening_absent": False,
    }
    verdicts = {f.verdict for f in findings}
    if VERDICT_VIOLATION in verdicts:
        color = RED
    elif VERDICT_WATCH in verdicts:
        color = AMBER
    else:
        color = GREEN
    return HealthScore(DIM_FAIRNESS, color, digest)


def sar_score(
    coverage: float,
    cert_rate: float,
    bands: ScoreBands = DEFAULT_BANDS,
) -> HealthScore:
    """SAR documentation score from reason-code coverage and certification rate.

    Any uncertified covered alert is Red regardless of coverage; Green demands
    coverage >= 0.95 with full certification; the remaining band is Amber.
    """
    digest = {"coverage": coverage, "cert_rate": cert_rate}
    if coverage < bands.sar_coverage_red or cert_rate < 1.0:
        color = RED
    elif coverage >= bands.sar_coverage_green:
        color = GREEN
    else:
        color = AMBER
    return HealthScore(DIM_SAR, color, digest)


def compose_rfi(
    month: str,
    scores: Sequence[HealthScore],
    as_of: str,
) -> RfiRecord:
    """Compose the fitness index: min of the four scores, plus triggers.

    Every Amber dimension raises a 30-day review; every Red dimension raises
    an escalation with its mandated deadline.
    """
    seen: dict[str, HealthScore] = {}
    for score in scores:
        if score.dimension in seen:
            raise DuplicateDimension(f"dimension {score.dimension} scored twice")
        seen[score.dimension] = score
    missing = [d for d in DIMENSIONS if d not in seen]
    if missing:
        raise DuplicateDimension(f"missing dimensions: {missing}")

    ordered = tuple(seen[d] for d in DIMENSIONS)
    rfi = min(s.numeric for s in ordered)
    triggers: list[RemediationTrigger] = []
    for score in ordered:
        if score.color == AMBER:
            triggers.append(
                RemediationTrigger(
                    dimension=score.dimension,
                    severity="amber_review",
                    action=_AMBER_ACTIONS[score.dimension],
                    deadline_days=30,
                    raised_on=as_of,
                )
            )
        elif score.color == RED:
            triggers.append(
                RemediationTrigger(
                    dimension=score.dimension,
                    severity="red_escalation",
                    action=_RED_ACTIONS[score.dimension],
                    deadline_days=_RED_DEADLINES[score.dimension],
                    raised_on=as_of,
                )
            )
    return RfiRecord(
        month=month,
        scores=ordered,
        rfi=rfi,
        status=_STATUS[rfi],
        triggers=tuple(triggers),
    )


@dataclass(frozen=True)
class MonthlyInputs:
    """Everything one monitoring month needs, gathered by the pipeline."""

    month: str
    validation_auc: float
    min_delong_z: float
    worst_delong_p: float
    ablation_documented: bool
    production_auc: float
    shap_rho: float
    fairness_findings: tuple[FairnessFinding, ...]
    sar_coverage: float
    sar_cert_rate: float
    as_of: str
    bands: ScoreBands = field(default=DEFAULT_BANDS)


def next_month(month: str) -> str:
    year, mm = month.split("-")
    y, m = int(year), int(mm)
    m += 1
    if m > 12:
        y, m = y + 1, 1
    return f"{y:04d}-{m:02d}"


def _validate_month(month: str) -> None:
    parts = month.split("-")
    if len(parts) != 2 or len(parts[0]) != 4 or len(parts[1]) != 2:
        raise NonMonotoneMonths(f"month {month!r} is not YYYY-MM")
    year, mm = parts
    if not (year.isdigit() and mm.isdigit() and 1 <= int(mm) <= 12):
        raise NonMonotoneMonths(f"month {month!r} is not a valid YYYY-MM")


def monitoring_step(
    history: Sequence[RfiRecord],
    inputs: MonthlyInputs,
) -> tuple[RfiRecord, bool]:
    """Score one monitoring month and evaluate the retraining rule.

    Retraining is flagged when the production AUC has sat below the temporal
    floor for two consecutive months, or when this month's drift score is Red.
    History must be a gap-free ascending month sequence ending just before
    ``inputs.month``.
    """
    _validate_month(inputs.month)
    for record in history:
        _validate_month(record.month)
    for prev, curr in zip(history, history[1:]):
        if next_month(prev.month) != curr.month:
            raise NonMonotoneMonths(
                f"history jumps from {prev.month} to {curr.month}"
            )
    if history and next_month(history[-1].month) != inputs.month:
        raise NonMonotoneMonths(
            f"expected month {next_month(history[-1].month)} after "
            f"{history[-1].month}, got {inputs.month}"
        )

    bands = inputs.bands
    scores = (
        occ_score(
            inputs.validation_auc,
            inputs.min_delong_z,
            inputs.worst_delong_p,
            inputs.ablation_documented,
            bands,
        ),
        drift_score(inputs.production_auc, inputs.shap_rho, bands),
        fairness_score(inputs.fairness_findings),
        sar_score(inputs.sar_coverage, inputs.sar_cert_rate, bands),
    )
    record = compose_rfi(inputs.month, scores, inputs.as_of)

    floor = bands.drift_auc_green
    consecutive_low = False
    if history:
        prev_auc = history[-1].score_for(DIM_DRIFT).inputs_digest.get("temporal_auc")
        if (
            isinstance(prev_auc, (int, float))
            and prev_auc < floor
            and inputs.production_auc < floor
        ):
            consecutive_low = True
    drift_red = record.score_for(DIM_DRIFT).color == RED
    return record, consecutive_low or drift_red
