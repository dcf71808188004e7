"""Cost-benefit model: net savings and benefit-cost ratios from confusion
counts, with exact cent-level decimal arithmetic throughout.

The engine also ships the externally reported IEEE-CIS benchmark comparison
rows. Several of those published dollar and ratio cells do not follow the
stated savings formula from their own printed counts; the report therefore
shows formula-derived values alongside the reported ones and flags the
deviations instead of adjudicating them.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Sequence

from .errors import ZeroPrecision

__all__ = [
    "CostModel",
    "BenefitCostRatio",
    "ReferenceRow",
    "REFERENCE_ROWS",
    "REFERENCE_TOTAL_FRAUD",
    "net_savings",
    "benefit_cost_ratio",
    "derive_counts",
    "comparison_table",
]

_CENT = Decimal("0.01")


@dataclass(frozen=True)
class CostModel:
    """Mean recovered fraud amount and per-false-positive investigation cost."""

    mean_fraud_amount: Decimal = Decimal("151.90")
    investigation_cost: Decimal = Decimal("25.00")

    def __post_init__(self) -> None:
        if self.mean_fraud_amount < 0 or self.investigation_cost < 0:
            raise ValueError("cost model amounts must be non-negative")


def net_savings(tp: int, fp: int, model: CostModel = CostModel()) -> tuple[Decimal, Decimal, Decimal]:
    """(net, benefit, cost): benefit = tp * mean fraud amount, cost = fp * investigation cost."""
    if tp < 0 or fp < 0:
        raise ValueError("counts must be non-negative")
    benefit = (tp * model.mean_fraud_amount).quantize(_CENT)
    cost = (fp * model.investigation_cost).quantize(_CENT)
    return (benefit - cost).quantize(_CENT), benefit, cost


@dataclass(frozen=True)
class BenefitCostRatio:
    """Finite ratio, or an infinite/undefined marker when cost is zero."""

    value: Decimal | None
    marker: str | None = None  # "infinite" | "undefined"

    def __str__(self) -> str:
        if self.marker:
            return self.marker
        assert self.value is not None
        return f"{self.value.quantize(Decimal('0.1'), rounding=ROUND_HALF_UP)}:1"


def benefit_cost_ratio(benefit: Decimal, cost: Decimal) -> BenefitCostRatio:
    if benefit < 0 or cost < 0:
        raise ValueError("benefit and cost must be non-negative")
    if cost == 0:
        if benefit > 0:
            return BenefitCostRatio(value=None, marker="infinite")
        return BenefitCostRatio(value=None, marker="undefined")
    return BenefitCostRatio(value=benefit / cost)


def _round_half_up(value: Decimal) -> int:
    return int(value.quantize(Decimal("1"), rounding=ROUND_HALF_UP))


def derive_counts(recall: float, precision: float, total_fraud: int) -> tuple[int, int]:
    """(tp, fp) from operating recall/precision on a known fraud population.

    tp = round(recall * total_fraud); fp = round(tp * (1 - precision) / precision).
    """
    if not 0.0 < recall <= 1.0 or not 0.0 < precision <= 1.0:
        raise ValueError("recall and precision must lie in (0, 1]")
    if precision == 0.0:
        raise ZeroPrecision("precision of zero leaves fp undefined")
    if total_fraud <= 0:
        raise ValueError("total_fraud must be positive")
    tp = _round_half_up(Decimal(str(recall)) * total_fraud)
    fp = _round_half_up(tp * (1 - Decimal(str(precision))) / Decimal(str(precision)))
    return tp, fp


@dataclass(frozen=True)
class ReferenceRow:
    """One externally reported benchmark row (IEEE-CIS test set)."""

    model: str
    recall: float
    precision: float
    reported_tp: int
    reported_fp: int
    reported_net: Decimal
    reported_ratio: str


#: Published cost-benefit comparison for the IEEE-CIS test set
#: (118,108 transactions; 4,133 fraud cases; mean fraud amount $151.90).
REFERENCE_TOTAL_FRAUD = 4133
REFERENCE_ROWS: tuple[ReferenceRow, ...] = (
    ReferenceRow("Logistic Regression", 0.610, 0.135, 2521, 16096, Decimal("383343"), "0.95:1"),
    ReferenceRow("Random Forest", 0.490, 0.623, 2025, 1226, Decimal("277987"), "3.9:1"),
    ReferenceRow("XGBoost", 0.813, 0.767, 3360, 1021, Decimal("485499"), "5.2:1"),
    ReferenceRow("LSTM", 0.623, 0.496, 2575, 2616, Decimal("326333"), "4.5:1"),
    ReferenceRow("LSTM+XGBoost Ensemble", 0.623, 0.496, 2575, 2483, Decimal("309725"), "6:1"),
)


def comparison_table(
    rows: Sequence[ReferenceRow] = REFERENCE_ROWS,
    total_fraud: int = REFERENCE_TOTAL_FRAUD,
    model: CostModel = CostModel(),
) -> list[dict[str, object]]:
    """Formula-vs-reported comparison, one dict per model row.

    Formula values are computed from the reported counts; derived counts from
    recall/precision are included as a cross-check. Rows whose reported net
    differs from the formula net are flagged, never failed.
    """
    out: list[dict[str, object]] = []
    for row in rows:
        derived_tp, derived_fp = derive_counts(row.recall, row.precision, total_fraud)
        net, benefit, cost = net_savings(row.reported_tp, row.reported_fp, model)
        ratio = benefit_cost_ratio(benefit, cost)
        deviation = (row.reported_net - net).quantize(_CENT)
        deviation_pct = (
            None if net == 0 else float((deviation / abs(net) * 100).quantize(Decimal("0.01")))
        )
        out.append(
            {
                "model": row.model,
                "recall": row.recall,
                "precision": row.precision,
                "reported_tp": row.reported_tp,
                "reported_fp": row.reported_fp,
                "derived_tp": derived_tp,
                "derived_fp": derived_fp,
                "benefit": str(benefit),
                "cost": str(cost),
                "formula_net": str(net),
                "reported_net": str(row.reported_net.quantize(_CENT)),
                "formula_ratio": str(ratio),
                "reported_ratio": row.reported_ratio,
                "net_deviation": str(deviation),
                "net_deviation_pct": deviation_pct,
                "flagged": deviation != 0,
            }
        )
    return out
