"""Run configuration: one declarative JSON document with reference defaults.

Unknown keys are rejected so a typo never silently reverts a threshold to its
default. The effective configuration snapshot is audit-appended by monitoring
commands, letting an examiner reconstruct exactly which thresholds produced
which scores.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from decimal import Decimal, InvalidOperation
from pathlib import Path

from .blend import DEFAULT_ALPHA_GRID
from .drift import DEFAULT_SPLIT_FRACTION, DEFAULT_TEMPORAL_FLOOR
from .economics import CostModel
from .errors import ConfigError
from .metrics import DEFAULT_TAU_GRID
from .sar import DEFAULT_FORM111_TABLE, DEFAULT_RISK_TAU
from .scoring import DEFAULT_BANDS, ScoreBands

__all__ = ["RunConfig", "load_config", "config_snapshot"]


@dataclass(frozen=True)
class RunConfig:
    bands: ScoreBands = field(default=DEFAULT_BANDS)
    split_fraction: float = DEFAULT_SPLIT_FRACTION
    temporal_floor: float = DEFAULT_TEMPORAL_FLOOR
    risk_tau: float = DEFAULT_RISK_TAU
    m_comparisons: int = 30
    fairness_top_k: int = 10
    alpha_grid: tuple[float, ...] = DEFAULT_ALPHA_GRID
    tau_grid: tuple[float, ...] = DEFAULT_TAU_GRID
    cost: CostModel = field(default_factory=CostModel)
    category_overrides: dict[str, str] = field(default_factory=dict)
    form111_table: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_FORM111_TABLE))
    paths: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not 0.0 < self.split_fraction < 1.0:
            raise ConfigError(f"split_fraction {self.split_fraction} outside (0, 1)")
        if not 0.0 <= self.risk_tau <= 1.0:
            raise ConfigError(f"risk_tau {self.risk_tau} outside [0, 1]")
        if self.m_comparisons < 1:
            raise ConfigError("m_comparisons must be a positive integer")
        if self.fairness_top_k < 1:
            raise ConfigError("fairness_top_k must be a positive integer")
        for name in ("temporal_floor",):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} {value} outside [0, 1]")
        for grid_name in ("alpha_grid", "tau_grid"):
            grid = getattr(self, grid_name)
            if not grid:
                raise ConfigError(f"{grid_name} must be non-empty")
            if any(not 0.0 <= g <= 1.0 for g in grid):
                raise ConfigError(f"{grid_name} values must lie in [0, 1]")


_PATH_KEYS = {
    "predictions",
    "shap",
    "baseline_shap",
    "proxies",
    "certs",
    "audit_dir",
    "validation",
    "ablation",
    "codes",
    "context",
}


def _build_bands(raw: dict) -> ScoreBands:
    known = {f.name for f in fields(ScoreBands)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown bands keys: {sorted(unknown)}")
    for key, value in raw.items():
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ConfigError(f"bands.{key} must be a number")
    return replace(DEFAULT_BANDS, **raw)


def _build_cost(raw: dict) -> CostModel:
    unknown = set(raw) - {"mean_fraud_amount", "investigation_cost"}
    if unknown:
        raise ConfigError(f"unknown cost keys: {sorted(unknown)}")
    try:
        kwargs = {k: Decimal(str(v)) for k, v in raw.items()}
        return CostModel(**kwargs)
    except (InvalidOperation, ValueError) as exc:
        raise ConfigError(f"bad cost model: {exc}") from None


def load_config(path: str | Path | None) -> RunConfig:
    """Load the JSON config document; absent path means all defaults."""
    if path is None:
        return RunConfig()
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"config root must be a JSON object, got {type(raw).__name__}")

    known = {
        "bands",
        "split_fraction",
        "temporal_floor",
        "risk_tau",
        "m_comparisons",
        "fairness_top_k",
        "alpha_grid",
        "tau_grid",
        "cost",
        "categories",
        "form111",
        "paths",
    }
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    kwargs: dict = {}
    if "bands" in raw:
        if not isinstance(raw["bands"], dict):
            raise ConfigError("bands must be an object")
        kwargs["bands"] = _build_bands(raw["bands"])
    if "cost" in raw:
        if not isinstance(raw["cost"], dict):
            raise ConfigError("cost must be an object")
        kwargs["cost"] = _build_cost(raw["cost"])
    for scalar in ("split_fraction", "temporal_floor", "risk_tau", "m_comparisons", "fairness_top_k"):
        if scalar in raw:
            kwargs[scalar] = raw[scalar]
    for grid in ("alpha_grid", "tau_grid"):
        if grid in raw:
            if not isinstance(raw[grid], list):
                raise ConfigError(f"{grid} must be a list")
            kwargs[grid] = tuple(raw[grid])
    if "categories" in raw:
        if not isinstance(raw["categories"], dict):
            raise ConfigError("categories must be an object mapping feature -> category")
        kwargs["category_overrides"] = dict(raw["categories"])
    if "form111" in raw:
        if not isinstance(raw["form111"], dict):
            raise ConfigError("form111 must be an object mapping category -> text")
        table = dict(DEFAULT_FORM111_TABLE)
        table.update(raw["form111"])
        kwargs["form111_table"] = table
    if "paths" in raw:
        if not isinstance(raw["paths"], dict):
            raise ConfigError("paths must be an object")
        unknown_paths = set(raw["paths"]) - _PATH_KEYS
        if unknown_paths:
            raise ConfigError(f"unknown paths keys: {sorted(unknown_paths)}")
        kwargs["paths"] = {k: str(v) for k, v in raw["paths"].items()}

    try:
        return RunConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def config_snapshot(config: RunConfig) -> dict:
    """JSON-able effective configuration, including defaults, for audit appends."""
    snapshot = asdict(config)
    snapshot["cost"] = {
        "mean_fraud_amount": str(config.cost.mean_fraud_amount),
        "investigation_cost": str(config.cost.investigation_cost),
    }
    snapshot["alpha_grid"] = list(config.alpha_grid)
    snapshot["tau_grid"] = list(config.tau_grid)
    return snapshot
