"""Two-model probability blending and the validation grid search over the
blend weight and operating threshold."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateLabels, LengthMismatch
from .metrics import DEFAULT_TAU_GRID

__all__ = ["DEFAULT_ALPHA_GRID", "BlendConfig", "blend", "alpha_search"]

DEFAULT_ALPHA_GRID: tuple[float, ...] = (0.4, 0.5, 0.6, 0.7, 0.8)


@dataclass(frozen=True)
class BlendConfig:
    """Weight on model A plus the candidate grid used to select it."""

    alpha: float = 0.6
    grid: tuple[float, ...] = DEFAULT_ALPHA_GRID

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha {self.alpha} outside [0, 1]")
        if len(set(self.grid)) != len(self.grid):
            raise ValueError("alpha grid values must be distinct")
        if any(not 0.0 <= a <= 1.0 for a in self.grid):
            raise ValueError("alpha grid values must lie in [0, 1]")


def blend(p_a: Sequence[float], p_b: Sequence[float], alpha: float) -> list[float]:
    """Elementwise alpha * p_a + (1 - alpha) * p_b."""
    if len(p_a) != len(p_b):
        raise LengthMismatch(f"aligned lists required: {len(p_a)} vs {len(p_b)}")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha {alpha} outside [0, 1]")
    for name, values in (("p_a", p_a), ("p_b", p_b)):
        for v in values:
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} contains probability {v} outside [0, 1]")
    return [alpha * a + (1.0 - alpha) * b for a, b in zip(p_a, p_b)]


def alpha_search(
    p_a: Sequence[float],
    p_b: Sequence[float],
    labels: Sequence[int],
    grid: Sequence[float] = DEFAULT_ALPHA_GRID,
    tau_grid: Sequence[float] = DEFAULT_TAU_GRID,
) -> tuple[float, float, float, list[tuple[float, float, float]]]:
    """Joint F1 maximization over (alpha, tau).

    Returns (best_alpha, best_tau, best_f1, table) where table holds one
    (alpha, tau, f1) row per grid pair. Ties break on smaller alpha, then
    smaller tau.
    """
    if not grid or not tau_grid:
        raise ValueError("grids must be non-empty")
    if len(p_a) != len(p_b) or len(p_a) != len(labels):
        raise LengthMismatch("p_a, p_b, labels must align 1:1")
    y = np.asarray(labels)
    n_pos = int((y == 1).sum())
    n_neg = int((y == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise DegenerateLabels("need both classes present")

    a = np.asarray(p_a, dtype=float)
    b = np.asarray(p_b, dtype=float)
    table: list[tuple[float, float, float]] = []
    best: tuple[float, float, float] | None = None
    for alpha in grid:
        blended = alpha * a + (1.0 - alpha) * b
        for tau in tau_grid:
            predicted = blended >= tau
            tp = int((predicted & (y == 1)).sum())
            fp = int((predicted & (y == 0)).sum())
            fn = n_pos - tp
            denom = 2 * tp + fp + fn
            f1 = 0.0 if denom == 0 else 2 * tp / denom
            table.append((alpha, tau, f1))
            if (
                best is None
                or f1 > best[2]
                or (f1 == best[2] and (alpha, tau) < (best[0], best[1]))
            ):
                best = (alpha, tau, f1)
    assert best is not None
    return best[0], best[1], best[2], table
