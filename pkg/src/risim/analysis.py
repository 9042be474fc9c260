"""SNR sweeps, diversity-order slope fits, and reference decay lines."""

from __future__ import annotations

import datetime
import math
from dataclasses import dataclass, field

import numpy as np

from ._version import __version__
from .channel import SystemConfig
from .montecarlo import (
    DEFAULT_BLOCK_SIZE,
    OutageEstimate,
    ResourceGuardError,
    estimate_outage,
)

__all__ = [
    "AllCensoredError",
    "FitError",
    "SweepPoint",
    "SweepResult",
    "SlopeEstimate",
    "db_to_linear",
    "sweep",
    "fit_diversity",
    "reference_curves",
]


class AllCensoredError(RuntimeError):
    """Every sweep point fell below the expected-failure guard."""


class FitError(RuntimeError):
    """Not enough qualifying points for a slope fit."""


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class SweepPoint:
    """One SNR grid point; censored points keep their sparse raw counts."""

    rho_db: float
    estimate: OutageEstimate
    censored: bool


@dataclass(frozen=True)
class SweepResult:
    config: SystemConfig
    points: list[SweepPoint]
    seed: int
    created_at: str = field(compare=False)
    version: str = field(default=__version__, compare=False)

    def uncensored(self) -> list[SweepPoint]:
        return [p for p in self.points if not p.censored]


@dataclass(frozen=True)
class SlopeEstimate:
    """Fitted diversity order from a log-log outage sweep."""

    d_hat: float
    fit_lo_db: float
    fit_hi_db: float
    r_squared: float
    points_used: int


def sweep(
    cfg: SystemConfig,
    rho_db_grid: list[float],
    trials_per_point: int,
    seed: int,
    *,
    block_size: int = DEFAULT_BLOCK_SIZE,
    workers: int = 1,
    min_failures: int = 10,
    path: str = "shortcut",
) -> SweepResult:
    """One outage estimate per grid point, each on its own substream family.

    Point ``k`` runs with seed ``seed + k``, so the grid can be evaluated
    in any order (or in parallel) without changing the numbers.  Points
    with fewer than ``min_failures`` outages are marked censored.
    """
    if len(rho_db_grid) == 0:
        raise ValueError("rho grid must be nonempty")
    if any(b <= a for a, b in zip(rho_db_grid, rho_db_grid[1:])):
        raise ValueError("rho grid must be strictly increasing")
    points: list[SweepPoint] = []
    for k, rho_db in enumerate(rho_db_grid):
        rho = db_to_linear(rho_db)
        try:
            estimate = estimate_outage(
                cfg,
                rho,
                trials_per_point,
                seed + k,
                block_size=block_size,
                workers=workers,
                min_failures=min_failures,
                path=path,
            )
            censored = False
        except ResourceGuardError as guard:
            estimate = guard.estimate
            censored = True
        points.append(SweepPoint(float(rho_db), estimate, censored))
    if all(p.censored for p in points):
        raise AllCensoredError(
            "every grid point fell below the expected-failure guard; "
            "increase trials or lower the SNR range"
        )
    created = datetime.datetime.now(datetime.timezone.utc).isoformat()
    return SweepResult(config=cfg, points=points, seed=seed, created_at=created)


def fit_diversity(
    result: SweepResult,
    p_window: tuple[float, float] = (1e-6, 1e-2),
) -> SlopeEstimate:
    """Least-squares diversity order over points whose p_hat is in the window."""
    lo, hi = p_window
    usable = [
        p for p in result.uncensored() if lo <= p.estimate.p_hat <= hi
    ]
    if len(usable) < 3:
        raise FitError(
            f"need >= 3 uncensored points with p_hat in [{lo:g}, {hi:g}], "
            f"have {len(usable)}"
        )
    x = np.array([p.rho_db / 10.0 for p in usable])  # log10(rho)
    y = np.array([math.log10(p.estimate.p_hat) for p in usable])
    slope, intercept = np.polyfit(x, y, 1)
    fitted = slope * x + intercept
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return SlopeEstimate(
        d_hat=float(-slope),
        fit_lo_db=float(min(p.rho_db for p in usable)),
        fit_hi_db=float(max(p.rho_db for p in usable)),
        r_squared=r2,
        points_used=len(usable),
    )


def reference_curves(
    n_elements: int,
    kind: str,
    rho_db_grid: list[float],
    anchor_db: float,
    anchor_value: float,
) -> list[tuple[float, float]]:
    """Anchored power-law overlay lines.

    ``full`` decays like rho^-N (the error-free diversity order), while
    ``l2-bound`` decays like rho^-(N+1)/2 (the 2-level ceiling).  The curve
    passes exactly through (anchor_db, anchor_value).
    """
    if kind == "full":
        order = float(n_elements)
    elif kind == "l2-bound":
        order = (n_elements + 1) / 2.0
    else:
        raise ValueError("kind must be 'full' or 'l2-bound'")
    if anchor_value <= 0.0:
        raise ValueError("anchor_value must be positive")
    out = []
    for rho_db in rho_db_grid:
        value = anchor_value * 10.0 ** (-order * (rho_db - anchor_db) / 10.0)
        out.append((float(rho_db), value))
    return out
