"""Uniform phase codebooks, nearest-point quantization, and phase errors.

Quantizing an optimal phase that is uniform on the circle leaves a residual
error that is uniform on [-pi/L, pi/L]; sampling that error directly (the
shortcut used by the rare-event estimators) and quantizing explicit channel
phases are statistically interchangeable, which the test suite checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import RngStream, as_generator, wrap_pi

__all__ = [
    "PhaseCodebook",
    "quantize",
    "quantize_phases",
    "sample_phase_error",
    "conditional_phase_error",
    "LOW",
    "HIGH",
]

TAU = 2.0 * math.pi

# boundary-strip sides for the conditional sampler
LOW = "low"
HIGH = "high"


@dataclass(frozen=True)
class PhaseCodebook:
    """The L-point uniform codebook {2*pi*l/L : l = 0..L-1}."""

    levels: int

    def __post_init__(self) -> None:
        if not isinstance(self.levels, (int, np.integer)) or self.levels < 2:
            raise ValueError("levels must be an integer >= 2")

    @property
    def points(self) -> np.ndarray:
        return TAU * np.arange(self.levels) / self.levels

    @property
    def max_error(self) -> float:
        return math.pi / self.levels


def quantize_phases(
    levels: int, phi_star: np.ndarray | float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized nearest-point quantization.

    Returns (index, quantized_phase, theta) with theta = quantized - optimal
    wrapped to (-pi, pi]; exact midpoints resolve to the lower index.
    """
    phi = np.asarray(phi_star, dtype=float)
    if not np.all(np.isfinite(phi)):
        raise ValueError("phases must be finite")
    if levels < 2:
        raise ValueError("levels must be >= 2")
    t = np.mod(phi, TAU) * levels / TAU
    base = np.floor(t)
    index = (np.where(t - base > 0.5, base + 1.0, base) % levels).astype(np.int64)
    quantized = TAU * index / levels
    theta = wrap_pi(quantized - phi)
    return index, quantized, theta


def quantize(
    codebook: PhaseCodebook, phi_star: float
) -> tuple[int, float, float]:
    """Quantize one optimal phase against a codebook."""
    index, quantized, theta = quantize_phases(codebook.levels, float(phi_star))
    return int(index), float(quantized), float(theta)


def sample_phase_error(
    levels: int,
    rng: RngStream | np.random.Generator,
    size: int | tuple[int, ...] | None = None,
) -> np.ndarray | float:
    """Draw residual phase errors uniform on [-pi/L, pi/L]."""
    if levels < 2:
        raise ValueError("levels must be >= 2")
    gen = as_generator(rng)
    bound = math.pi / levels
    return gen.uniform(-bound, bound, size)


def conditional_phase_error(
    levels: int,
    side: str,
    theta_width: float,
    rng: RngStream | np.random.Generator,
    size: int | tuple[int, ...] | None = None,
) -> np.ndarray | float:
    """Phase errors restricted to one boundary strip of the 2-level codebook.

    LOW draws uniform on [-pi/2, -pi/2 + theta_width], HIGH uniform on
    [pi/2 - theta_width, pi/2]; these strips drive the near-cancellation
    events behind the 2-level diversity ceiling.
    """
    if levels != 2:
        raise ValueError("boundary-strip sampling is defined for levels == 2")
    if not (0.0 < theta_width <= math.pi / 2.0):
        raise ValueError("theta_width must lie in (0, pi/2]")
    gen = as_generator(rng)
    half = math.pi / 2.0
    u = gen.uniform(0.0, theta_width, size)
    if side == LOW:
        return -half + u
    if side == HIGH:
        return half - u
    raise ValueError(f"side must be {LOW!r} or {HIGH!r}, got {side!r}")
