"""Seedable channel generation and cascaded-coefficient extraction.

Channels are i.i.d. circularly-symmetric complex Gaussians; each surface
element contributes the product of its two hop coefficients, which after
normalization has the product-Rayleigh magnitude law of ``specfun.cdf_gsq``.
Randomness flows through counter-based Philox streams so that results are
reproducible no matter how trials are partitioned across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "PERFECT",
    "SystemConfig",
    "RngStream",
    "ChannelRealization",
    "draw_realization",
    "cascade",
    "wrap_pi",
    "as_generator",
]

# sentinel for continuous (error-free) phase shifts
PERFECT = "perfect"

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SystemConfig:
    """Scenario parameters for one simulated link."""

    n_elements: int
    levels: int | str = PERFECT
    eta: float = 1.0
    omega_s: float = 1.0
    omega_i: float = 1.0
    rate_bpcu: float = 1.0
    direct_link: bool = False
    omega_d: float | None = None

    def __post_init__(self) -> None:
        if self.n_elements < 1:
            raise ValueError("n_elements must be >= 1")
        if self.levels != PERFECT:
            if not isinstance(self.levels, (int, np.integer)) or self.levels < 2:
                raise ValueError(f"levels must be an integer >= 2 or {PERFECT!r}")
        if not (0.0 < self.eta <= 1.0):
            raise ValueError("eta must lie in (0, 1]")
        if self.omega_s <= 0.0 or self.omega_i <= 0.0:
            raise ValueError("omega_s and omega_i must be positive")
        if self.rate_bpcu <= 0.0:
            raise ValueError("rate_bpcu must be positive")
        if self.direct_link:
            if self.omega_d is None or self.omega_d <= 0.0:
                raise ValueError("direct_link requires a positive omega_d")
        elif self.omega_d is not None:
            raise ValueError("omega_d is only meaningful with direct_link")

    @property
    def perfect_phases(self) -> bool:
        return self.levels == PERFECT

    @property
    def epsilon0(self) -> float:
        """Outage threshold scale (2^rate - 1) / (eta^2 * omega_s * omega_i)."""
        return (2.0 ** self.rate_bpcu - 1.0) / (
            self.eta**2 * self.omega_s * self.omega_i
        )


@dataclass(frozen=True)
class RngStream:
    """Counter-based substream key: (seed, stream_id) fixes all draws."""

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        key = [self.seed & _MASK64, self.stream_id & _MASK64]
        return np.random.Generator(np.random.Philox(key=key))

    def substream(self, offset: int) -> "RngStream":
        return RngStream(self.seed, (self.stream_id + offset) & _MASK64)


def as_generator(rng: RngStream | np.random.Generator) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    return rng


@dataclass
class ChannelRealization:
    """One draw (or a batch) of all channel coefficients.

    Arrays have shape (n_elements,) for a single draw or (size, n_elements)
    for a batch; ``h_sd`` matches with the element axis dropped.
    """

    h_si: np.ndarray
    h_id: np.ndarray
    h_sd: np.ndarray | complex | None = None
    n_elements: int = field(default=0)

    def __post_init__(self) -> None:
        if self.h_si.shape != self.h_id.shape:
            raise ValueError("h_si and h_id must have identical shapes")
        if not self.n_elements:
            self.n_elements = self.h_si.shape[-1]


def _complex_gaussian(
    gen: np.random.Generator, shape: tuple[int, ...], variance: float
) -> np.ndarray:
    scale = math.sqrt(variance / 2.0)
    return scale * (gen.standard_normal(shape) + 1j * gen.standard_normal(shape))


def draw_realization(
    cfg: SystemConfig,
    rng: RngStream | np.random.Generator,
    size: int | None = None,
) -> ChannelRealization:
    """Draw i.i.d. complex-Gaussian channels for every element (and hop)."""
    gen = as_generator(rng)
    shape = (cfg.n_elements,) if size is None else (size, cfg.n_elements)
    h_si = _complex_gaussian(gen, shape, cfg.omega_s)
    h_id = _complex_gaussian(gen, shape, cfg.omega_i)
    h_sd = None
    if cfg.direct_link:
        sd_shape = () if size is None else (size,)
        h_sd = _complex_gaussian(gen, sd_shape, float(cfg.omega_d))
        if size is None:
            h_sd = complex(h_sd)
    return ChannelRealization(h_si=h_si, h_id=h_id, h_sd=h_sd)


def wrap_pi(x: np.ndarray | float) -> np.ndarray | float:
    """Wrap angles to (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(x), 2.0 * np.pi)


def cascade(
    cfg: SystemConfig, realization: ChannelRealization
) -> tuple[np.ndarray, np.ndarray]:
    """Normalized cascaded magnitudes and optimal phase shifts per element.

    magnitude_n = |h_si_n * h_id_n| / sqrt(omega_s * omega_i); the optimal
    phase co-phases the element against the direct path (or against zero
    when there is none).  Phases are reported in (-pi, pi]; the argument of
    an exactly-zero product is defined as 0.
    """
    product = realization.h_si * realization.h_id
    magnitude = np.abs(product) / math.sqrt(cfg.omega_s * cfg.omega_i)
    phase = np.where(product == 0, 0.0, np.angle(product))
    if cfg.direct_link:
        if realization.h_sd is None:
            raise ValueError("configuration has a direct link but realization does not")
        h_sd = np.asarray(realization.h_sd)
        sd_phase = np.where(h_sd == 0, 0.0, np.angle(h_sd))
        optimal = wrap_pi(sd_phase[..., np.newaxis] - phase)
    else:
        optimal = wrap_pi(-phase)
    return magnitude, np.asarray(optimal)
