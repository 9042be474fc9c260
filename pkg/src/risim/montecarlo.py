"""Rare-event outage estimation with reproducible parallel streams.

Trials are partitioned into fixed-size blocks; block ``b`` of a run seeded
with ``s`` draws from the Philox stream keyed ``(s, b)`` and failure counts
are accumulated as integers, so an estimate depends only on
``(seed, trials, block_size)`` and never on the worker count.

Two sampling paths exist: the shortcut draws cascaded magnitudes from the
product-Rayleigh law and residual phases uniformly (cheap, used for deep
sweeps), while the full path draws explicit complex channels and runs them
through the quantizer.  Both target the same outage probability.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import RngStream, SystemConfig, cascade, draw_realization
from .quantizer import quantize_phases

__all__ = [
    "DEFAULT_BLOCK_SIZE",
    "OutageEstimate",
    "EventSpec",
    "ResourceGuardError",
    "wilson_interval",
    "estimate_outage",
    "estimate_conditional_outage",
    "event_probability",
    "measure_event_frequency",
    "lower_bound_outage",
]

DEFAULT_BLOCK_SIZE = 1_000_000

# 97.5th percentile of the standard normal: 95% two-sided coverage
_Z95 = 1.959963984540054

EPS1 = "eps1"
EPS2 = "eps2"


class ResourceGuardError(RuntimeError):
    """Too few failures for a meaningful rare-event estimate.

    Carries the raw (sparse) estimate so sweep drivers can record the
    point as censored instead of discarding the work.
    """

    def __init__(self, message: str, estimate: "OutageEstimate"):
        super().__init__(message)
        self.estimate = estimate


def wilson_interval(
    failures: int, trials: int, z: float = _Z95
) -> tuple[float, float]:
    """Wilson score interval; keeps sane coverage at rare-event counts."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not (0 <= failures <= trials):
        raise ValueError("failures must lie in [0, trials]")
    p = failures / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2.0 * trials)) / denom
    half = z * math.sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials * trials)) / denom
    lo = 0.0 if failures == 0 else max(0.0, center - half)
    hi = 1.0 if failures == trials else min(1.0, center + half)
    return lo, hi


@dataclass(frozen=True)
class OutageEstimate:
    """A frequency estimate with its 95% Wilson interval and provenance."""

    trials: int
    failures: int
    p_hat: float
    ci_low: float
    ci_high: float
    seed: int
    rho: float

    def __post_init__(self) -> None:
        if not (0 <= self.failures <= self.trials):
            raise ValueError("failures must lie in [0, trials]")
        if not (self.ci_low <= self.p_hat <= self.ci_high):
            raise ValueError("confidence interval must bracket the estimate")

    @classmethod
    def from_counts(
        cls, failures: int, trials: int, seed: int, rho: float
    ) -> "OutageEstimate":
        lo, hi = wilson_interval(failures, trials)
        return cls(trials, failures, failures / trials, lo, hi, seed, rho)


@dataclass(frozen=True)
class EventSpec:
    """Boundary-strip phase layout: one error low, the other N-1 high.

    ``theta`` is the strip width; ``None`` defers to the canonical
    high-SNR choice rho^(-1/2) at evaluation time.
    """

    kind: str
    n_elements: int
    theta: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in (EPS1, EPS2):
            raise ValueError(f"kind must be {EPS1!r} or {EPS2!r}")
        if self.n_elements < 2:
            raise ValueError("events need at least two elements")
        if self.kind == EPS1 and self.n_elements != 2:
            raise ValueError("the two-element event requires n_elements == 2")
        if self.theta is not None and not (0.0 < self.theta <= math.pi / 2.0):
            raise ValueError("theta must lie in (0, pi/2]")

    def resolved_theta(self, rho: float | None = None) -> float:
        if self.theta is not None:
            return self.theta
        if rho is None or rho <= 0.0:
            raise ValueError("theta unset; a positive rho is required to default it")
        theta = rho**-0.5
        if theta > math.pi / 2.0:
            raise ValueError(f"default strip width rho^-1/2 = {theta:.4g} exceeds pi/2")
        return theta


def event_probability(event: EventSpec, rho: float | None = None) -> float:
    """Closed-form probability of the boundary-strip event."""
    theta = event.resolved_theta(rho)
    ratio = theta / math.pi
    if event.kind == EPS1:
        return 2.0 * ratio**2
    return event.n_elements * ratio**event.n_elements


def _blocks(trials: int, block_size: int) -> list[tuple[int, int]]:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if block_size < 1:
        raise ValueError("block_size must be >= 1")
    out = []
    start = 0
    index = 0
    while start < trials:
        out.append((index, min(block_size, trials - start)))
        start += block_size
        index += 1
    return out


def _run_blocks(counter, trials: int, block_size: int, workers: int) -> int:
    plan = _blocks(trials, block_size)
    if workers <= 1:
        return sum(counter(idx, cnt) for idx, cnt in plan)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return sum(pool.map(lambda pair: counter(*pair), plan))


def _shortcut_failures(
    cfg: SystemConfig, rho: float, gen: np.random.Generator, count: int
) -> int:
    n = cfg.n_elements
    mags = np.sqrt(
        gen.standard_exponential((n, count)) * gen.standard_exponential((n, count))
    )
    if cfg.perfect_phases:
        re = mags.sum(axis=0)
        gsq = re * re
    else:
        bound = math.pi / cfg.levels
        theta = gen.uniform(-bound, bound, (n, count))
        re = (mags * np.cos(theta)).sum(axis=0)
        im = (mags * np.sin(theta)).sum(axis=0)
        gsq = re * re + im * im
    if not cfg.direct_link:
        return int(np.count_nonzero(gsq < cfg.epsilon0 / rho))
    a = np.sqrt(cfg.omega_d * gen.standard_exponential(count))
    gain = cfg.eta * math.sqrt(cfg.omega_s * cfg.omega_i)
    if cfg.perfect_phases:
        x = a + gain * re
        total = x * x
    else:
        x = a + gain * re
        y = gain * im
        total = x * x + y * y
    return int(np.count_nonzero(total < (2.0**cfg.rate_bpcu - 1.0) / rho))


def _full_failures(
    cfg: SystemConfig, rho: float, gen: np.random.Generator, count: int
) -> int:
    realization = draw_realization(cfg, gen, size=count)
    mags, optimal = cascade(cfg, realization)
    if cfg.perfect_phases:
        re = mags.sum(axis=1)
        im = np.zeros_like(re)
    else:
        _, _, theta = quantize_phases(int(cfg.levels), optimal)
        re = (mags * np.cos(theta)).sum(axis=1)
        im = (mags * np.sin(theta)).sum(axis=1)
    if not cfg.direct_link:
        return int(np.count_nonzero(re * re + im * im < cfg.epsilon0 / rho))
    a = np.abs(np.asarray(realization.h_sd))
    gain = cfg.eta * math.sqrt(cfg.omega_s * cfg.omega_i)
    x = a + gain * re
    y = gain * im
    return int(np.count_nonzero(x * x + y * y < (2.0**cfg.rate_bpcu - 1.0) / rho))


def estimate_outage(
    cfg: SystemConfig,
    rho: float,
    trials: int,
    seed: int,
    *,
    block_size: int = DEFAULT_BLOCK_SIZE,
    workers: int = 1,
    min_failures: int = 10,
    allow_sparse: bool = False,
    path: str = "shortcut",
) -> OutageEstimate:
    """Frequency estimate of the outage probability at transmit SNR ``rho``.

    Raises ResourceGuardError when fewer than ``min_failures`` outages were
    observed (the point is too deep for the budget) unless ``allow_sparse``.
    """
    if rho <= 0.0:
        raise ValueError("rho must be positive")
    if path == "shortcut":
        kernel = _shortcut_failures
    elif path == "full":
        kernel = _full_failures
    else:
        raise ValueError("path must be 'shortcut' or 'full'")

    def counter(index: int, count: int) -> int:
        gen = RngStream(seed, index).generator()
        return kernel(cfg, rho, gen, count)

    failures = _run_blocks(counter, trials, block_size, workers)
    estimate = OutageEstimate.from_counts(failures, trials, seed, rho)
    if failures < min_failures and not allow_sparse:
        raise ResourceGuardError(
            f"only {failures} failures in {trials} trials at rho={rho:.6g}; "
            f"the point is below the meaningful-resolution guard "
            f"({min_failures} failures)",
            estimate,
        )
    return estimate


def estimate_conditional_outage(
    cfg: SystemConfig,
    event: EventSpec,
    rho: float,
    trials: int,
    seed: int,
    *,
    block_size: int = DEFAULT_BLOCK_SIZE,
    workers: int = 1,
    min_failures: int = 10,
    allow_sparse: bool = False,
) -> OutageEstimate:
    """Outage estimate conditioned on the boundary-strip phase layout.

    Phases are sampled inside the strips by construction (one element in
    the low strip, the rest in the high strip, low element uniform over
    the symmetric choices); magnitudes stay unconditional.
    """
    if cfg.levels != 2:
        raise ValueError("boundary-strip events are defined for the 2-level codebook")
    if cfg.direct_link:
        raise ValueError("conditional estimation does not support a direct link")
    if event.n_elements != cfg.n_elements:
        raise ValueError("event and configuration disagree on n_elements")
    if rho <= 0.0:
        raise ValueError("rho must be positive")
    theta_w = event.resolved_theta(rho)
    n = cfg.n_elements
    threshold = cfg.epsilon0 / rho
    half = math.pi / 2.0

    def counter(index: int, count: int) -> int:
        gen = RngStream(seed, index).generator()
        mags = np.sqrt(
            gen.standard_exponential((n, count)) * gen.standard_exponential((n, count))
        )
        offsets = gen.uniform(0.0, theta_w, (n, count))
        low = gen.integers(0, n, count)
        theta = half - offsets
        cols = np.arange(count)
        theta[low, cols] = -half + offsets[low, cols]
        re = (mags * np.cos(theta)).sum(axis=0)
        im = (mags * np.sin(theta)).sum(axis=0)
        return int(np.count_nonzero(re * re + im * im < threshold))

    failures = _run_blocks(counter, trials, block_size, workers)
    estimate = OutageEstimate.from_counts(failures, trials, seed, rho)
    if failures < min_failures and not allow_sparse:
        raise ResourceGuardError(
            f"only {failures} conditional failures in {trials} trials at "
            f"rho={rho:.6g}",
            estimate,
        )
    return estimate


def measure_event_frequency(
    event: EventSpec,
    trials: int,
    seed: int,
    rho: float | None = None,
    *,
    block_size: int = DEFAULT_BLOCK_SIZE,
    workers: int = 1,
) -> OutageEstimate:
    """Unconditional Monte-Carlo frequency of the boundary-strip event.

    Cross-checks the closed form of ``event_probability``; the returned
    ``rho`` field carries 0 when theta was given explicitly.
    """
    theta_w = event.resolved_theta(rho)
    n = event.n_elements
    half = math.pi / 2.0

    def counter(index: int, count: int) -> int:
        gen = RngStream(seed, index).generator()
        theta = gen.uniform(-half, half, (n, count))
        low = theta <= -half + theta_w
        high = theta >= half - theta_w
        hits = (low.sum(axis=0) == 1) & (high.sum(axis=0) == n - 1)
        return int(np.count_nonzero(hits))

    hits = _run_blocks(counter, trials, block_size, workers)
    return OutageEstimate.from_counts(hits, trials, seed, rho if rho else 0.0)


def lower_bound_outage(
    cfg: SystemConfig,
    rho: float,
    trials: int,
    seed: int,
    *,
    theta: float | None = None,
    block_size: int = DEFAULT_BLOCK_SIZE,
    workers: int = 1,
    min_failures: int = 10,
    allow_sparse: bool = False,
) -> float:
    """Product of the event probability and the conditional outage estimate.

    A statistically valid lower bound (up to Monte-Carlo error) on the
    2-level outage probability; its log-log slope approaches -(N+1)/2.
    """
    event = EventSpec(EPS2, cfg.n_elements, theta)
    conditional = estimate_conditional_outage(
        cfg,
        event,
        rho,
        trials,
        seed,
        block_size=block_size,
        workers=workers,
        min_failures=min_failures,
        allow_sparse=allow_sparse,
    )
    return event_probability(event, rho) * conditional.p_hat
