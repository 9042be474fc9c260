"""Aggregate SNR, outage indicators, and per-sample geometric bounds.

All operations broadcast over numpy arrays: element axes come first, so a
``(n_elements, batch)`` pair of magnitude/phase arrays aggregates into a
``(batch,)`` complex array.
"""

from __future__ import annotations

import math

import numpy as np

from .channel import SystemConfig

__all__ = [
    "aggregate",
    "received_snr",
    "outage_indicator",
    "bound_l3_lower",
    "bound_l2_lambda",
    "direct_snr_bounds",
]


def aggregate(
    magnitudes: np.ndarray, thetas: np.ndarray
) -> np.ndarray | complex:
    """Sum of magnitude * exp(i*theta) over the leading (element) axis."""
    mags = np.asarray(magnitudes, dtype=float)
    angs = np.asarray(thetas, dtype=float)
    if mags.size == 0:
        raise ValueError("aggregate needs at least one coefficient")
    if mags.shape != angs.shape:
        raise ValueError("magnitudes and thetas must have identical shapes")
    total = (mags * np.exp(1j * angs)).sum(axis=0)
    return complex(total) if np.ndim(total) == 0 else total


def received_snr(
    cfg: SystemConfig,
    g_aggregate: np.ndarray | complex,
    rho: float,
    h_sd: np.ndarray | complex | None = None,
) -> np.ndarray | float:
    """Instantaneous SNR for one aggregate value at transmit SNR rho.

    With a direct link, the aggregate's residual phases are understood to be
    relative to the direct path's phase, so only |h_sd| enters.
    """
    if rho <= 0.0:
        raise ValueError("rho must be positive")
    g = np.asarray(g_aggregate)
    gain = cfg.eta * math.sqrt(cfg.omega_s * cfg.omega_i)
    if cfg.direct_link:
        if h_sd is None:
            raise ValueError("direct-link configuration needs h_sd")
        amp = np.abs(h_sd) + gain * g
        value = rho * (amp.real**2 + amp.imag**2)
    else:
        value = rho * gain**2 * (g.real**2 + g.imag**2)
    return float(value) if np.ndim(value) == 0 else value


def outage_indicator(
    cfg: SystemConfig,
    g_aggregate: np.ndarray | complex,
    rho: float,
    h_sd: np.ndarray | complex | None = None,
) -> np.ndarray | bool:
    """True when the achievable rate falls strictly below the target rate."""
    if rho <= 0.0:
        raise ValueError("rho must be positive")
    if cfg.direct_link:
        snr = received_snr(cfg, g_aggregate, rho, h_sd)
        value = np.asarray(snr) < 2.0**cfg.rate_bpcu - 1.0
    else:
        g = np.asarray(g_aggregate)
        value = g.real**2 + g.imag**2 < cfg.epsilon0 / rho
    return bool(value) if np.ndim(value) == 0 else value


def bound_l3_lower(
    mag1: np.ndarray | float,
    theta1: np.ndarray | float,
    mag2: np.ndarray | float,
    theta2: np.ndarray | float,
) -> np.ndarray | float:
    """Lower bound on |m1*e^(i*t1) + m2*e^(i*t2)|^2 for the 3-level error range.

    Valid whenever both phase errors lie in [-pi/3, pi/3], where the phase
    gap cannot exceed 2*pi/3:

        |G2|^2 >= (m2 - m1/2)^2 + (3/4) m1^2.
    """
    t1 = np.asarray(theta1, dtype=float)
    t2 = np.asarray(theta2, dtype=float)
    limit = math.pi / 3.0 + 1e-12
    if np.any(np.abs(t1) > limit) or np.any(np.abs(t2) > limit):
        raise ValueError("bound requires both phase errors within [-pi/3, pi/3]")
    m1 = np.asarray(mag1, dtype=float)
    m2 = np.asarray(mag2, dtype=float)
    value = (m2 - 0.5 * m1) ** 2 + 0.75 * m1**2
    return float(value) if np.ndim(value) == 0 else value


def bound_l2_lambda(
    mag1: np.ndarray | float,
    mag2: np.ndarray | float,
    rho: float,
) -> np.ndarray | float:
    """Upper bound on |G2|^2 inside the opposed boundary strips.

    With strip width theta = rho^(-1/2), any phase pair with
    theta2 - theta1 in [pi - 2*theta, pi] satisfies

        |G2|^2 < (m1 - cos(2*theta)*m2)^2 + 4*m2^2/rho.
    """
    if rho <= 0.0:
        raise ValueError("rho must be positive")
    theta = rho**-0.5
    m1 = np.asarray(mag1, dtype=float)
    m2 = np.asarray(mag2, dtype=float)
    value = (m1 - math.cos(2.0 * theta) * m2) ** 2 + 4.0 * m2**2 / rho
    return float(value) if np.ndim(value) == 0 else value


def direct_snr_bounds(
    cfg: SystemConfig,
    g_aggregate: np.ndarray | complex,
    rho: float,
    h_sd: np.ndarray | complex,
) -> tuple[np.ndarray | float, np.ndarray | float]:
    """Sandwich for the direct-link SNR.

    The lower bound drops the cross term (valid because the aggregate's
    argument stays within [-pi/2, pi/2] when every residual error does);
    the upper bound is the triangle inequality.
    """
    if rho <= 0.0:
        raise ValueError("rho must be positive")
    g = np.asarray(g_aggregate)
    a = np.abs(h_sd)
    gsq = g.real**2 + g.imag**2
    gain = cfg.eta * math.sqrt(cfg.omega_s * cfg.omega_i)
    lo = rho * (a**2 + gain**2 * gsq)
    hi = rho * (a + gain * np.sqrt(gsq)) ** 2
    if np.ndim(lo) == 0:
        return float(lo), float(hi)
    return lo, hi
