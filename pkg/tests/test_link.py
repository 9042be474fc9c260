"""Aggregation, SNR, outage boundary, and the per-sample geometric bounds."""

import math

import numpy as np
import pytest

from risim import (
    RngStream,
    SystemConfig,
    aggregate,
    bound_l2_lambda,
    bound_l3_lower,
    direct_snr_bounds,
    outage_indicator,
    received_snr,
)

CFG = SystemConfig(n_elements=2, levels=3, eta=0.8, omega_s=1.0, omega_i=0.5)


def test_aggregate_coherent():
    assert aggregate([1.0, 1.0], [0.0, 0.0]) == pytest.approx(2.0 + 0.0j)


def test_aggregate_cancellation():
    g = aggregate([1.0, 1.0], [math.pi / 2.0, -math.pi / 2.0])
    assert abs(g) == pytest.approx(0.0, abs=1e-15)


def test_aggregate_law_of_cosines():
    g = aggregate([1.0, 2.0], [math.pi / 3.0, -math.pi / 3.0])
    assert abs(g) ** 2 == pytest.approx(3.0, rel=1e-12)


def test_aggregate_validation():
    with pytest.raises(ValueError):
        aggregate([], [])
    with pytest.raises(ValueError):
        aggregate([1.0], [0.0, 0.0])


def test_received_snr_value():
    value = received_snr(CFG, 2.0 + 0.0j, 10.0)
    assert value == pytest.approx(12.8, rel=1e-12)
    assert received_snr(CFG, 0.0j, 10.0) == 0.0
    with pytest.raises(ValueError):
        received_snr(CFG, 1.0 + 0.0j, 0.0)


def test_received_snr_direct_only():
    cfg = SystemConfig(n_elements=1, levels=2, direct_link=True, omega_d=1.0)
    rho = 7.0
    assert received_snr(cfg, 0.0j, rho, h_sd=1.0 + 0.0j) == pytest.approx(rho)


def test_outage_boundary_is_strict():
    rho = 1.0
    threshold = CFG.epsilon0 / rho
    g_boundary = complex(math.sqrt(threshold))
    assert not outage_indicator(CFG, g_boundary, rho)
    assert outage_indicator(CFG, 0.0j, rho)
    g_above = complex(math.sqrt(3.2))
    assert not outage_indicator(CFG, g_above, rho)


def test_outage_monotone_in_rho():
    gen = RngStream(301).generator()
    g = gen.normal(size=50) + 1j * gen.normal(size=50)
    for gi in g:
        if not outage_indicator(CFG, gi, 5.0):
            assert not outage_indicator(CFG, gi, 50.0)


def test_bound_l3_examples():
    # extreme phase gap: the bound is tight
    assert bound_l3_lower(1.0, math.pi / 3, 1.0, -math.pi / 3) == pytest.approx(1.0)
    actual = abs(aggregate([1.0, 1.0], [math.pi / 3, -math.pi / 3])) ** 2
    assert actual == pytest.approx(1.0, rel=1e-12)
    # coherent case leaves slack
    coherent = bound_l3_lower(1.0, 0.0, 1.0, 0.0)
    assert coherent == pytest.approx(1.0)
    assert coherent <= abs(aggregate([1.0, 1.0], [0.0, 0.0])) ** 2
    # asymmetric magnitudes
    value = bound_l3_lower(2.0, 0.1, 1.0, -0.2)
    assert value == pytest.approx(3.0, rel=1e-12)
    actual = abs(aggregate([2.0, 1.0], [0.1, -0.2])) ** 2
    assert actual == pytest.approx(5.0 + 4.0 * math.cos(0.3), rel=1e-12)
    assert value <= actual


def test_bound_l3_rejects_out_of_range_phases():
    with pytest.raises(ValueError):
        bound_l3_lower(1.0, 1.2, 1.0, 0.0)


def test_bound_l3_holds_over_random_pairs():
    gen = RngStream(302).generator()
    count = 1_000_000
    m = np.sqrt(gen.standard_exponential((2, count)) * gen.standard_exponential((2, count)))
    theta = gen.uniform(-math.pi / 3.0, math.pi / 3.0, (2, count))
    bound = bound_l3_lower(m[0], theta[0], m[1], theta[1])
    re = m[0] * np.cos(theta[0]) + m[1] * np.cos(theta[1])
    im = m[0] * np.sin(theta[0]) + m[1] * np.sin(theta[1])
    actual = re * re + im * im
    assert np.all(bound <= actual + 1e-12)


def test_bound_l2_lambda_examples():
    rho = 100.0
    lam = bound_l2_lambda(1.0, 1.0, rho)
    assert lam == pytest.approx((1.0 - math.cos(0.2)) ** 2 + 0.04, rel=1e-12)
    actual = 2.0 + 2.0 * math.cos(math.pi - 0.2)
    assert actual < lam
    # degenerate single path
    assert bound_l2_lambda(1.0, 0.0, rho) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        bound_l2_lambda(1.0, 1.0, 0.0)


@pytest.mark.parametrize("rho", [1e2, 1e3, 1e4])
def test_bound_l2_lambda_dominates_in_strips(rho):
    gen = RngStream(303).generator()
    count = 1_000_000
    theta = rho**-0.5
    m = np.sqrt(gen.standard_exponential((2, count)) * gen.standard_exponential((2, count)))
    t1 = -math.pi / 2.0 + gen.uniform(0.0, theta, count)
    t2 = math.pi / 2.0 - gen.uniform(0.0, theta, count)
    re = m[0] * np.cos(t1) + m[1] * np.cos(t2)
    im = m[0] * np.sin(t1) + m[1] * np.sin(t2)
    gsq = re * re + im * im
    lam = bound_l2_lambda(m[0], m[1], rho)
    assert np.all(gsq < lam + 1e-12)


def test_argument_containment():
    # the aggregate's argument stays inside the elements' phase interval
    gen = RngStream(304).generator()
    for n in range(2, 9):
        count = 150_000
        lo = gen.uniform(-math.pi / 2.0, math.pi / 2.0, count)
        hi = gen.uniform(lo, math.pi / 2.0)
        theta = gen.uniform(lo, hi, (n, count))
        mags = np.sqrt(gen.standard_exponential((n, count))
                       * gen.standard_exponential((n, count)))
        g = (mags * np.exp(1j * theta)).sum(axis=0)
        arg = np.angle(g)
        ok = g == 0.0
        assert np.all((arg >= lo - 1e-9) | ok)
        assert np.all((arg <= hi + 1e-9) | ok)


def test_cancellation_layout_forces_outage():
    # equal magnitudes at exactly opposed boundary errors null the aggregate
    g = aggregate([3.7, 3.7], [-math.pi / 2.0, math.pi / 2.0])
    cfg = SystemConfig(n_elements=2, levels=2, eta=0.8, omega_s=1.0, omega_i=0.5)
    for rho in (1.0, 1e3, 1e9):
        assert outage_indicator(cfg, g, rho)


def test_direct_link_sandwich():
    cfg = SystemConfig(n_elements=3, levels=2, eta=0.8, omega_s=1.0, omega_i=0.5,
                       direct_link=True, omega_d=2.0)
    gen = RngStream(305).generator()
    count = 1_000_000
    m = np.sqrt(gen.standard_exponential((3, count)) * gen.standard_exponential((3, count)))
    theta = gen.uniform(-math.pi / 2.0, math.pi / 2.0, (3, count))
    g = (m * np.exp(1j * theta)).sum(axis=0)
    h_sd = math.sqrt(cfg.omega_d / 2.0) * (gen.standard_normal(count)
                                           + 1j * gen.standard_normal(count))
    rho = 25.0
    gamma = received_snr(cfg, g, rho, h_sd=np.abs(h_sd))
    lo, hi = direct_snr_bounds(cfg, g, rho, h_sd)
    assert np.all(lo <= gamma * (1.0 + 1e-12) + 1e-12)
    assert np.all(gamma <= hi * (1.0 + 1e-12) + 1e-12)
