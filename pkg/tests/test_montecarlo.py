"""Estimator correctness: analytic anchors, conditioning, reproducibility."""

import math

import numpy as np
import pytest

from risim import (
    EventSpec,
    ResourceGuardError,
    SystemConfig,
    cdf_gsq,
    estimate_conditional_outage,
    estimate_outage,
    event_probability,
    lower_bound_outage,
    measure_event_frequency,
    wilson_interval,
)
from risim.montecarlo import OutageEstimate

from oracles import oracle_outage_smalln

CFG6 = dict(eta=0.8, omega_s=1.0, omega_i=0.5, rate_bpcu=1.0)


def binom_sigma(p: float, n: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 1e-300) / n)


def test_wilson_interval_basic():
    lo, hi = wilson_interval(0, 100)
    assert lo == 0.0 and hi > 0.0
    lo, hi = wilson_interval(100, 100)
    assert hi == 1.0 and lo < 1.0
    lo, hi = wilson_interval(10, 1000)
    assert lo < 0.01 < hi
    with pytest.raises(ValueError):
        wilson_interval(5, 0)
    with pytest.raises(ValueError):
        wilson_interval(-1, 10)


def test_estimate_fields_consistent():
    est = OutageEstimate.from_counts(17, 1000, seed=3, rho=10.0)
    assert est.p_hat == 0.017
    assert est.ci_low <= est.p_hat <= est.ci_high


def test_n1_perfect_matches_analytic():
    cfg = SystemConfig(n_elements=1, levels="perfect", **CFG6)
    rho = 100.0
    target = cdf_gsq(cfg.epsilon0 / rho)
    est = estimate_outage(cfg, rho, 10_000_000, 404)
    assert abs(est.p_hat - target) < 4.0 * binom_sigma(target, est.trials)


def test_low_snr_saturates():
    cfg = SystemConfig(n_elements=2, levels=2, **CFG6)
    est = estimate_outage(cfg, 1e-6, 10_000, 405)
    assert est.p_hat == 1.0


def test_quantization_only_hurts():
    cfg3 = SystemConfig(n_elements=2, levels=3, **CFG6)
    cfgp = SystemConfig(n_elements=2, levels="perfect", **CFG6)
    rho = 1000.0
    p3 = estimate_outage(cfg3, rho, 2_000_000, 406)
    pp = estimate_outage(cfgp, rho, 2_000_000, 406)
    assert pp.p_hat <= p3.p_hat


def test_deterministic_and_worker_independent():
    cfg = SystemConfig(n_elements=2, levels=3, **CFG6)
    a = estimate_outage(cfg, 100.0, 2_500_000, 407, block_size=500_000, workers=1)
    b = estimate_outage(cfg, 100.0, 2_500_000, 407, block_size=500_000, workers=4)
    assert a == b
    c = estimate_outage(cfg, 100.0, 2_500_000, 408, block_size=500_000)
    assert c.failures != a.failures


def test_resource_guard():
    cfg = SystemConfig(n_elements=2, levels="perfect", **CFG6)
    with pytest.raises(ResourceGuardError) as info:
        estimate_outage(cfg, 1e6, 20_000, 409)
    sparse = info.value.estimate
    assert sparse.failures < 10
    est = estimate_outage(cfg, 1e6, 20_000, 409, allow_sparse=True)
    assert est == sparse


def test_full_channel_path_agrees_with_shortcut():
    cfg = SystemConfig(n_elements=2, levels=2, **CFG6)
    rho = 100.0
    fast = estimate_outage(cfg, rho, 2_000_000, 410)
    full = estimate_outage(cfg, rho, 2_000_000, 411, path="full")
    sigma = binom_sigma(fast.p_hat, 2_000_000)
    assert abs(fast.p_hat - full.p_hat) < 4.0 * math.sqrt(2.0) * sigma


def test_full_channel_path_direct_link():
    cfg = SystemConfig(n_elements=2, levels=2, direct_link=True, omega_d=1.0, **CFG6)
    fast = estimate_outage(cfg, 10.0, 1_000_000, 412)
    full = estimate_outage(cfg, 10.0, 1_000_000, 413, path="full")
    sigma = binom_sigma(fast.p_hat, 1_000_000)
    assert abs(fast.p_hat - full.p_hat) < 4.0 * math.sqrt(2.0) * sigma


def test_matches_quadrature_oracle():
    # deterministic tensor-grid integration vs the estimator, 2% at p ~ 1e-2
    rho = 10 ** 1.5
    for levels in ("perfect", 2):
        cfg = SystemConfig(n_elements=2, levels=levels, **CFG6)
        l_arg = None if levels == "perfect" else levels
        target, report = oracle_outage_smalln(2, l_arg, cfg.epsilon0 / rho)
        est = estimate_outage(cfg, rho, 10_000_000, 414)
        assert report.method == "quadrature"
        assert abs(est.p_hat / target - 1.0) < 0.02


def test_ordering_in_levels():
    rho = 1000.0
    estimates = {}
    for levels in (2, 3, 4, "perfect"):
        cfg = SystemConfig(n_elements=2, levels=levels, **CFG6)
        estimates[levels] = estimate_outage(cfg, rho, 4_000_000, 415)
    chain = [estimates[2], estimates[3], estimates[4], estimates["perfect"]]
    for better, worse in zip(chain[1:], chain[:-1]):
        joint = 4.0 * math.sqrt(
            binom_sigma(worse.p_hat, worse.trials) ** 2
            + binom_sigma(better.p_hat, better.trials) ** 2
        )
        assert better.p_hat <= worse.p_hat + joint


def test_event_probability_closed_forms():
    assert event_probability(EventSpec("eps1", 2, 0.1)) == pytest.approx(
        2.0 * (0.1 / math.pi) ** 2, rel=1e-12
    )
    assert event_probability(EventSpec("eps1", 2, 0.1)) == pytest.approx(
        2.0264e-3, rel=1e-4
    )
    # the N-element event at N=2 coincides with the two-element one
    assert event_probability(EventSpec("eps2", 2, 0.1)) == event_probability(
        EventSpec("eps1", 2, 0.1)
    )
    with pytest.raises(ValueError):
        EventSpec("eps2", 4, math.pi)  # strip wider than the error range
    with pytest.raises(ValueError):
        EventSpec("eps1", 3, 0.1)
    with pytest.raises(ValueError):
        EventSpec("eps2", 2).resolved_theta(0.1)  # default theta would exceed pi/2


def test_event_frequency_matches_closed_form():
    event = EventSpec("eps2", 3, 0.1)
    target = event_probability(event)
    freq = measure_event_frequency(event, 10_000_000, 416)
    assert abs(freq.p_hat - target) < 3.0 * binom_sigma(target, freq.trials)


def test_conditional_requires_two_level_codebook():
    cfg = SystemConfig(n_elements=2, levels=3, **CFG6)
    with pytest.raises(ValueError):
        estimate_conditional_outage(cfg, EventSpec("eps2", 2), 100.0, 1000, 1)


def test_conditional_total_probability_decomposition():
    # at strip width pi/2 the event is "one error in each half"; together
    # with the complementary same-half layout it recovers the whole law
    cfg = SystemConfig(n_elements=2, levels=2, **CFG6)
    rho = 10.0
    trials = 2_000_000
    cond = estimate_conditional_outage(
        cfg, EventSpec("eps1", 2, math.pi / 2.0), rho, trials, 417
    )
    unconditional = estimate_outage(cfg, rho, trials, 418)

    # same-half complement, sampled directly
    gen = np.random.Generator(np.random.Philox(key=[419, 0]))
    m = np.sqrt(gen.standard_exponential((2, trials))
                * gen.standard_exponential((2, trials)))
    sign = gen.integers(0, 2, trials) * 2 - 1
    theta = gen.uniform(0.0, math.pi / 2.0, (2, trials)) * sign
    re = (m * np.cos(theta)).sum(axis=0)
    im = (m * np.sin(theta)).sum(axis=0)
    p_same = np.count_nonzero(re * re + im * im < cfg.epsilon0 / rho) / trials

    recombined = 0.5 * cond.p_hat + 0.5 * p_same
    sigma = binom_sigma(unconditional.p_hat, trials)
    assert abs(recombined - unconditional.p_hat) < 5.0 * sigma
    # conditioning on opposed strips can only hurt the alignment
    assert cond.p_hat > unconditional.p_hat


def test_conditional_slope_is_shallow():
    # the conditional outage decays no faster than rho^-0.7 over 20..40 dB
    cfg = SystemConfig(n_elements=2, levels=2, **CFG6)
    points = []
    for k, rho_db in enumerate((20.0, 30.0, 40.0)):
        rho = 10 ** (rho_db / 10.0)
        est = estimate_conditional_outage(
            cfg, EventSpec("eps2", 2), rho, 1_000_000, 420 + k
        )
        points.append((rho_db / 10.0, math.log10(est.p_hat)))
    x, y = np.array(points).T
    slope = np.polyfit(x, y, 1)[0]
    assert slope >= -0.7


@pytest.mark.parametrize("n_elements,target,tol", [(2, -1.5, 0.25), (3, -2.0, 0.3)])
def test_lower_bound_slope(n_elements, target, tol):
    cfg = SystemConfig(n_elements=n_elements, levels=2, **CFG6)
    xs, ys = [], []
    for k, rho_db in enumerate((20.0, 30.0, 40.0)):
        rho = 10 ** (rho_db / 10.0)
        trials = 4_000_000 if rho_db == 40.0 else 1_000_000
        value = lower_bound_outage(cfg, rho, trials, 430 + k)
        xs.append(rho_db / 10.0)
        ys.append(math.log10(value))
    slope = np.polyfit(xs, ys, 1)[0]
    assert abs(slope - target) <= tol


def test_lower_bound_below_unconditional():
    cfg = SystemConfig(n_elements=2, levels=2, **CFG6)
    rho = 1000.0
    bound = lower_bound_outage(cfg, rho, 1_000_000, 440)
    est = estimate_outage(cfg, rho, 4_000_000, 441)
    assert bound <= est.p_hat + 4.0 * binom_sigma(est.p_hat, est.trials)


def test_wilson_coverage_at_rare_event():
    # ~95% nominal coverage of the pooled estimate across independent runs
    cfg = SystemConfig(n_elements=1, levels="perfect", **CFG6)
    rho = 31250.0
    repetitions = 100
    trials = 30_000
    estimates = [
        estimate_outage(cfg, rho, trials, 500 + r, allow_sparse=True)
        for r in range(repetitions)
    ]
    pooled = sum(e.failures for e in estimates) / (repetitions * trials)
    assert 1e-4 < pooled < 1e-2
    covered = sum(1 for e in estimates if e.ci_low <= pooled <= e.ci_high)
    assert covered >= 90
