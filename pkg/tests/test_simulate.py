import math

import numpy as np
import pytest
from scipy.stats import norm

from qdesign import (
    Inadmissible,
    SimConfig,
    fisher_information,
    g_inverse,
    g_of_theta,
    gaussian,
    piecewise_linear,
    point_mass,
    run,
    run_trial,
    sine,
    threshold,
    trial_rng,
)
from qdesign.simulate import CSV_HEADER, csv_row


def test_trial_rng_substreams():
    a = trial_rng(123, 0).random(5)
    b = trial_rng(123, 0).random(5)
    c = trial_rng(123, 1).random(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_g_inverse_center_is_exact():
    theta, clamped = g_inverse(sine(), point_mass(), 0.5)
    assert theta == 0.0 and not clamped
    theta, clamped = g_inverse(threshold(), gaussian(1.0), 0.5)
    assert theta == 0.0 and not clamped


def test_g_inverse_round_trip():
    rng = np.random.default_rng(31)
    for q, d in [(sine(), point_mass()), (threshold(), gaussian(1.0)), (sine(), gaussian(0.25))]:
        for theta in rng.uniform(-0.99, 0.99, 100 if d is not point_mass() else 100):
            theta = float(theta)
            g = g_of_theta(q, d, theta)
            est, clamped = g_inverse(q, d, g)
            assert not clamped
            assert est == pytest.approx(theta, abs=1e-8)


def test_g_inverse_clamps():
    est, clamped = g_inverse(sine(), gaussian(0.25), 0.0)
    assert est == -1.0 and clamped
    est, clamped = g_inverse(sine(), gaussian(0.25), 1.0)
    assert est == 1.0 and clamped


def test_run_trial_consistency_zero_noise():
    cfg = SimConfig(theta_true=0.3, N=200_000, trials=1, seed=7,
                    quantizer=sine(), noise=point_mass())
    est = run_trial(cfg, trial_rng(cfg.seed, 0))
    assert est == pytest.approx(0.3, abs=0.01)


def test_run_trial_within_five_sigma():
    # CRB(0) = pi/2 for the threshold rule under unit Gaussian noise
    cfg = SimConfig(theta_true=0.0, N=10_000, trials=1, seed=11,
                    quantizer=threshold(), noise=gaussian(1.0))
    est = run_trial(cfg, trial_rng(cfg.seed, 0))
    assert abs(est) < 5 * math.sqrt(math.pi / 2 / cfg.N)


def test_run_reproducible():
    cfg = SimConfig(theta_true=0.2, N=500, trials=40, seed=99,
                    quantizer=threshold(), noise=gaussian(1.0))
    r1 = run(cfg)
    r2 = run(cfg)
    assert r1 == r2


def test_single_trial_mse_definition():
    cfg = SimConfig(theta_true=0.1, N=200, trials=1, seed=5,
                    quantizer=threshold(), noise=gaussian(1.0))
    est = run_trial(cfg, trial_rng(cfg.seed, 0))
    rep = run(cfg)
    assert rep.empirical_mse == pytest.approx((est - 0.1) ** 2, rel=1e-12)


def test_bit_mean_converges_to_g():
    cfg = SimConfig(theta_true=-0.4, N=2000, trials=50, seed=17,
                    quantizer=threshold(), noise=gaussian(1.0))
    total = 0.0
    for i in range(cfg.trials):
        rng = trial_rng(cfg.seed, i)
        w = cfg.noise.sample(rng, cfg.N)
        u = rng.random(cfg.N)
        total += np.mean(u < cfg.quantizer.evaluate(cfg.theta_true + w))
    mean = total / cfg.trials
    g = g_of_theta(cfg.quantizer, cfg.noise, cfg.theta_true)
    se = math.sqrt(g * (1 - g) / (cfg.N * cfg.trials))
    assert abs(mean - g) < 4 * se


def test_unbiased_in_the_interior():
    cfg = SimConfig(theta_true=0.2, N=2000, trials=400, seed=23,
                    quantizer=threshold(), noise=gaussian(1.0))
    rep = run(cfg)
    assert rep.clamp_count == 0
    assert abs(rep.empirical_bias) < 4 * math.sqrt(rep.empirical_mse / cfg.trials)


def test_efficiency_moderate_run():
    cfg = SimConfig(theta_true=0.0, N=1000, trials=800, seed=41,
                    quantizer=threshold(), noise=gaussian(1.0))
    rep = run(cfg)
    assert rep.crb_over_N == pytest.approx(math.pi / 2 / cfg.N, rel=1e-10)
    assert 0.85 < rep.efficiency < 1.15


def test_boundary_regime_tracks_crb():
    # near the edge of the parameter range at high SNR, where clamping is
    # a real (and counted) event, the scaled error still tracks the bound
    d = gaussian(0.0025)
    cfg = SimConfig(theta_true=-0.95, N=1000, trials=5000, seed=29,
                    quantizer=sine(), noise=d)
    rep = run(cfg)
    bound = 1.0 / fisher_information(sine(), d, -0.95)
    assert rep.empirical_mse * cfg.N == pytest.approx(bound, rel=0.15)


def test_clamping_reported():
    # N = 5 onebit sensors at theta = 0.9: the all-ones sample mean exceeds
    # g(1) often, clamping the estimate to the endpoint
    cfg = SimConfig(theta_true=0.9, N=5, trials=200, seed=3,
                    quantizer=threshold(), noise=gaussian(1.0))
    rep = run(cfg)
    assert rep.clamp_count > 0
    assert rep.empirical_mse > 0


def test_inadmissible_rejected():
    cfg = SimConfig(theta_true=0.0, N=10, trials=2, seed=1,
                    quantizer=piecewise_linear([2.0, -1.0]), noise=point_mass())
    with pytest.raises(Inadmissible):
        run(cfg)
    with pytest.raises(Inadmissible):
        run_trial(cfg, trial_rng(1, 0))


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(theta_true=1.5, N=10, trials=1, seed=0,
                  quantizer=threshold(), noise=gaussian(1.0))
    with pytest.raises(ValueError):
        SimConfig(theta_true=0.0, N=0, trials=1, seed=0,
                  quantizer=threshold(), noise=gaussian(1.0))


def test_csv_row_format():
    cfg = SimConfig(theta_true=0.1, N=50, trials=5, seed=2,
                    quantizer=threshold(), noise=gaussian(1.0))
    rep = run(cfg)
    row = csv_row(cfg, rep)
    fields = row.split(",")
    assert len(fields) == len(CSV_HEADER.split(","))
    assert float(fields[0]) == 0.1
    assert int(fields[1]) == 50
    data = rep.to_dict()
    assert set(data) == {"empirical_mse", "empirical_bias", "crb_over_N",
                         "efficiency", "clamp_count"}
