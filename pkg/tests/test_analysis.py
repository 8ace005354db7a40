import math

import numpy as np
import pytest

from piezobeam.analysis import (
    build_bound_report,
    damping_decay_rates,
    error_bound_curve,
    performance_metrics,
    residual_bounds,
    residual_tail_study,
    state_bound_curve,
)
from piezobeam.beam import BeamParams
from piezobeam.errors import ConfigError
from piezobeam.modal import DampingModel, Placement, assemble
from piezobeam.signals import NoiseSpec, build_disturbance, polyharmonic_disturbance
from piezobeam.simulate import SimConfig, simulate
from piezobeam.synthesis import eigvec_condition, tune_gains

PARAMS = BeamParams.dimensionless(a1=0.01)
PATCH = Placement(x1=0.0, x2=0.1, x0=0.095)


def fig_gains(system, lam_L=34.0):
    return tune_gains(system, 11 * math.sqrt(3), 0.01,
                      [6.0, 10.0, 14.0], lambda_L=lam_L)


# ---------------------------------------------------------------------------
# bound curves
# ---------------------------------------------------------------------------

def test_error_bound_limit_is_steady_term():
    system = assemble(PARAMS, 3, PATCH)
    gains = fig_gains(system)
    F, eps = 11 * math.sqrt(3), 0.01
    steady = (F + gains.L_norm * eps) / gains.lambda_L
    curve = error_bound_curve(gains, F, eps, e0_norm=1.0, times=[0.0, 1e6])
    assert curve[-1] == pytest.approx(steady, rel=1e-12)
    assert curve[0] == pytest.approx(1.0 + steady, rel=1e-12)


def test_error_bound_pure_exponential():
    system = assemble(PARAMS, 2, PATCH)
    gains = fig_gains(system)
    t = np.linspace(0.0, 0.5, 11)
    curve = error_bound_curve(gains, 0.0, 0.0, e0_norm=2.0, times=t)
    np.testing.assert_allclose(curve, 2.0 * np.exp(-gains.lambda_L * t),
                               rtol=1e-12)


def test_error_bound_arithmetic_cross_check():
    system = assemble(PARAMS, 3, PATCH)
    gains = fig_gains(system)
    F, eps = 11 * math.sqrt(3), 0.01
    got = error_bound_curve(gains, F, eps, 0.0, [100.0])[0]
    assert got == pytest.approx((F + gains.L_norm * eps) / 34.0, rel=1e-9)


def test_state_bound_pure_exponential_and_monotonicity():
    system = assemble(PARAMS, 2, PATCH)
    gains = fig_gains(system)
    t = np.linspace(0.0, 1.0, 7)
    curve = state_bound_curve(gains, 0.0, 0.0, z0_norm=3.0, times=t)
    np.testing.assert_allclose(curve, 3.0 * np.exp(-gains.lambda_K * t),
                               rtol=1e-12)
    # steady term strictly decreasing in lambda_K at fixed numerator
    num = 5.0 + gains.BK_norm * 0.7
    steadies = [num / lam for lam in (4.0, 8.0, 16.0)]
    assert steadies[0] > steadies[1] > steadies[2]


def test_bound_report_invariants():
    system = assemble(PARAMS, 3, PATCH)
    gains = fig_gains(system)
    F, eps = 11 * math.sqrt(3), 0.01
    rep = build_bound_report(system, gains, F, eps)
    assert rep.e_steady_bound == pytest.approx(
        (F + rep.L_norm * eps) / rep.lambda_L, rel=1e-12)
    assert rep.z_steady_bound == pytest.approx(
        (F + rep.BK_norm * rep.e_bound_used) / rep.lambda_K, rel=1e-12)
    assert rep.kappa_L == pytest.approx(
        eigvec_condition(system.A - np.outer(gains.L, system.C)), rel=1e-9)
    assert rep.kappa_L >= 1.0 and rep.kappa_K >= 1.0


# ---------------------------------------------------------------------------
# residual bounds
# ---------------------------------------------------------------------------

def test_residual_bounds_zero_forcing():
    rep = residual_bounds(PARAMS, 0.0, N=3, K_max=6)
    assert np.all(rep.per_mode_bound == 0.0)
    assert rep.tail_sum_uniform == 0.0
    assert rep.tail_sum_smooth == 0.0


def test_residual_bounds_reference_values():
    rep = residual_bounds(PARAMS, 11.0, N=3, K_max=6, simulate_fit=False)
    assert rep.tail_sum_uniform == pytest.approx(27.863325501642887, rel=1e-12)
    assert rep.tail_sum_smooth == pytest.approx(0.5804859479508935, rel=1e-12)
    np.testing.assert_allclose(
        rep.per_mode_bound,
        [11.0 / (0.01 * math.pi**2 * k**2) for k in (4, 5, 6)], rtol=1e-12)


def test_residual_bounds_validation():
    with pytest.raises(ValueError):
        residual_bounds(PARAMS, -1.0, N=3, K_max=6)
    with pytest.raises(ValueError):
        residual_bounds(PARAMS, 1.0, N=3, K_max=3)


def test_residual_bounds_simulated_fit_exponent():
    rep = residual_bounds(PARAMS, 2.0, N=3, K_max=8)
    assert rep.simulated_sup is not None
    # resonant response tracks the 1/k^2 bound envelope
    assert rep.decay_exponent == pytest.approx(-2.0, abs=0.1)
    assert np.all(rep.simulated_sup <= rep.per_mode_bound * 1.01)


def test_tail_monotonicity_in_N():
    tails = [residual_bounds(PARAMS, 5.0, N=N, K_max=N + 1,
                             simulate_fit=False).tail_sum_uniform
             for N in range(1, 8)]
    assert all(a > b for a, b in zip(tails, tails[1:]))
    smooth = [residual_bounds(PARAMS, 5.0, N=N, K_max=N + 1,
                              simulate_fit=False).tail_sum_smooth
              for N in (1, 2, 4)]
    # exact exponent-3 scaling in (N+1) by construction
    assert smooth[0] / smooth[1] == pytest.approx((3 / 2) ** 3, rel=1e-12)
    assert smooth[1] / smooth[2] == pytest.approx((5 / 3) ** 3, rel=1e-12)


# ---------------------------------------------------------------------------
# damping decay rates
# ---------------------------------------------------------------------------

def test_structural_decay_rates():
    rates = damping_decay_rates(PARAMS, DampingModel.STRUCTURAL, [4])
    assert rates[0] == pytest.approx(-0.08 * math.pi**2, rel=1e-12)
    r = damping_decay_rates(PARAMS, DampingModel.STRUCTURAL, [3, 6, 12])
    assert r[1] / r[0] == pytest.approx(4.0, rel=1e-12)
    assert r[2] / r[1] == pytest.approx(4.0, rel=1e-12)


def test_kelvin_voigt_rates_saturate():
    rates = damping_decay_rates(PARAMS, DampingModel.KELVIN_VOIGT, [10, 20])
    assert abs(rates[1] - rates[0]) / abs(rates[0]) < 0.05
    # slow root approaches -1/a1
    assert rates[1] == pytest.approx(-1.0 / 0.01, rel=0.05)


def test_decay_rates_require_modes():
    with pytest.raises(ValueError):
        damping_decay_rates(PARAMS, DampingModel.STRUCTURAL, [])


# ---------------------------------------------------------------------------
# residual tail study
# ---------------------------------------------------------------------------

def test_tail_study_slopes():
    uni = residual_tail_study(PARAMS, 11.0, [2, 3, 4, 5], R=8,
                              regime="uniform")
    smooth = residual_tail_study(PARAMS, 11.0, [2, 3, 4, 5], R=8,
                                 regime="smooth")
    assert uni.slope == pytest.approx(-1.118, abs=0.1)
    assert smooth.slope == pytest.approx(-2.576, abs=0.1)
    assert np.all(np.diff(uni.tail_sums) < 0.0)
    assert np.all(np.diff(smooth.tail_sums) < 0.0)
    with pytest.raises(ValueError):
        residual_tail_study(PARAMS, 11.0, [2, 3], R=4, regime="bogus")


# ---------------------------------------------------------------------------
# performance metrics
# ---------------------------------------------------------------------------

def run_fig(lam_L=34.0, T=12.0):
    system = assemble(PARAMS, 3, PATCH)
    gains = fig_gains(system, lam_L)
    dist = polyharmonic_disturbance(PARAMS)
    noise = NoiseSpec(bound=0.01, seed=1234)
    cfg = SimConfig(t_final=T, dt=2.5e-4, residual_modes=5, seed=7)
    return simulate(system, gains, dist, noise, cfg)


def test_metrics_zero_everything():
    system = assemble(PARAMS, 3, PATCH)
    gains = fig_gains(system)
    cfg = SimConfig(t_final=12.0, dt=2.5e-4, z0=np.zeros(6),
                    z_hat0=np.zeros(6))
    res = simulate(system, gains, build_disturbance([]), NoiseSpec(bound=0.0),
                   cfg)
    m = performance_metrics(res)
    assert m.peak_e == 0.0
    assert m.attenuation_ratio == 0.0
    assert m.settle_time == 0.0


def test_metrics_horizon_guard():
    res = run_fig(T=1.5)
    with pytest.raises(ConfigError):
        performance_metrics(res)


def test_metrics_fig_run():
    res = run_fig()
    m = performance_metrics(res)
    assert m.force_sup == pytest.approx(11 * math.sqrt(3), rel=1e-6)
    assert 0.0 < m.attenuation_ratio < 0.05
    assert m.peak_e > 5.0
    assert 0.0 < m.t_peak < 1.0
    assert 0.0 < m.settle_time < 2.0
    assert m.steady_band > m.steady_e


def test_simulated_error_within_kappa_qualified_bound():
    res = run_fig()
    gains = res.gains
    system = res.system
    kappa_L = eigvec_condition(system.A - np.outer(gains.L, system.C))
    eps_sup = float(np.max(np.abs(res.y - res.z @ system.C)))
    curve = error_bound_curve(gains, res.disturbance.force_vector_bound(3),
                              eps_sup, res.norm_e[0], res.t)
    assert np.all(res.norm_e <= kappa_L * curve)
