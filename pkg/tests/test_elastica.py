import math

import numpy as np
import pytest

from dcone.elastica import (
    GraphCurve,
    SolverConfig,
    arclength_nodes,
    centered,
    check_symmetry,
    diagnostics,
    estimate_multiplier,
    fit_multiplier_uniform,
    from_csv,
    initial_alpha,
    lift_runs,
    minimize,
    sweep_checks,
    to_csv,
    unit_speed_curve,
)
from dcone.errors import DomainError, InsufficientDataError, RegimeError
from dcone.graph_energy import GraphDiscretization

TWO_PI = 2.0 * math.pi


def test_one_interval_close_to_linear_fold(minimizer_005, linear_solution):
    curve, rep = minimizer_005
    assert rep.converged and rep.n_lift == 1
    assert abs(rep.lift_lengths[0] - linear_solution.fold_length) <= 0.05 * linear_solution.fold_length


def test_profile_close_to_linear_height(minimizer_005, linear_solution):
    curve, _ = minimizer_005
    c = centered(curve)
    th = np.where(c.theta > math.pi, c.theta - TWO_PI, c.theta)
    h = linear_solution.h(th)
    assert np.max(np.abs(c.alpha / c.epsilon - h)) <= 0.05 * np.max(h)


def test_feasibility_and_constraint(minimizer_005):
    curve, rep = minimizer_005
    assert np.min(curve.alpha) >= curve.epsilon
    assert np.min(curve.alpha) == curve.epsilon
    assert abs(rep.length_residual) <= 1e-10


def test_energy_monotone_per_inner_solve(minimizer_005):
    _, rep = minimizer_005
    assert rep.energy_history
    for hist in rep.energy_history:
        assert np.all(np.diff(hist) <= 0.0)


def test_multiplier_near_linear(minimizer_005, linear_solution):
    _, rep = minimizer_005
    L2 = linear_solution.Lambda**2
    assert 0.9 * L2 < 1.0 + rep.lambda_hat < 1.1 * L2
    # AL multiplier and curvature-ODE fit describe the same lambda
    assert abs(rep.lambda_al - rep.lambda_hat) <= 0.01 * abs(rep.lambda_hat)


def test_diagnostics_on_minimizer(minimizer_005):
    _, rep = minimizer_005
    eps = rep.epsilon
    assert rep.conserved_drift <= 1e-3
    assert rep.fold_cubic_sum >= rep.fold_cubic_bound == 0.25 * eps * eps
    assert rep.endpoint_kappa_ok
    assert rep.height_ode_residual <= 1e-2 * eps
    assert rep.el_residual <= 1e-2 * eps
    assert rep.active_vi_min >= -1e-6


def test_two_bump_stationary_point_has_higher_energy(minimizer_005):
    _, one = minimizer_005
    _, two = minimize(0.05, 2048, SolverConfig(init="two-bump"))
    assert two.converged
    assert two.final_energy > one.final_energy


def test_symmetry(minimizer_005):
    curve, _ = minimizer_005
    assert check_symmetry(centered(curve)) <= 1e-8


def test_lift_set_nonempty_from_parallel_start():
    eps, n = 0.05, 512
    alpha = np.full(n, eps)
    disc = GraphDiscretization(n)
    assert disc.length(alpha) < TWO_PI
    curve, rep = minimize(eps, n)
    assert rep.n_lift >= 1


def test_parallel_diagnostics():
    eps = 0.05
    rep = diagnostics(GraphCurve(np.full(512, eps), eps))
    assert rep.n_lift == 0 and math.isnan(rep.lambda_hat)
    assert rep.height_ode_residual <= 1e-8


def test_regime_and_domain_errors():
    with pytest.raises(RegimeError):
        minimize(0.9, 512)
    with pytest.raises(RegimeError):
        minimize(0.0, 512)
    with pytest.raises(DomainError):
        minimize(0.05, 128)
    with pytest.raises(RegimeError):
        GraphCurve(np.full(16, 1.0), 0.1)


def test_multiplier_exact_for_linear_ode():
    L0 = 3.8
    s = np.linspace(-1.2, 1.2, 801)
    lam = fit_multiplier_uniform(s, np.cos(L0 * s), cubic=False)
    assert abs(lam - (L0**2 - 1.0)) <= 1e-6


def test_multiplier_stable_under_noise():
    # band-limited noise: white noise differentiated twice at grid scale has no
    # bounded effect on a second-order fit
    L0 = 3.8
    s = np.linspace(-1.2, 1.2, 801)
    base = fit_multiplier_uniform(s, np.cos(L0 * s), cubic=False)
    rng = np.random.default_rng(11)
    shifts = []
    for _ in range(100):
        k = rng.uniform(0.5, 3.0, size=4)
        ph = rng.uniform(0, TWO_PI, size=4)
        noise = np.sum(np.cos(np.outer(s, k) + ph), axis=1)
        noise *= 1e-3 / np.max(np.abs(noise))
        shifts.append(abs(fit_multiplier_uniform(s, np.cos(L0 * s) + noise, cubic=False) - base))
    assert max(shifts) <= 0.1


def test_multiplier_insufficient_data():
    eps = 0.05
    alpha = np.full(512, eps)
    alpha[100:104] += 1e-3
    with pytest.raises(InsufficientDataError):
        estimate_multiplier(GraphCurve(alpha, eps))


def test_lift_runs_wrap():
    mask = np.array([1, 1, 0, 0, 1, 0, 1, 1], dtype=bool)
    assert lift_runs(mask) == [(4, 1), (6, 4)]
    assert lift_runs(np.zeros(4, bool)) == []


def test_initial_alpha_meets_linearized_constraint():
    eps, n = 0.02, 1024
    alpha = initial_alpha(eps, n)
    disc = GraphDiscretization(n)
    assert np.min(alpha) == eps
    assert abs(disc.length(alpha) - TWO_PI) <= 10 * eps**3


def test_csv_round_trip(minimizer_005):
    curve, _ = minimizer_005
    text = to_csv(curve)
    assert text.splitlines()[0] == "theta,alpha,kappa,s"
    back = from_csv(text, curve.epsilon)
    assert np.array_equal(back.alpha, curve.alpha)


def test_unit_speed_resampling(minimizer_005):
    from dcone.sphere_curve import speed

    curve, _ = minimizer_005
    c = unit_speed_curve(curve, 512)
    assert np.max(np.abs(speed(c) - 1.0)) <= 1e-6
    s, total = arclength_nodes(curve)
    assert abs(total - TWO_PI) <= 1e-9


def test_conserved_drift_refinement_order():
    # beyond n ~ 1024 the drift sits at the rounding floor of fourth derivatives
    drift = [minimize(0.05, n)[1].conserved_drift for n in (256, 512, 1024)]
    orders = np.log2(np.array(drift[:-1]) / np.array(drift[1:]))
    assert np.all(orders >= 1.5)


def test_sweep_checks_logic(linear_solution):
    rows = [
        dict(epsilon=e, converged=True, n_lift=1, lift_length=l, Lambda2_hat=14.4,
             energy_ratio=linear_solution.bending, alpha_ratio=4.0, alpha2_ratio=20.0)
        for e, l in ((0.1, 2.44), (0.05, 2.43), (0.02, 2.425))
    ]
    checks = sweep_checks(rows, linear_solution, 4096)
    assert all(checks.values())
    rows[-1]["lift_length"] = 2.6
    assert not sweep_checks(rows, linear_solution, 4096)["lift_final_in_range"]
