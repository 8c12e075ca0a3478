import math

import numpy as np
import pytest

from dcone.errors import BracketError, DomainError, InfeasibleConfigError
from dcone.fd import diff2
from dcone.linear_problem import (
    FoldConfig,
    branch_lambda,
    config_energy,
    constraint_residual,
    critical_s,
    fold_L,
    g_function,
    global_minimizer_search,
    linear_constraint_check,
    interval_spot_checks,
    raw_bending_energy,
    solve_one_fold,
    two_fold_energy_bound,
)

TWO_PI = 2.0 * math.pi
# 40-digit roots from an independent mpmath findroot on the same equations
S_HAT = 1.2128740801159923
LAMBDA = 3.8045094882534027
ENERGY = 66.614782891972342
S_C = 1.223958505618064


@pytest.fixture(scope="module")
def search():
    return global_minimizer_search()


def test_branch_lambda_intervals():
    assert 3.81 <= branch_lambda(1, 1.21) <= 3.82
    assert branch_lambda(1, 1.225) >= 3.75
    assert branch_lambda(2, 1.225) >= 6.35


def test_branch_lambda_decreasing():
    s = np.linspace(0.05, 1.3, 200)
    s = s[np.abs(s - 0.5 * math.pi) > 1e-3]
    for j in (1, 2):
        lam = np.array([branch_lambda(j, x) for x in s])
        assert np.all(np.diff(lam) < 0.0)


def test_branch_lambda_errors():
    with pytest.raises(DomainError):
        branch_lambda(0, 1.0)
    with pytest.raises(DomainError):
        branch_lambda(1, 0.5 * math.pi)


def test_g_function():
    z = np.linspace(1e-3, 1.5, 500)
    g = np.array([g_function(x) for x in z])
    assert np.all(g >= 0.0) and np.all(np.diff(g) > 0.0)
    assert g_function(1.225) > TWO_PI
    # direct value (mpmath, 40 digits) and the series z^3/3 + 2 z^5/5 + O(z^7)
    assert abs(g_function(0.1) - 3.373604713483988e-4) <= 1e-15
    for z in (1e-2, 3e-3):
        coeff = (g_function(z) - z**3 / 3.0) / z**5
        assert abs(coeff - 0.4) < 1e-2
    with pytest.raises(DomainError):
        g_function(1.6)


def test_critical_s():
    sc = critical_s()
    assert sc < 1.225
    assert abs(g_function(sc) - TWO_PI) <= 1e-12
    assert abs(sc - S_C) <= 1e-14


def test_constraint_residual_examples():
    assert constraint_residual(FoldConfig([], [], 1.0)) == 0.0
    assert constraint_residual(FoldConfig([], [], 2.0)) == 3.0
    sol = solve_one_fold()
    assert abs(constraint_residual(sol.config)) <= 1e-10
    assert fold_L(1.21) < 3.81**2
    assert fold_L(1.215) > 3.8**2
    with pytest.raises(InfeasibleConfigError):
        fold_L(1.3)


def test_solve_one_fold_matches_oracle():
    sol = solve_one_fold()
    assert 1.21 < sol.s_hat < 1.215 and 3.79 < sol.Lambda < 3.82
    assert 2.42 < sol.fold_length < 2.43
    assert abs(sol.s_hat - S_HAT) <= 1e-13
    assert abs(sol.Lambda - LAMBDA) <= 1e-12
    assert abs(sol.energy - ENERGY) <= 1e-11
    assert sol.energy <= 67.4
    assert sol.energy > sol.Lambda**2 * math.pi
    assert abs(raw_bending_energy(sol.config) - 2.0 * sol.energy) <= 1e-9 * sol.energy


def test_one_fold_unique_root():
    sc = critical_s()
    s = np.linspace(0.5, sc * (1 - 1e-9), 10_000)
    phi = np.array([fold_L(x) - branch_lambda(1, x) ** 2 for x in s])
    assert np.count_nonzero(np.diff(np.sign(phi))) == 1


def test_monotonicity_on_grid():
    s = np.linspace(0.05, critical_s() * (1 - 1e-9), 1000)
    L = np.array([fold_L(x) for x in s])
    lam = np.array([branch_lambda(1, x) for x in s])
    assert np.all(np.diff(L) > 0.0) and np.all(np.diff(lam) < 0.0)


def test_profile_boundary_values():
    sol = solve_one_fold()
    s0, L = sol.s_hat, sol.Lambda
    for s in (-s0, s0):
        assert abs(sol.h(s) - 1.0) <= 1e-12
        assert abs(sol.h_prime(s)) <= 1e-12
        # kappa = cos(L s) / cos(L s0) is continuous with the contact value 1
        assert abs(math.cos(L * s) / math.cos(L * s0) - 1.0) <= 1e-12
        assert sol.kappa(s) == 1.0
    assert abs(sol.kappa(0.0) - 1.0 / math.cos(L * s0)) <= 1e-12


def test_profile_odes():
    sol = solve_one_fold()
    # past n ~ 1024 the residual is dominated by rounding amplified by ds^-2
    # (about 1e-8 at n = 4096), so the truncation check runs at n = 1024
    n = 1024
    s0, L = sol.s_hat, sol.Lambda
    # closed-form inner branch, two nodes past each end so that only central
    # stencils enter the residual
    ds = 2.0 * s0 / (n - 1)
    s = -s0 + ds * np.arange(-2, n + 2)
    h = (math.sin(s0) * np.cos(L * s) - L * math.sin(L * s0) * np.cos(s)) / sol._denominator()
    k = np.cos(L * s) / math.cos(L * s0)
    inner = slice(2, -2)
    assert np.max(np.abs(diff2(h, ds) + h - k)[inner]) <= 1e-8
    assert np.max(np.abs(diff2(k, ds) + L * L * k)[inner]) <= 1e-8 * L * L * np.max(np.abs(k))


def test_assembled_profile():
    sol = solve_one_fold()
    s, h, _ = sol.sample(1 << 16)
    assert np.all(h >= 1.0 - 1e-12)
    outside = np.abs(s) >= sol.s_hat
    assert np.all(h[outside] == 1.0)
    assert abs(linear_constraint_check(h)) <= 1e-6


def test_linear_constraint_examples():
    n = 1024
    s = np.arange(n) * (TWO_PI / n)
    assert abs(linear_constraint_check(np.ones(n)) + TWO_PI) <= 1e-12
    for delta in (1e-2, 1e-3):
        val = linear_constraint_check(1.0 + delta * np.cos(s))
        # the cos mode is neutral: int(delta^2 (sin^2 - cos^2)) = 0 and int cos = 0
        assert abs(val + TWO_PI) <= 1e-10


def test_two_fold_bound():
    bound, s = two_fold_energy_bound()
    assert bound >= 80.0 and math.pi / 3 < s < 1.225


def test_global_search(search):
    winner, cert = search
    sol = solve_one_fold()
    assert winner.n_folds == 1
    assert cert.one_fold.energy <= 67.4 and cert.two_fold.energy >= 80.0
    s, lam, e = cert.grid_one_fold
    assert abs(s - sol.s_hat) <= 1e-6 and abs(lam - sol.Lambda) <= 1e-6 and abs(e - sol.energy) <= 1e-6
    assert cert.lambda_upper <= 4.64 < branch_lambda(2, 1.225)
    assert cert.s_bar_lower > math.pi / 3
    assert 1.13 < cert.critical_two_fold < 1.14
    assert cert.unequal_two_fold_min > cert.one_fold.energy
    assert cert.passed
    for config in (cert.one_fold, cert.two_fold):
        config.validate()
    x = cert.two_fold.Lambda * cert.two_fold.half_lengths
    assert np.all(x > 1.43 * math.pi)


def test_spot_checks_all_hold():
    checks = interval_spot_checks()
    assert all(ok for _, _, ok in checks), [n for n, _, ok in checks if not ok]


def test_serialization():
    sol = solve_one_fold()
    rec = sol.to_json(64)
    assert rec["n"] == 64 and len(rec["h"]) == 64
    assert sol.to_csv(8).splitlines()[0] == "s,h,kappa"
