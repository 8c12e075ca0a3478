"""Deterministic invariant suite behind ``dcone selftest``.

Every check uses a fixed seed and sequential evaluation, so two runs on the
same machine produce identical numbers.  Wall times are deliberately not
part of the report.
"""

import math

import numpy as np

from . import elastica, linear_problem, recovery
from .graph_energy import GraphDiscretization
from .sphere_curve import ARCLENGTH, DiscreteCurve, bending_energy, first_variation, perturb

TWO_PI = 2.0 * math.pi
SEED = 20240611


# -- random smooth states ----------------------------------------------------------

def smooth_field(rng, theta, modes=6, decay=2.0):
    """Random trigonometric polynomial with coefficients decaying like ``k^-decay``."""
    out = np.zeros_like(theta)
    for k in range(1, modes + 1):
        a, b = rng.standard_normal(2) / k**decay
        out += a * np.cos(k * theta) + b * np.sin(k * theta)
    return out


def random_feasible_state(rng, epsilon, n):
    """Heights ``alpha >= eps`` with a random smooth lift of size O(eps)."""
    theta = np.arange(n) * (TWO_PI / n)
    bump = smooth_field(rng, theta)
    bump = bump - bump.min()
    return epsilon * (1.0 + bump / max(bump.max(), 1e-12))


def random_sphere_curve(rng, n, amplitude=0.3):
    """Smooth closed curve on the sphere, a random wobble of the equator, period 2 pi."""
    theta = np.arange(n) * (TWO_PI / n)
    z = amplitude * smooth_field(rng, theta, modes=4)
    phase = 0.2 * smooth_field(rng, theta, modes=3)
    ang = theta + phase
    pts = np.column_stack([np.cos(ang), np.sin(ang), z])
    pts /= np.linalg.norm(pts, axis=1)[:, None]
    return DiscreteCurve(pts, ARCLENGTH, TWO_PI)


# -- finite-difference checks ------------------------------------------------------

def central_difference(func, t):
    """Five-point central difference of ``func`` at 0 with step ``t``."""
    return (8.0 * (func(t) - func(-t)) - (func(2.0 * t) - func(-2.0 * t))) / (12.0 * t)


def gradient_fd_error(alpha, direction, delta=1e-4):
    """Relative mismatch of ``grad . d`` for energy and length against central differences.

    The difference step is ``delta`` times the sup-norm of ``alpha``.  The
    length derivative is tiny next to the length itself, so the fourth-order
    stencil is needed to keep both truncation and rounding below 1e-6.
    """
    disc = GraphDiscretization(alpha.size)
    _, gF, _ = disc.energy_derivs(alpha, hessian=False)
    _, gL, _ = disc.length_derivs(alpha, hessian=False)
    t = delta * np.max(np.abs(alpha))
    out = []
    for func, g in ((disc.energy, gF), (disc.length, gL)):
        fd = central_difference(lambda x: func(alpha + x * direction), t)
        exact = float(g @ direction)
        out.append(abs(fd - exact) / max(abs(exact), 1e-300))
    return tuple(out)


def first_variation_fd_error(curve, psi, delta=1e-4):
    fd = central_difference(lambda x: bending_energy(perturb(curve, psi, x)), delta)
    exact = first_variation(curve, psi)
    return abs(fd - exact) / max(abs(exact), 1e-300)


def graph_first_variation_error(alpha, direction):
    """Graph energy gradient against the first-variation formula along ``d gamma / d alpha``."""
    from .sphere_curve import graph_curve

    disc = GraphDiscretization(alpha.size)
    _, gF, _ = disc.energy_derivs(alpha, hessian=False)
    psi = disc.displacement(alpha) * direction[:, None]
    exact = float(gF @ direction)
    return abs(first_variation(graph_curve(alpha), psi) - exact) / max(abs(exact), 1e-300)


def gradient_suite(count=50, n=256, n_curve=1024, seed=SEED):
    """Finite-difference checks of the graph gradients and of the first variation.

    The first-variation formula is a continuum identity, so its mismatch with
    the discrete energy is a discretization error; ``n_curve`` keeps that
    below 1e-5 for the random curves used here.
    """
    rng = np.random.default_rng(seed)
    theta = np.arange(n) * (TWO_PI / n)
    e_err, l_err, g_err = [], [], []
    for _ in range(count):
        eps = float(rng.uniform(0.01, 0.2))
        alpha = random_feasible_state(rng, eps, n)
        d = smooth_field(rng, theta, modes=8)
        a, b = gradient_fd_error(alpha, d)
        e_err.append(a)
        l_err.append(b)
        g_err.append(graph_first_variation_error(alpha, d))
    fv_err = []
    theta = np.arange(n_curve) * (TWO_PI / n_curve)
    for _ in range(count):
        curve = random_sphere_curve(rng, n_curve)
        psi = np.column_stack([smooth_field(rng, theta, modes=5) for _ in range(3)])
        fv_err.append(first_variation_fd_error(curve, psi))
    return {
        "states": count,
        "energy_gradient_max_rel": max(e_err),
        "length_gradient_max_rel": max(l_err),
        "first_variation_max_rel": max(fv_err),
        "graph_vs_first_variation_max_rel": max(g_err),
        "passed": bool(max(e_err) <= 1e-6 and max(l_err) <= 1e-6
                       and max(fv_err) <= 1e-4 and max(g_err) <= 1e-4),
    }


def limit_identity_suite(count=20, n=512, seed=SEED + 1):
    """Circle formula against the annulus quadrature of the cone Hessian."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(count):
        curve = random_sphere_curve(rng, n)
        value = recovery.energy_E0(curve, check=False, require_unit_speed=False)
        ann = recovery.annulus_limit_energy(curve)
        worst = max(worst, abs(ann - value) / abs(value))
    return {"curves": count, "max_rel": worst, "passed": bool(worst <= 1e-4)}


# -- module checks -----------------------------------------------------------------

def linear_suite():
    sol = linear_problem.solve_one_fold()
    _, cert = linear_problem.global_minimizer_search()
    g = cert.grid_one_fold
    agree = max(abs(g[0] - sol.s_hat), abs(g[1] - sol.Lambda), abs(g[2] - sol.energy))
    intervals = {
        "s_hat in (1.21, 1.215)": 1.21 < sol.s_hat < 1.215,
        "Lambda in (3.79, 3.82)": 3.79 < sol.Lambda < 3.82,
        "fold_length in (2.42, 2.43)": 2.42 < sol.fold_length < 2.43,
    }
    return {
        "s_hat": sol.s_hat,
        "Lambda": sol.Lambda,
        "energy": sol.energy,
        "fold_length": sol.fold_length,
        "intervals": intervals,
        "one_fold_energy": cert.one_fold.energy,
        "two_fold_energy": cert.two_fold.energy,
        "grid_root_agreement": agree,
        "spot_checks": {name: bool(ok) for name, _, ok in cert.spot_checks},
        "certificate": cert.passed,
        "passed": bool(all(intervals.values()) and cert.passed and agree <= 1e-6),
    }


def elastica_suite(epsilon=0.05, n=512):
    curve, rep = elastica.minimize(epsilon, n)
    passed = (
        rep.converged
        and rep.n_lift == 1
        and curve.feasible()
        and max(rep.conserved_drifts) <= 1e-3
        and rep.height_ode_residual <= 1e-2 * epsilon
        and rep.endpoint_kappa_ok
        and rep.fold_cubic_sum >= rep.fold_cubic_bound
    )
    return {
        "epsilon": epsilon,
        "n": n,
        "converged": rep.converged,
        "n_lift": rep.n_lift,
        "lift_lengths": rep.lift_lengths,
        "energy_ratio": rep.final_energy / epsilon**2,
        "Lambda2_hat": 1.0 + rep.lambda_hat,
        "conserved_drift": rep.conserved_drift,
        "height_ode_residual": rep.height_ode_residual,
        "endpoint_kappa_min": rep.endpoint_kappa_min,
        "obstacle_kappa": rep.obstacle_kappa,
        "fold_cubic_sum": rep.fold_cubic_sum,
        "fold_cubic_bound": rep.fold_cubic_bound,
        "iterations": rep.iterations,
        "passed": bool(passed),
    }


def recovery_suite(n=256):
    from .sphere_curve import equator

    prof = recovery.ProfileF()
    jumps = prof.continuity_jumps()
    res = recovery.recovery_convergence(equator(n), [1e-2, 1e-3, 1e-4, 1e-5])
    return {
        "profile_max_jump": float(max(jumps)),
        "equator_e0": res.e0,
        "slope": res.slope,
        "rate_a": res.rate_a,
        "checks": res.checks,
        "passed": bool(res.passed and max(jumps) <= 1e-12),
    }


def run_selftest():
    """Run every suite and return a JSON-ready report."""
    suites = {
        "linear": linear_suite(),
        "gradients": gradient_suite(),
        "limit_identity": limit_identity_suite(),
        "elastica": elastica_suite(),
        "recovery": recovery_suite(),
    }
    suites["passed"] = all(s["passed"] for s in suites.values())
    return suites
