import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dcone.errors import RegimeError
from dcone.graph_energy import GraphDiscretization
from dcone.selftest import (
    gradient_fd_error,
    graph_first_variation_error,
    random_feasible_state,
    smooth_field,
)
from dcone.sphere_curve import bending_energy, graph_curve

TWO_PI = 2.0 * math.pi


def _state(seed, n=256):
    rng = np.random.default_rng(seed)
    eps = float(rng.uniform(0.01, 0.2))
    theta = np.arange(n) * (TWO_PI / n)
    return random_feasible_state(rng, eps, n), smooth_field(rng, theta, modes=8)


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=0, max_value=2**31 - 1))
def test_gradients_match_finite_differences(seed):
    alpha, d = _state(seed)
    e_err, l_err = gradient_fd_error(alpha, d)
    assert e_err <= 1e-6 and l_err <= 1e-6


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=0, max_value=2**31 - 1))
def test_gradient_matches_first_variation(seed):
    alpha, d = _state(seed)
    assert graph_first_variation_error(alpha, d) <= 1e-4


@pytest.mark.parametrize("which", ["energy", "length"])
def test_hessian_matches_gradient_differences(which):
    alpha, d = _state(7, n=128)
    disc = GraphDiscretization(alpha.size)
    derivs = disc.energy_derivs if which == "energy" else disc.length_derivs
    _, _, H = derivs(alpha)
    t = 1e-5 * np.max(alpha)
    gp = derivs(alpha + t * d, hessian=False)[1]
    gm = derivs(alpha - t * d, hessian=False)[1]
    fd = (gp - gm) / (2.0 * t)
    assert np.max(np.abs(H @ d - fd)) <= 1e-6 * np.max(np.abs(fd))
    assert abs(H - H.T).max() <= 1e-9 * abs(H).max()


def test_energy_agrees_with_curve_kernel():
    n = 1024
    th = np.arange(n) * (TWO_PI / n)
    alpha = 0.08 + 0.03 * np.cos(th) ** 4
    disc = GraphDiscretization(n)
    assert abs(disc.energy(alpha) - bending_energy(graph_curve(alpha))) <= 1e-8


def test_parallel_values():
    n, eps = 256, 0.05
    disc = GraphDiscretization(n)
    alpha = np.full(n, eps)
    assert abs(disc.length(alpha) - TWO_PI * math.sqrt(1 - eps**2)) <= 1e-12
    assert np.allclose(disc.kappa(alpha), eps / math.sqrt(1 - eps**2), atol=1e-14)


def test_regime_error():
    with pytest.raises(RegimeError):
        GraphDiscretization(64).energy(np.full(64, 1.0))
