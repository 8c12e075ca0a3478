import math

import numpy as np
import pytest

from dcone.fd import diff1, diff2, diff_matrices, pdiff1, pdiff2


@pytest.mark.parametrize("degree", range(5))
def test_one_sided_stencils_exact_on_quartics(degree):
    x = np.linspace(-0.3, 1.1, 23)
    step = x[1] - x[0]
    f = x**degree
    d1 = degree * x ** max(degree - 1, 0) if degree else np.zeros_like(x)
    d2 = degree * (degree - 1) * x ** max(degree - 2, 0) if degree > 1 else np.zeros_like(x)
    assert np.allclose(diff1(f, step), d1, atol=1e-10)
    assert np.allclose(diff2(f, step), d2, atol=1e-8)


def test_periodic_stencils_fourth_order():
    errs = []
    for n in (32, 64, 128):
        step = 2.0 * math.pi / n
        t = np.arange(n) * step
        f = np.exp(np.sin(t))
        d1 = np.cos(t) * f
        d2 = (np.cos(t) ** 2 - np.sin(t)) * f
        errs.append((np.max(np.abs(pdiff1(f, step) - d1)), np.max(np.abs(pdiff2(f, step) - d2))))
    errs = np.array(errs)
    orders = np.log2(errs[:-1] / errs[1:])
    assert np.all(orders > 3.7)


def test_matrices_match_stencils():
    n = 40
    step = 2.0 * math.pi / n
    f = np.random.default_rng(0).standard_normal(n)
    D1, D2 = diff_matrices(n, step)
    assert np.allclose(D1 @ f, pdiff1(f, step))
    assert np.allclose(D2 @ f, pdiff2(f, step))


def test_axis_argument():
    x = np.linspace(0.0, 1.0, 12)
    f = np.stack([x**2, x**3], axis=1)
    d = diff1(f.T, x[1] - x[0], axis=1)
    assert np.allclose(d[0], 2 * x) and np.allclose(d[1], 3 * x**2)
