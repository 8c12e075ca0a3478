"""Discrete bending energy and length of graph curves over the theta grid.

A graph curve has height ``alpha(theta)``.  With ``p = 1 - alpha^2``,

    kappa = Q / W^{3/2},   Q = alpha'' + alpha p + 3 alpha alpha'^2 / p,
    |gamma'|^2 = W = p + alpha'^2 / p,

so the energy density is ``Q^2 W^{-5/2}`` and the length density ``W^{1/2}``.
Both are local in ``(alpha, alpha', alpha'')``; gradients and Hessians follow
by the chain rule through the periodic difference matrices.
"""

import math

import numpy as np
import scipy.sparse as sp

from .errors import RegimeError
from .fd import diff_matrices, pdiff1, pdiff2


class GraphDiscretization:
    """Difference operators and quadrature weight for ``n`` theta nodes."""

    def __init__(self, n):
        self.n = n
        self.step = 2.0 * math.pi / n
        self.theta = np.arange(n) * self.step
        self.D1, self.D2 = diff_matrices(n, self.step)
        self._ops = (sp.identity(n, format="csr"), self.D1, self.D2)

    def jets(self, alpha):
        return alpha, pdiff1(alpha, self.step), pdiff2(alpha, self.step)

    # -- pointwise kernels ------------------------------------------------------

    @staticmethod
    def _qw(a, a1, a2):
        p = 1.0 - a * a
        if np.any(p <= 0.0):
            raise RegimeError("alpha^2 >= 1: curve left the graph regime")
        Q = a2 + a * p + 3.0 * a * a1 * a1 / p
        W = p + a1 * a1 / p
        return p, Q, W

    @staticmethod
    def _qw_derivs(a, a1, p):
        # first and second partials of Q and W in (alpha, alpha'); Q_q = 1
        Qa = 1.0 - 3.0 * a * a + 3.0 * a1 * a1 * (1.0 + a * a) / p**2
        Qp = 6.0 * a * a1 / p
        Qaa = -6.0 * a + 6.0 * a * a1 * a1 * (3.0 + a * a) / p**3
        Qap = 6.0 * a1 * (1.0 + a * a) / p**2
        Qpp = 6.0 * a / p
        Wa = -2.0 * a + 2.0 * a * a1 * a1 / p**2
        Wp = 2.0 * a1 / p
        Waa = -2.0 + 2.0 * a1 * a1 * (1.0 + 3.0 * a * a) / p**3
        Wap = 4.0 * a * a1 / p**2
        Wpp = 2.0 / p
        return (Qa, Qp, Qaa, Qap, Qpp), (Wa, Wp, Waa, Wap, Wpp)

    def kappa(self, alpha):
        a, a1, a2 = self.jets(alpha)
        _, Q, W = self._qw(a, a1, a2)
        return Q / W**1.5

    def speed(self, alpha):
        a, a1, a2 = self.jets(alpha)
        _, _, W = self._qw(a, a1, a2)
        return np.sqrt(W)

    def energy(self, alpha):
        a, a1, a2 = self.jets(alpha)
        _, Q, W = self._qw(a, a1, a2)
        return float(np.sum(Q * Q * W**-2.5) * self.step)

    def length(self, alpha):
        a, a1, a2 = self.jets(alpha)
        _, _, W = self._qw(a, a1, a2)
        return float(np.sum(np.sqrt(W)) * self.step)

    # -- derivatives ------------------------------------------------------------

    def _pull_back(self, da, dp, dq):
        # gradient of step * sum(e(a, D1 a, D2 a))
        return self.step * (da + self.D1.T @ dp + self.D2.T @ dq)

    def _hessian(self, blocks):
        # blocks[k][m] is the diagonal of d^2 e / (dx_k dx_m), x = (a, a', a'')
        H = None
        for k in range(3):
            for m in range(3):
                d = blocks[k][m]
                if d is None:
                    continue
                term = self._ops[k].T @ sp.diags(d) @ self._ops[m]
                H = term if H is None else H + term
        return (self.step * H).tocsc()

    def energy_derivs(self, alpha, hessian=True):
        """Return ``(F, grad F, hess F)`` (hessian is ``None`` unless requested)."""
        a, a1, a2 = self.jets(alpha)
        p, Q, W = self._qw(a, a1, a2)
        (Qa, Qp, Qaa, Qap, Qpp), (Wa, Wp, Waa, Wap, Wpp) = self._qw_derivs(a, a1, p)
        W25, W35 = W**-2.5, W**-3.5
        e = Q * Q * W25
        eQ = 2.0 * Q * W25
        eW = -2.5 * Q * Q * W35
        grad = self._pull_back(eQ * Qa + eW * Wa, eQ * Qp + eW * Wp, eQ)
        if not hessian:
            return float(np.sum(e) * self.step), grad, None
        eQQ = 2.0 * W25
        eQW = -5.0 * Q * W35
        eWW = 8.75 * Q * Q * W**-4.5
        dQ = (Qa, Qp, np.ones_like(a))
        dW = (Wa, Wp, np.zeros_like(a))
        d2Q = ((Qaa, Qap, None), (Qap, Qpp, None), (None, None, None))
        d2W = ((Waa, Wap, None), (Wap, Wpp, None), (None, None, None))
        blocks = [[None] * 3 for _ in range(3)]
        for k in range(3):
            for m in range(3):
                val = (
                    eQQ * dQ[k] * dQ[m]
                    + eQW * (dQ[k] * dW[m] + dW[k] * dQ[m])
                    + eWW * dW[k] * dW[m]
                )
                if d2Q[k][m] is not None:
                    val = val + eQ * d2Q[k][m]
                if d2W[k][m] is not None:
                    val = val + eW * d2W[k][m]
                blocks[k][m] = val
        return float(np.sum(e) * self.step), grad, self._hessian(blocks)

    def length_derivs(self, alpha, hessian=True):
        """Return ``(L, grad L, hess L)``."""
        a, a1, a2 = self.jets(alpha)
        p, Q, W = self._qw(a, a1, a2)
        _, (Wa, Wp, Waa, Wap, Wpp) = self._qw_derivs(a, a1, p)
        rW = np.sqrt(W)
        lW = 0.5 / rW
        grad = self._pull_back(lW * Wa, lW * Wp, np.zeros_like(a))
        if not hessian:
            return float(np.sum(rW) * self.step), grad, None
        lWW = -0.25 / (W * rW)
        blocks = [
            [lWW * Wa * Wa + lW * Waa, lWW * Wa * Wp + lW * Wap, None],
            [lWW * Wa * Wp + lW * Wap, lWW * Wp * Wp + lW * Wpp, None],
            [None, None, None],
        ]
        return float(np.sum(rW) * self.step), grad, self._hessian(blocks)

    def displacement(self, alpha):
        """``d gamma / d alpha`` at each node (tangent to the sphere)."""
        a = np.asarray(alpha, dtype=float)
        rho = np.sqrt(1.0 - a * a)
        c, s = np.cos(self.theta), np.sin(self.theta)
        return np.column_stack([-a / rho * c, -a / rho * s, np.ones_like(a)])
