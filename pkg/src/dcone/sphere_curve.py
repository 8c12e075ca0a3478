"""Discrete differential geometry of closed curves on the unit sphere.

Curves are sampled on a uniform periodic grid.  All derivatives use the
fourth-order periodic stencils from :mod:`dcone.fd`.
"""

import csv
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidCurveError, ResolutionError
from .fd import pdiff1, pdiff2

ARCLENGTH = "arclength"
ANGLE = "cylindrical_angle"
PARAMETER_KINDS = (ARCLENGTH, ANGLE)
MIN_NODES = 16
UNIT_TOL = 1e-12


@dataclass(frozen=True)
class DiscreteCurve:
    """Closed curve on S^2 sampled at ``n`` uniform parameter values.

    Attributes
    ----------
    points : ndarray, shape (n, 3)
        Unit vectors, ``points[i] = gamma(i * period / n)``.
    parameter_kind : str
        ``"arclength"`` or ``"cylindrical_angle"``.
    period : float
        Parameter period, 2*pi for both parametrizations used here.
    """

    points: np.ndarray
    parameter_kind: str = ARCLENGTH
    period: float = 2.0 * math.pi

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise InvalidCurveError(f"points must have shape (n, 3), got {pts.shape}")
        if pts.shape[0] < MIN_NODES:
            raise ResolutionError(f"need n >= {MIN_NODES} nodes, got {pts.shape[0]}")
        if self.parameter_kind not in PARAMETER_KINDS:
            raise InvalidCurveError(f"unknown parameter_kind {self.parameter_kind!r}")
        if not np.all(np.isfinite(pts)):
            raise InvalidCurveError("non-finite curve samples")
        dev = np.max(np.abs(np.linalg.norm(pts, axis=1) - 1.0))
        if dev > UNIT_TOL:
            raise InvalidCurveError(f"points off the unit sphere by {dev:.3e}")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self):
        return self.points.shape[0]

    @property
    def step(self):
        return self.period / self.n

    @property
    def params(self):
        return np.arange(self.n) * self.step

    @classmethod
    def from_function(cls, func, n, parameter_kind=ARCLENGTH, period=2.0 * math.pi,
                      normalize=True):
        """Sample ``func(t) -> (n, 3)`` on the uniform grid."""
        t = np.arange(n) * (period / n)
        pts = np.asarray(func(t), dtype=float)
        if normalize:
            pts = pts / np.linalg.norm(pts, axis=1)[:, None]
        return cls(pts, parameter_kind, period)


def parallel(a, n, parameter_kind=ANGLE):
    """Circle of latitude at height ``a``; arclength kind uses period 2*pi*sqrt(1-a^2)."""
    r = math.sqrt(1.0 - a * a)
    if parameter_kind == ANGLE:
        period = 2.0 * math.pi
        th = np.arange(n) * (period / n)
    else:
        period = 2.0 * math.pi * r
        th = np.arange(n) * (period / n) / r
    pts = np.column_stack([r * np.cos(th), r * np.sin(th), np.full(n, a)])
    return DiscreteCurve(pts, parameter_kind, period)


def equator(n):
    return parallel(0.0, n, ARCLENGTH)


def graph_points(alpha, theta):
    """Points ``sqrt(1-alpha^2)(cos, sin, 0) + alpha e3`` of a graph curve."""
    alpha = np.asarray(alpha, dtype=float)
    rho = np.sqrt(1.0 - alpha**2)
    return np.column_stack([rho * np.cos(theta), rho * np.sin(theta), alpha])


def graph_curve(alpha):
    """Curve of heights ``alpha`` on the uniform theta grid."""
    alpha = np.asarray(alpha, dtype=float)
    if np.any(alpha**2 >= 1.0):
        raise DomainError("graph heights must satisfy alpha^2 < 1")
    n = alpha.size
    theta = np.arange(n) * (2.0 * math.pi / n)
    return DiscreteCurve(graph_points(alpha, theta), ANGLE)


def _derivatives(curve):
    g = curve.points
    return g, pdiff1(g, curve.step), pdiff2(g, curve.step)


def speed(curve):
    """Discrete speed |gamma'| at each node."""
    return np.linalg.norm(pdiff1(curve.points, curve.step), axis=1)


def geodesic_curvature(curve):
    """Geodesic curvature ``gamma'' . (gamma x gamma') / |gamma'|^3`` per node."""
    g, g1, g2 = _derivatives(curve)
    v = np.linalg.norm(g1, axis=1)
    return np.einsum("ij,ij->i", g2, np.cross(g, g1)) / v**3


def curve_length(curve):
    return float(np.sum(speed(curve)) * curve.step)


def bending_energy(curve):
    """Quadrature of kappa^2 ds_gamma."""
    g, g1, g2 = _derivatives(curve)
    v = np.linalg.norm(g1, axis=1)
    kappa = np.einsum("ij,ij->i", g2, np.cross(g, g1)) / v**3
    return float(np.sum(kappa**2 * v) * curve.step)


@dataclass(frozen=True)
class CurveFrame:
    """Per-node frame: unit tangent, cone normal ``gamma x T``, kappa, height."""

    tangent: np.ndarray
    normal: np.ndarray
    kappa: np.ndarray
    height: np.ndarray


def frame(curve):
    g, g1, g2 = _derivatives(curve)
    v = np.linalg.norm(g1, axis=1)
    t = g1 / v[:, None]
    normal = np.cross(g, t)
    kappa = np.einsum("ij,ij->i", g2, np.cross(g, g1)) / v**3
    return CurveFrame(t, normal, kappa, g[:, 2].copy())


def curvature_relation_residual(curve):
    """Sup-norm of ``gamma'' + gamma - kappa N`` (meaningful for unit speed)."""
    g, g1, g2 = _derivatives(curve)
    fr = frame(curve)
    return float(np.max(np.linalg.norm(g2 + g - fr.kappa[:, None] * fr.normal, axis=1)))


def theta_speed(h, h_prime):
    """Rate of the cylindrical angle along a unit-speed curve of height ``h``.

    Returns the positive root of
    ``theta'^2 = (1 - h'^2 / (1 - h^2)) / (1 - h^2)``.
    """
    h = np.asarray(h, dtype=float)
    hp = np.asarray(h_prime, dtype=float)
    q = 1.0 - h**2
    if np.any(q <= 0.0) or np.any(hp**2 >= q):
        raise DomainError("theta_speed requires h^2 < 1 and h'^2 < 1 - h^2")
    out = np.sqrt((1.0 - hp**2 / q) / q)
    return float(out) if out.ndim == 0 else out


def project_tangent(curve, psi):
    """Remove the radial component of ``psi`` along the curve."""
    psi = np.asarray(psi, dtype=float)
    if psi.shape != curve.points.shape:
        raise ValueError(f"psi has shape {psi.shape}, expected {curve.points.shape}")
    g = curve.points
    return psi - np.einsum("ij,ij->i", psi, g)[:, None] * g


def perturb(curve, psi, delta):
    """Radially normalized perturbation ``(gamma + delta psi)/|gamma + delta psi|``."""
    q = curve.points + delta * np.asarray(psi, dtype=float)
    q = q / np.linalg.norm(q, axis=1)[:, None]
    return DiscreteCurve(q, curve.parameter_kind, curve.period)


def _arclength_fields(curve, psi):
    """Curve and variation fields differentiated in arclength of ``curve``."""
    step = curve.step
    g, g1, g2 = _derivatives(curve)
    v = np.linalg.norm(g1, axis=1)
    v1 = pdiff1(v, step)
    gs = g1 / v[:, None]
    normal = np.cross(g, gs)
    kappa = np.einsum("ij,ij->i", g2, np.cross(g, g1)) / v**3
    p1 = pdiff1(psi, step)
    p2 = pdiff2(psi, step)
    ps = p1 / v[:, None]
    pss = (p2 - p1 * (v1 / v)[:, None]) / (v**2)[:, None]
    return v, gs, normal, kappa, ps, pss


def first_variation(curve, psi, lam=0.0):
    """Directional derivative of ``F + lam * Length`` along ``psi``.

    ``psi`` is projected tangent to the sphere first.  The energy part is
    ``2 * int(kappa N.psi'' - 3/2 kappa^2 gamma'.psi' + kappa N.psi) ds`` and
    the length part ``int gamma'.psi' ds`` (derivatives in arclength).
    """
    psi = project_tangent(curve, psi)
    v, gs, normal, kappa, ps, pss = _arclength_fields(curve, psi)
    kn = kappa[:, None] * normal
    dens_f = 2.0 * (
        np.einsum("ij,ij->i", kn, pss)
        - 1.5 * kappa**2 * np.einsum("ij,ij->i", gs, ps)
        + np.einsum("ij,ij->i", kn, psi)
    )
    dens_l = np.einsum("ij,ij->i", gs, ps)
    return float(np.sum((dens_f + lam * dens_l) * v) * curve.step)


def euler_lagrange_form(curve, psi, lam):
    """``int(kappa N.psi'' - 3/2 kappa^2 gamma'.psi' + (1+lam) kappa N.psi) ds``.

    With this normalization ``lam`` is the multiplier appearing in
    ``kappa'' + (1 + lam + kappa^2/2) kappa = 0``; the form equals half the
    derivative of ``F - 2 lam Length``.
    """
    psi = project_tangent(curve, psi)
    v, gs, normal, kappa, ps, pss = _arclength_fields(curve, psi)
    kn = kappa[:, None] * normal
    dens = (
        np.einsum("ij,ij->i", kn, pss)
        - 1.5 * kappa**2 * np.einsum("ij,ij->i", gs, ps)
        + (1.0 + lam) * np.einsum("ij,ij->i", kn, psi)
    )
    return float(np.sum(dens * v) * curve.step)


# -- serialization -----------------------------------------------------------

def _fmt(x):
    return format(float(x), ".17g")


def to_csv(curve):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["param", "x", "y", "z"])
    for t, p in zip(curve.params, curve.points):
        w.writerow([_fmt(t), _fmt(p[0]), _fmt(p[1]), _fmt(p[2])])
    return buf.getvalue()


def from_csv(text, parameter_kind=ARCLENGTH, period=None):
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or [c.strip() for c in rows[0]] != ["param", "x", "y", "z"]:
        raise InvalidCurveError("CSV header must be param,x,y,z")
    data = np.array([[float(c) for c in r] for r in rows[1:] if r], dtype=float)
    if period is None:
        n = data.shape[0]
        period = data[1, 0] * n if n > 1 else 2.0 * math.pi
        # snap to 2*pi when the grid says so
        if abs(period - 2.0 * math.pi) < 1e-9:
            period = 2.0 * math.pi
    return DiscreteCurve(data[:, 1:], parameter_kind, period)


def to_json(curve):
    return json.dumps(
        {
            "parameter_kind": curve.parameter_kind,
            "n": curve.n,
            "period": curve.period,
            "points": curve.points.tolist(),
        }
    )


def from_json(text):
    rec = json.loads(text)
    pts = np.array(rec["points"], dtype=float)
    if pts.shape[0] != rec["n"]:
        raise InvalidCurveError("point count does not match n")
    return DiscreteCurve(pts, rec["parameter_kind"], rec.get("period", 2.0 * math.pi))
