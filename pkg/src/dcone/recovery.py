"""Sheet energies of conical fields and the recovery-sequence rate.

A field ``u`` on the unit disc is sampled on a polar grid whose radii are
uniform in ``t = log r``.  With ``u_r = u_t / r`` and ``u_rr = (u_tt - u_t) / r^2``
the Hessian norm in polar form is

    |D^2 u|^2 = |u_rr|^2 + 2 |u_rtheta / r - u_theta / r^2|^2
                + |u_thetatheta / r^2 + u_r / r|^2,

and ``dist^2(Du, O(2,3)) = (s1 - 1)^2 + (s2 - 1)^2`` from the singular values
of the 3x2 gradient ``[u_r, u_theta / r]``.  Area integrals use
``dA = r^2 dt dtheta``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidCurveError, ResolutionError
from .fd import diff1, diff2, pdiff1, pdiff2
from .sphere_curve import ARCLENGTH, bending_energy, speed

TWO_PI = 2.0 * math.pi
MIN_CORE_RINGS = 8
UNIT_SPEED_TOL = 1e-6


# -- radial profile ------------------------------------------------------------------

def _blend_coefficients():
    # quintic on [1/2, 1] matching s^2 at 1/2 and s at 1 up to second order
    rows, rhs = [], []
    for x, vals in ((0.5, (0.25, 1.0, 2.0)), (1.0, (1.0, 1.0, 0.0))):
        rows.append([x**k for k in range(6)])
        rows.append([k * x ** (k - 1) if k >= 1 else 0.0 for k in range(6)])
        rows.append([k * (k - 1) * x ** (k - 2) if k >= 2 else 0.0 for k in range(6)])
        rhs.extend(vals)
    return np.linalg.solve(np.array(rows), np.array(rhs))


class ProfileF:
    """Even C^2 profile: ``s^2`` on ``[0, 1/2]``, ``s`` on ``[1, inf)``, quintic between."""

    def __init__(self):
        self.coef = _blend_coefficients()
        self._p = np.polynomial.Polynomial(self.coef)
        self._p1 = self._p.deriv(1)
        self._p2 = self._p.deriv(2)

    def __call__(self, s, deriv=0):
        s = np.abs(np.asarray(s, dtype=float))
        out = np.empty_like(s)
        inner = s <= 0.5
        outer = s >= 1.0
        mid = ~(inner | outer)
        if deriv == 0:
            out[inner] = s[inner] ** 2
            out[outer] = s[outer]
            out[mid] = self._p(s[mid])
        elif deriv == 1:
            out[inner] = 2.0 * s[inner]
            out[outer] = 1.0
            out[mid] = self._p1(s[mid])
        elif deriv == 2:
            out[inner] = 2.0
            out[outer] = 0.0
            out[mid] = self._p2(s[mid])
        else:
            raise ValueError("deriv must be 0, 1 or 2")
        return out

    def bounds(self, n=200_001, s_max=4.0):
        """Sup over sampled ``s`` in ``(0, s_max]`` of the quantities the construction needs."""
        s = np.linspace(0.0, s_max, n)[1:]
        f, f1, f2 = self(s), self(s, 1), self(s, 2)
        return {
            "f2": float(np.max(np.abs(f2))),
            "f_over_s_prime": float(np.max(np.abs((s * f1 - f) / s**2))),
            "f1_over_s": float(np.max(np.abs(f1 / s))),
            "f_over_s2": float(np.max(np.abs(f / s**2))),
        }

    def continuity_jumps(self):
        """Mismatch of value, slope and curvature at the two junctions."""
        out = []
        for x in (0.5, 1.0):
            lo, hi = x * (1.0 - 1e-15), x * (1.0 + 1e-15)
            out.append(max(abs(float(self(hi, k)[()] - self(lo, k)[()])) for k in range(3)))
        return out


# -- fields on polar grids -------------------------------------------------------------

@dataclass
class SheetField:
    """Samples of ``u: B_1 -> R^3`` on a log-uniform polar grid.

    Attributes
    ----------
    values : ndarray, shape (n_r, n_theta, 3)
        ``u`` at ``(radii[i], angles[j])``; ``u(0) = 0`` is implied.
    radii : ndarray
        Increasing, ``radii[i] = r_min * exp(i * dt)`` with ``radii[-1] = 1``.
    angles : ndarray
        Uniform periodic grid on ``[0, 2 pi)``.
    """

    values: np.ndarray
    radii: np.ndarray
    angles: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.radii = np.asarray(self.radii, dtype=float)
        self.angles = np.asarray(self.angles, dtype=float)
        if self.values.shape != (self.radii.size, self.angles.size, 3):
            raise DomainError("values must have shape (n_r, n_theta, 3)")
        t = np.log(self.radii)
        dt = np.diff(t)
        if np.any(dt <= 0.0) or np.max(np.abs(dt - dt[0])) > 1e-9 * dt[0]:
            raise DomainError("radii must be geometric (uniform in log r)")
        if abs(self.radii[-1] - 1.0) > 1e-12:
            raise DomainError("outer radius must be 1")

    @property
    def dt(self):
        return float(math.log(self.radii[1] / self.radii[0]))

    @property
    def dtheta(self):
        return TWO_PI / self.angles.size

    def boundary_defect(self):
        """Max deviation of ``|u|`` from 1 on the outer ring."""
        return float(np.max(np.abs(np.linalg.norm(self.values[-1], axis=1) - 1.0)))


def log_radii(h, per_unit=48, core_depth=8.0):
    """Geometric radii from ``h * exp(-core_depth)`` to 1 with ``r = h`` on the grid."""
    if not 0.0 < h < 1.0:
        raise DomainError("h must lie in (0, 1)")
    L = -math.log(h)
    m = max(1, int(math.ceil(L * per_unit)))
    dt = L / m
    k = int(math.ceil(core_depth / dt))
    return np.exp(dt * np.arange(-(m + k), 1))


def cone_field(points, radii):
    """``u = r gamma(theta)`` for curve samples ``points`` of shape (n_theta, 3)."""
    pts = np.asarray(points, dtype=float)
    angles = np.arange(pts.shape[0]) * (TWO_PI / pts.shape[0])
    return SheetField(radii[:, None, None] * pts[None, :, :], radii, angles)


def recovery_field(points, h, profile=None, per_unit=48, core_depth=8.0):
    """``u^h = h f(r/h) gamma(theta)`` on a log-uniform grid resolving ``B_h``."""
    f = profile or ProfileF()
    radii = log_radii(h, per_unit, core_depth)
    pts = np.asarray(points, dtype=float)
    angles = np.arange(pts.shape[0]) * (TWO_PI / pts.shape[0])
    amp = h * f(radii / h)
    return SheetField(amp[:, None, None] * pts[None, :, :], radii, angles)


def _polar_jets(field):
    u = field.values
    r = field.radii[:, None, None]
    dt, dth = field.dt, field.dtheta
    u_t = diff1(u, dt, axis=0)
    u_tt = diff2(u, dt, axis=0)
    # periodic theta derivatives act on axis 0, so swap axes
    u_th = np.swapaxes(pdiff1(np.swapaxes(u, 0, 1), dth), 0, 1)
    u_thth = np.swapaxes(pdiff2(np.swapaxes(u, 0, 1), dth), 0, 1)
    u_tth = np.swapaxes(pdiff1(np.swapaxes(u_t, 0, 1), dth), 0, 1)
    u_r = u_t / r
    return {
        "u_r": u_r,
        "u_th_r": u_th / r,
        "rr": (u_tt - u_t) / r**2,
        "rth": (u_tth - u_th) / r**2,
        "thth": u_thth / r**2 + u_r / r,
    }


def hessian_density(field):
    """``|D^2 u|^2`` at every grid node."""
    j = _polar_jets(field)
    sq = lambda a: np.einsum("...k,...k->...", a, a)
    return sq(j["rr"]) + 2.0 * sq(j["rth"]) + sq(j["thth"])


def gradient_singular_values(field):
    """Singular values ``(s1, s2)`` of the 3x2 gradient at every node."""
    j = _polar_jets(field)
    a, b = j["u_r"], j["u_th_r"]
    g11 = np.einsum("...k,...k->...", a, a)
    g22 = np.einsum("...k,...k->...", b, b)
    g12 = np.einsum("...k,...k->...", a, b)
    mean = 0.5 * (g11 + g22)
    rad = np.sqrt(np.maximum(0.25 * (g11 - g22) ** 2 + g12**2, 0.0))
    return np.sqrt(mean + rad), np.sqrt(np.maximum(mean - rad, 0.0))


def stretching_density(field):
    s1, s2 = gradient_singular_values(field)
    return (s1 - 1.0) ** 2 + (s2 - 1.0) ** 2


def area_integral(field, density, r_lo=0.0, r_hi=1.0):
    """Trapezoid in ``t`` and rectangle rule in ``theta`` of ``density dA`` over ``r_lo <= r <= r_hi``."""
    r = field.radii
    sel = (r >= r_lo * (1.0 - 1e-12)) & (r <= r_hi * (1.0 + 1e-12))
    ring = density[sel].sum(axis=1) * field.dtheta * r[sel] ** 2
    if ring.size < 2:
        return 0.0
    return float(np.trapezoid(ring, dx=field.dt))


def _core_rings(field, h):
    return int(np.sum(field.radii < h * (1.0 - 1e-12)))


def energy_Eh(field, h):
    """Terms of ``E_h(u) = h^2 int |D^2 u|^2 + int dist^2(Du, O(2,3))``.

    Returns ``(bending, stretching, normalized)`` where ``bending`` already
    carries the ``h^2`` prefactor and
    ``normalized = (bending + stretching) / (h^2 |log h|)``.  The disc inside
    the innermost ring is omitted; for the recovery family it carries a
    relative share of order ``exp(-2 core_depth)``.
    """
    if not 0.0 < h < 1.0:
        raise DomainError("h must lie in (0, 1)")
    rings = _core_rings(field, h)
    if rings < MIN_CORE_RINGS:
        raise ResolutionError(f"only {rings} radial nodes below r = h (need {MIN_CORE_RINGS})")
    bending = h * h * area_integral(field, hessian_density(field))
    stretching = area_integral(field, stretching_density(field))
    return bending, stretching, (bending + stretching) / (h * h * abs(math.log(h)))


# -- limit energy --------------------------------------------------------------------------

def _check_curve(gamma):
    if gamma.parameter_kind != ARCLENGTH:
        raise InvalidCurveError("limit energy needs an arclength-parametrized curve")
    if abs(gamma.period - TWO_PI) > 1e-12:
        raise InvalidCurveError("limit energy needs period 2 pi")


def limit_density(gamma):
    """``|gamma'' + gamma|^2`` per node (4th-order periodic differences)."""
    g2 = pdiff2(gamma.points, gamma.step)
    return np.sum((g2 + gamma.points) ** 2, axis=1)


def annulus_limit_energy(gamma, per_unit=64):
    """``(1/log 2) int_{1/2 < r < 1} |D^2(r gamma)|^2`` by polar quadrature."""
    m = int(math.ceil(math.log(2.0) * per_unit))
    radii = np.exp(np.linspace(-math.log(2.0), 0.0, m + 1))
    field = cone_field(gamma.points, radii)
    return area_integral(field, hessian_density(field)) / math.log(2.0)


def energy_E0(gamma, check=True, require_unit_speed=True):
    """Limit energy ``int |gamma'' + gamma|^2 dtheta`` of the cone over ``gamma``.

    With ``check`` the value is compared against the annulus quadrature of
    ``|D^2(r gamma)|^2`` (1e-4 relative) and against ``bending_energy``
    (1e-6 relative; only meaningful at unit speed).  Raises
    :class:`InvalidCurveError` for non-unit-speed input unless
    ``require_unit_speed`` is False.
    """
    _check_curve(gamma)
    if require_unit_speed:
        dev = float(np.max(np.abs(speed(gamma) - 1.0)))
        if dev > UNIT_SPEED_TOL:
            raise InvalidCurveError(f"curve speed deviates from 1 by {dev:.2e}")
    value = float(np.sum(limit_density(gamma)) * gamma.step)
    if check:
        ann = annulus_limit_energy(gamma)
        if abs(ann - value) > 1e-4 * abs(value) + 1e-12:
            raise ResolutionError(f"annulus quadrature {ann!r} disagrees with {value!r}")
        if require_unit_speed:
            be = bending_energy(gamma)
            if abs(be - value) > 1e-6 * abs(value) + 1e-12:
                raise ResolutionError(f"bending energy {be!r} disagrees with {value!r}")
    return value


# -- recovery sequence -----------------------------------------------------------------------

@dataclass
class RecoveryRow:
    h: float
    normalized_energy: float
    bending: float
    stretching: float
    gap: float
    core_bending_const: float
    core_stretching_const: float
    sup_hess_h: float
    sup_grad: float

    def csv_row(self):
        return [self.h, self.normalized_energy, self.bending, self.stretching, self.gap]


@dataclass
class RecoveryResult:
    e0: float
    rows: list
    slope: float
    rate_a: float
    rate_residual: float
    checks: dict

    @property
    def passed(self):
        return all(self.checks.values())

    def to_csv(self):
        lines = ["h,normalized_energy,bending,stretching,gap"]
        for row in self.rows:
            lines.append(",".join(format(float(v), ".17g") for v in row.csv_row()))
        return "\n".join(lines) + "\n"

    def to_dict(self):
        return {
            "e0": self.e0,
            "slope": self.slope,
            "rate_a": self.rate_a,
            "rate_residual": self.rate_residual,
            "checks": self.checks,
            "passed": self.passed,
            "rows": [vars(r) for r in self.rows],
        }


def _row(points, h, e0, profile, per_unit, core_depth):
    field = recovery_field(points, h, profile, per_unit, core_depth)
    bending, stretching, normalized = energy_Eh(field, h)
    core_b = h * h * area_integral(field, hessian_density(field), r_hi=h) / h**2
    core_s = area_integral(field, stretching_density(field), r_hi=h) / h**2
    core = field.radii <= h * (1.0 + 1e-12)
    hess = np.sqrt(hessian_density(field)[core])
    s1, _ = gradient_singular_values(field)
    return RecoveryRow(
        h=h,
        normalized_energy=normalized,
        bending=bending,
        stretching=stretching,
        gap=normalized - e0,
        core_bending_const=core_b,
        core_stretching_const=core_s,
        sup_hess_h=float(h * hess.max()),
        sup_grad=float(s1[core].max()),
    )


def recovery_convergence(gamma, h_list, per_unit=48, core_depth=8.0, slope_tol=0.15,
                         margin=0.05, workers=1, require_unit_speed=True):
    """Evaluate ``Ebar_h(u^h)`` along ``h_list`` and fit the ``1/|log h|`` rate.

    The gap ``Ebar_h - Ebar_0`` is fitted as ``a / |log h|`` (least squares
    through the origin) and its log-log slope against ``1/|log h|`` is
    reported.  ``checks`` records the slope test, the bound
    ``gap <= (a + margin |a|) / |log h|``, the monotone trend in ``h`` and
    the stability of the core constants.
    """
    h_arr = np.asarray(h_list, dtype=float)
    if h_arr.size < 2 or np.any(np.diff(h_arr) >= 0.0):
        raise DomainError("h_list must be strictly decreasing with at least two entries")
    if np.any(h_arr <= 0.0) or np.any(h_arr > 0.1):
        raise DomainError("h values must lie in (0, 0.1]")
    e0 = energy_E0(gamma, check=require_unit_speed, require_unit_speed=require_unit_speed)
    profile = ProfileF()
    args = [(gamma.points, float(h), e0, profile, per_unit, core_depth) for h in h_arr]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_row, *zip(*args)))
    else:
        rows = [_row(*a) for a in args]
    rows.sort(key=lambda r: -r.h)
    x = 1.0 / np.abs(np.log(h_arr))
    gap = np.array([r.gap for r in rows])
    a = float(gap @ x / (x @ x))
    resid = float(np.max(np.abs(gap - a * x)))
    if np.all(gap > 0.0):
        slope = float(np.polyfit(np.log(x), np.log(gap), 1)[0])
    else:
        slope = float("nan")
    kb = np.array([r.core_bending_const for r in rows])
    ks = np.array([r.core_stretching_const for r in rows])
    checks = {
        "slope": bool(abs(slope - 1.0) <= slope_tol),
        "gap_bound": bool(np.all(gap <= (a + margin * abs(a)) * x + 1e-12)),
        "decreasing_in_h": bool(np.all(np.diff([r.normalized_energy for r in rows]) < 0.0)),
        "core_constants_stable": bool(
            np.ptp(kb) <= 1e-2 * max(np.max(np.abs(kb)), 1e-12)
            and np.ptp(ks) <= 1e-2 * max(np.max(np.abs(ks)), 1e-12)
        ),
    }
    return RecoveryResult(e0, rows, slope, a, resid, checks)
