import math

import numpy as np
import pytest

from dcone.elastica import arclength_resample, unit_speed_curve
from dcone.errors import DomainError, InvalidCurveError, ResolutionError
from dcone.recovery import (
    ProfileF,
    SheetField,
    annulus_limit_energy,
    cone_field,
    energy_E0,
    energy_Eh,
    log_radii,
    recovery_convergence,
    recovery_field,
)
from dcone.selftest import random_sphere_curve
from dcone.sphere_curve import ARCLENGTH, DiscreteCurve, bending_energy, equator

TWO_PI = 2.0 * math.pi
H_LIST = [1e-2, 1e-3, 1e-4, 1e-5]


@pytest.fixture(scope="module")
def elastica_gamma(minimizer_005):
    curve, _ = minimizer_005
    return unit_speed_curve(curve, 512)


def test_profile_is_c2_with_bounded_quotients():
    f = ProfileF()
    assert max(f.continuity_jumps()) <= 1e-12
    s = np.array([0.25, 2.0])
    assert np.allclose(f(s), [0.0625, 2.0])
    assert np.allclose(f(-s), f(s))
    b = f.bounds()
    assert all(np.isfinite(v) and v < 10.0 for v in b.values())


def test_flat_disc_has_zero_energy():
    h = 1e-2
    field = cone_field(equator(512).points, log_radii(h))
    bending, stretching, _ = energy_Eh(field, h)
    # zero up to the theta-stencil error of differentiating cos and sin
    assert bending <= 1e-15 and stretching <= 1e-14


def test_cone_is_isometric_away_from_origin(elastica_gamma):
    h = 1e-2
    field = cone_field(elastica_gamma.points, log_radii(h))
    _, stretching, _ = energy_Eh(field, h)
    assert stretching <= 1e-8
    assert field.boundary_defect() <= 1e-10


def test_recovery_field_at_moderate_h(elastica_gamma):
    h = 1e-3
    e0 = energy_E0(elastica_gamma)
    field = recovery_field(elastica_gamma.points, h)
    assert field.boundary_defect() <= 1e-10
    _, _, normalized = energy_Eh(field, h)
    # the core terms are O(1/|log h|) with constants near 52
    assert 0.0 < normalized - e0 <= 60.0 / abs(math.log(h))


def test_unresolved_scale_raises():
    field = cone_field(equator(64).points, log_radii(1e-2, core_depth=0.05))
    with pytest.raises(ResolutionError):
        energy_Eh(field, 1e-2)


def test_sheet_field_rejects_bad_grids():
    with pytest.raises(DomainError):
        SheetField(np.zeros((3, 4, 3)), np.array([0.1, 0.5, 1.0]), np.arange(4.0))


def test_e0_equator_is_zero():
    assert energy_E0(equator(256)) <= 1e-12


def test_e0_equals_bending_for_elastica(elastica_gamma):
    e0 = energy_E0(elastica_gamma, check=False)
    assert abs(e0 - bending_energy(elastica_gamma)) <= 1e-6 * e0


def test_e0_self_convergence_cos2():
    # heights 0.1 cos(2 theta), constant speed relabeled to period 2 pi
    fine = 4096
    th = np.arange(fine) * (TWO_PI / fine)
    alpha = 0.1 * np.cos(2 * th)

    def value(n):
        c = arclength_resample(alpha, n)
        c = DiscreteCurve(c.points, ARCLENGTH, TWO_PI)
        return energy_E0(c, require_unit_speed=False)

    ref = 0.2847813067  # n = 2048 value, stable in its 10 digits under refinement
    assert abs(value(2048) - ref) <= 1e-9
    assert abs(value(512) - ref) <= 1e-6 * ref


def test_e0_rejects_non_unit_speed():
    c = random_sphere_curve(np.random.default_rng(5), 256)
    with pytest.raises(InvalidCurveError):
        energy_E0(c)


@pytest.mark.parametrize("seed", range(20))
def test_annulus_identity_random_curves(seed):
    c = random_sphere_curve(np.random.default_rng(100 + seed), 512)
    value = energy_E0(c, check=False, require_unit_speed=False)
    assert abs(annulus_limit_energy(c) - value) <= 1e-4 * value


def test_equator_recovery():
    res = recovery_convergence(equator(128), H_LIST)
    assert res.e0 <= 1e-12
    assert res.passed
    # all of the deviation comes from the core B_h
    for row in res.rows:
        core = (row.core_bending_const + row.core_stretching_const) / abs(math.log(row.h))
        # the remainder is the stencil error straddling the C^2 junction at r = h
        assert abs(row.gap - core) <= 1e-3 * row.gap


def test_elastica_recovery_rate(elastica_gamma):
    res = recovery_convergence(elastica_gamma, H_LIST)
    assert abs(res.slope - 1.0) <= 0.15
    assert res.checks["core_constants_stable"]
    sup_h = [r.sup_hess_h for r in res.rows]
    sup_g = [r.sup_grad for r in res.rows]
    assert np.ptp(sup_h) <= 1e-2 * max(sup_h) and np.ptp(sup_g) <= 1e-2 * max(sup_g)
    assert res.to_csv().splitlines()[0] == "h,normalized_energy,bending,stretching,gap"


def test_h_list_validation():
    with pytest.raises(DomainError):
        recovery_convergence(equator(64), [1e-3, 1e-2])
    with pytest.raises(DomainError):
        recovery_convergence(equator(64), [0.5, 1e-2])
