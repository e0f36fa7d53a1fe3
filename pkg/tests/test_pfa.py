import math
import warnings

import pytest

from casimirkit import constants as const
from casimirkit import pfa as P
from casimirkit.errors import ValidityWarning


@pytest.mark.parametrize("shape", ["sphere", "cylinder"])
@pytest.mark.parametrize("ratio", [1e2, 1e3, 1e4])
def test_surface_integral_matches_closed_forms(shape, ratio):
    a = 100.0
    g = P.CurvedGeometry(shape, a, ratio * a)
    u = P.pfa_energy(g, P.ideal_plate_energy)
    f = P.pfa_force(g, P.ideal_plate_pressure)
    assert u.value == pytest.approx(P.closed_form_energy(g), rel=1e-9)
    assert f.value == pytest.approx(P.closed_form_force(g), rel=1e-9)
    assert u.valid and not u.heuristic


def test_closed_forms():
    a, R = 200.0, 50000.0
    hc = const.HBARC_J_M
    am, Rm = a * const.NM, R * const.NM
    assert P.pfa_sphere_force(a, R) == pytest.approx(-math.pi**3 * hc * Rm / (360 * am**3))
    assert P.pfa_sphere_force(a, R) == pytest.approx(2 * math.pi * Rm * P.ideal_plate_energy(a))
    cyl = -math.pi**3 / (384 * math.sqrt(2)) * math.sqrt(R / a) * hc / am**3
    assert P.pfa_cylinder_force(a, R) == pytest.approx(cyl)
    # the force is -dU/da of the energy
    h = 1e-4 * a
    for U, F in ((P.pfa_sphere_energy, P.pfa_sphere_force), (P.pfa_cylinder_energy, P.pfa_cylinder_force)):
        dU = (U(a + h, R) - U(a - h, R)) / (2 * h * const.NM)
        assert -dU == pytest.approx(F(a, R), rel=1e-7)


def test_cap_profile_differs_at_order_a_over_r():
    devs = []
    for ratio in (1e2, 1e3):
        g = P.CurvedGeometry.sphere(100.0, ratio * 100.0)
        cap = P.pfa_energy(g, P.ideal_plate_energy, profile="cap").value
        devs.append(abs(cap / P.closed_form_energy(g) - 1))
    assert devs[0] < 0.05
    assert devs[1] == pytest.approx(devs[0] / 10, rel=0.1)


def test_cylinder_correction():
    assert P.CYLINDER_CORRECTION == pytest.approx(0.2886, abs=1e-4)
    assert P.pfa_relative_error_cylinder(100.0, 100000.0) == pytest.approx(2.886e-4, rel=1e-3)
    f = P.beyond_pfa_cylinder_force(100.0, 100000.0)
    assert f == pytest.approx(P.pfa_cylinder_force(100.0, 100000.0) * (1 - 2.886180679e-4))


def test_sphere_needs_explicit_theta():
    with pytest.raises(TypeError):
        P.beyond_pfa_sphere_force(100.0, 1e5)
    s = P.beyond_pfa_sphere_force(100.0, 1e5, "extrapolated")
    assert s.theta == 1.4 and "extrapolation" in s.provenance
    u = P.beyond_pfa_sphere_force(100.0, 1e5, 0.5)
    assert u.provenance == "user supplied"
    assert u.value == pytest.approx(P.pfa_sphere_force(100.0, 1e5) * (1 + 0.5e-3))
    with pytest.raises(ValueError):
        P.beyond_pfa_sphere_force(100.0, 1e5, "guess")


def test_validity_flag_and_warning():
    g = P.CurvedGeometry.sphere(100.0, 500.0)
    assert not g.valid
    with pytest.warns(ValidityWarning):
        r = P.pfa_energy(g, P.ideal_plate_energy)
    assert not r.valid
    with pytest.warns(ValidityWarning):
        P.beyond_pfa_cylinder_force(100.0, 500.0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        P.pfa_energy(P.CurvedGeometry.sphere(100.0, 1000.0), P.ideal_plate_energy)


def test_thermal_kernel_reduces_to_zero_temperature():
    g = P.CurvedGeometry.sphere(200.0, 1e5)
    cold = P.pfa_force(g, P.ideal_plate_thermal_pressure(1.0)).value
    assert cold == pytest.approx(P.closed_form_force(g), rel=1e-9)
    warm = P.pfa_energy(g, P.ideal_plate_free_energy(300.0), heuristic=True)
    assert warm.heuristic
    # thermal photons add to the ideal-metal attraction
    assert abs(warm.value) > abs(P.closed_form_energy(g))


def test_lifshitz_kernels_are_cached_and_weaker_than_ideal():
    from casimirkit.materials import au_preset

    energy, pressure = P.lifshitz_kernels(au_preset("gp"), 300.0)
    g = P.CurvedGeometry.sphere(300.0, 1e5)
    f = P.pfa_force(g, pressure, rtol=1e-7, heuristic=True)
    assert 0 < f.value / P.closed_form_force(g) < 1
    assert pressure.cache_info().hits + pressure.cache_info().misses > 0


def test_geometry_validation():
    with pytest.raises(ValueError):
        P.CurvedGeometry.sphere(0.0, 1.0)
    with pytest.raises(ValueError):
        P.CurvedGeometry("cone", 1.0, 1.0)
    with pytest.raises(ValueError):
        P.pfa_energy(P.CurvedGeometry.sphere(1.0, 100.0), P.ideal_plate_energy, profile="flat")


def test_forces_grow_as_the_gap_closes():
    gaps = [50.0, 100.0, 200.0, 400.0]
    for fn in (P.pfa_sphere_force, P.pfa_cylinder_force, P.beyond_pfa_cylinder_force):
        mags = [abs(fn(a, 1e5)) for a in gaps]
        assert all(x > y for x, y in zip(mags, mags[1:]))


def test_sphere_theta_shifts():
    R = 1e4
    base = P.pfa_sphere_force(100.0, R)
    assert P.beyond_pfa_sphere_force(100.0, R, 0.0).value == base
    assert P.beyond_pfa_sphere_force(100.0, R, "extrapolated").value / base == pytest.approx(1.014)
    assert P.beyond_pfa_sphere_force(100.0, R, "experimental-bound").value / base == pytest.approx(1.01)
