import math

import numpy as np
import pytest

from casimirkit import boxes as B
from casimirkit import constants as const
from casimirkit.errors import TermBudgetExceeded

CUBE = B.BoxGeometry.cube(1000.0)


def _brute_force(box, em, d, kind, xmax=B.XMAX):
    """Plain triple loop over (n, l, p) with math.fsum."""
    start = 0 if em else 1
    terms = []
    nmax = int(xmax * max(box.sides) / (math.pi * d)) + 2
    for n in range(start, nmax):
        for l in range(start, nmax):
            for p in range(start, nmax):
                zeros = (n == 0) + (l == 0) + (p == 0)
                w = (2 if zeros == 0 else 1 if zeros == 1 else 0) if em else (1 if zeros == 0 else 0)
                if not w:
                    continue
                k = math.pi * math.sqrt((n / box.ax) ** 2 + (l / box.ay) ** 2 + (p / box.az) ** 2)
                if d * k > xmax:
                    continue
                if kind == "regulated":
                    terms.append(w * k * math.exp(-d * k))
                else:
                    terms.append(w * math.log1p(-math.exp(-d * k)))
    return math.fsum(terms)


@pytest.mark.parametrize("field", ["scalar", "em"])
def test_regulated_sum_matches_triple_loop(field):
    delta = 0.2 * CUBE.ax * const.NM / const.C
    d = const.C * delta / const.NM
    expected = 0.5 * const.HBARC_EV_NM * _brute_force(CUBE, field == "em", d, "regulated") * const.EV
    assert B.regulated_energy(CUBE, field, delta) == pytest.approx(expected, rel=1e-9)


@pytest.mark.parametrize("field", ["scalar", "em"])
def test_thermal_sum_matches_triple_loop(field):
    T = 300.0
    kt = const.K_B_EV * T
    d = const.HBARC_EV_NM / kt
    expected = kt * _brute_force(CUBE, field == "em", d, "thermal") * const.EV
    assert B.thermal_correction(CUBE, field, T) == pytest.approx(expected, rel=1e-9)


def test_counterterms_match_weyl_expansion():
    # EM: volume term doubled, no surface term, edge term with opposite sign and doubled
    delta = 1e-17
    s1, s2, s3 = B.counterterms(CUBE, "scalar", delta)
    e1, e2, e3 = B.counterterms(CUBE, "em", delta)
    assert (e1, e2, e3) == pytest.approx((2 * s1, 0.0, -2 * s3))
    d = const.C * delta
    hc = const.HBARC_J_M
    assert s1 == pytest.approx(3 * hc * (1e-6) ** 3 / (2 * math.pi**2 * d**4))
    assert s2 == pytest.approx(-hc * 3e-12 / (4 * math.pi * d**3))
    assert s3 == pytest.approx(hc * 3e-6 / (8 * math.pi * d**2))


def test_subtracted_sum_is_cutoff_independent():
    # after the counterterms the remainder only moves at O(delta)
    ladder = [B.cutoff_evaluation(CUBE, "em", d).subtracted for d in B.default_ladder(CUBE, 4)]
    diffs = np.abs(np.diff(ladder))
    assert np.all(diffs[1:] < 0.6 * diffs[:-1])


@pytest.mark.parametrize("field", ["scalar", "em"])
@pytest.mark.parametrize("sides", [(1000.0, 1000.0, 1000.0), (800.0, 1000.0, 1500.0)])
def test_ladder_and_images_agree(field, sides):
    box = B.BoxGeometry(*sides)
    ladder = B.renormalized_energy_T0(box, field)
    images = B.renormalized_energy_T0(box, field, method="images")
    assert ladder.value == pytest.approx(images.value, rel=1e-7)
    assert abs(ladder.value - images.value) < 10 * ladder.error + 1e-12 * abs(images.value)


def test_em_cube_energy():
    e = B.renormalized_energy_T0(CUBE, "em").value
    scale = const.HBARC_J_M / (CUBE.ax * const.NM)
    assert e / scale == pytest.approx(0.0916574, abs=2e-7)


def test_energy_scales_inversely_with_size():
    e1 = B.image_sum_energy(B.BoxGeometry(1.0, 2.0, 3.0), "em")
    e2 = B.image_sum_energy(B.BoxGeometry(10.0, 20.0, 30.0), "em")
    assert e1 == pytest.approx(10 * e2, rel=1e-12)


def test_term_budget():
    with pytest.raises(TermBudgetExceeded):
        B.regulated_energy(CUBE, "em", 1e-20, budget=10**6)


def test_subtraction_coefficients():
    a1, a2, a3 = B.subtraction_coefficients(CUBE, "scalar")
    assert a1 == pytest.approx(-1e-18 * math.pi**2 / 90)
    assert a2 == pytest.approx(const.ZETA3 / (4 * math.pi) * 3e-12)
    assert a3 == pytest.approx(-math.pi / 24 * 3e-6)
    e1, e2, e3 = B.subtraction_coefficients(CUBE, "em")
    assert (e1, e2, e3) == pytest.approx((2 * a1, 0.0, -2 * a3))


def test_volume_subtraction_is_blackbody():
    T = 500.0
    a1, _, _ = B.subtraction_coefficients(CUBE, "em")
    vol = CUBE.volume * const.NM**3
    term = a1 * (const.K_B * T) ** 4 / const.HBARC_J_M**3
    assert term == pytest.approx(B.blackbody_free_energy_density(T, "em") * vol)


def test_high_temperature_thermal_sum_is_dominated_by_subtractions():
    # at T >> T_eff the subtraction series carries the thermal sum; what is
    # left over grows only like k T, so its share falls roughly as T^-3
    box = B.BoxGeometry.cube(100.0)
    shares = []
    for T in (3e5, 6e5):
        f = B.physical_free_energy(box, "em", T, method="images")
        shares.append(abs(f.value / f.thermal))
    assert shares[0] < 1e-2
    assert shares[1] < shares[0] / 4


def test_face_force_ratio_em_cube():
    r = B.face_force(CUBE, "em", 0.0)
    scale = const.HBARC_J_M / (CUBE.ax * const.NM) ** 2
    # F = -dE/da_x of E = c/(abc)^(1/3) style scaling gives F = E/(3a) for a cube
    e = B.image_sum_energy(CUBE, "em")
    assert r.value == pytest.approx(e / (3 * CUBE.ax * const.NM), rel=1e-4)
    assert r.value / scale > 0


def test_force_methods_agree():
    box = B.BoxGeometry(900.0, 1000.0, 1200.0)
    a = B.face_force(box, "em", 300.0, axis="z")
    b = B.face_force(box, "em", 300.0, axis="z", method="images")
    assert a.value == pytest.approx(b.value, rel=1e-4)


@pytest.mark.parametrize("T", [0.0, 300.0])
def test_piston_definitions_agree(T):
    pb = B.PistonedBox(B.BoxGeometry(1000.0, 1000.0, 3000.0), 1000.0)
    phys = B.piston_force(pb, "em", T, method="images")
    naive = B.piston_force(pb, "em", T, definition="naive", method="images")
    assert phys.value == pytest.approx(naive.value, rel=1e-9, abs=1e-30)


def test_centred_piston_feels_no_force():
    pb = B.PistonedBox(B.BoxGeometry(1000.0, 1000.0, 2000.0), 1000.0)
    f = B.piston_force(pb, "em", 300.0, method="images")
    scale = const.HBARC_J_M / (1e-6) ** 2
    assert abs(f.value) < 1e-9 * scale


def test_piston_is_pulled_to_the_nearer_wall():
    pb = B.PistonedBox(B.BoxGeometry(1000.0, 1000.0, 4000.0), 500.0)
    assert B.piston_force(pb, "em", 0.0, method="images").value < 0


def test_flat_box_approaches_plates():
    box = B.BoxGeometry(100000.0, 100000.0, 1000.0)
    e = B.image_sum_energy(box, "em")
    area = box.ax * box.ay * const.NM**2
    per_area = B.plates_free_energy_ideal(box.az, 0.0)
    # plates energy plus the edge/perimeter corrections of relative size a/L
    assert e / area == pytest.approx(per_area, rel=5e-4)


def test_plates_free_energy_limits():
    a = 1000.0
    e0 = B.plates_free_energy_ideal(a, 0.0)
    assert e0 == pytest.approx(-math.pi**2 * const.HBARC_J_M / (720 * 1e-18))
    # low T: F = E0 [1 + 45 zeta3/pi^3 t^-3 - t^-4]
    T = 100.0
    t = const.effective_temperature(a) / T
    approx = e0 * (1 + 45 * const.ZETA3 / math.pi**3 / t**3 - 1 / t**4)
    assert B.plates_free_energy_ideal(a, T) == pytest.approx(approx, rel=1e-9)
    # high T: F -> -zeta(3) k T / (8 pi a^2)
    T = 1e5
    hi = -const.ZETA3 * const.K_B * T / (8 * math.pi * (a * const.NM) ** 2)
    assert B.plates_free_energy_ideal(a, T) == pytest.approx(hi, rel=1e-6)


def test_plates_pressure_expansion_and_numeric():
    a = 1000.0
    p = B.plates_pressure_ideal(a, 300.0, method="both")
    assert p.low_temperature
    assert p.numeric == pytest.approx(p.expansion, rel=1e-6)
    hot = B.plates_pressure_ideal(a, 5000.0)
    assert not hot.low_temperature and hot.value == hot.numeric


def test_geometry_validation():
    with pytest.raises(ValueError):
        B.BoxGeometry(1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        B.PistonedBox(B.BoxGeometry(1.0, 1.0, 2.0), 2.0)
    with pytest.raises(ValueError):
        B.physical_free_energy(CUBE, "em", -1.0)


def test_piston_force_equals_difference_of_face_forces():
    box = B.BoxGeometry(1000.0, 1000.0, 3000.0)
    pb = B.PistonedBox(box, 1200.0)
    s1, s2 = pb.sections()
    piston = B.piston_force(pb, "em", 300.0, method="images").value
    faces = B.face_force(s1, "em", 300.0, axis="z", method="images").value - B.face_force(
        s2, "em", 300.0, axis="z", method="images"
    ).value
    assert piston == pytest.approx(faces, rel=1e-6)


def test_subtracted_thermal_part_grows_about_linearly():
    Teff = const.effective_temperature(CUBE.ax)
    Ts = np.array([2.0, 5.0, 10.0]) * Teff
    rest = [B.thermal_correction(CUBE, "em", T) - B.subtraction_terms(CUBE, "em", T) for T in Ts]
    raw = [B.thermal_correction(CUBE, "em", T) for T in Ts]
    slope = np.diff(np.log(np.abs(rest))) / np.diff(np.log(Ts))
    raw_slope = np.diff(np.log(np.abs(raw))) / np.diff(np.log(Ts))
    # T log T at most: the local slope sinks towards 1, unlike the T^4 raw sum
    assert slope[-1] < slope[0] and slope[-1] < 1.5
    assert raw_slope[-1] > 3.0


def test_ladder_is_stable_when_the_start_is_halved():
    from casimirkit.numerics import extrapolate

    ref = B.renormalized_energy_T0(CUBE, "em")
    ladder = B.default_ladder(CUBE, 6)[1:]
    shifted = extrapolate([B.cutoff_evaluation(CUBE, "em", d).subtracted for d in ladder])
    assert abs(shifted.value - ref.value) <= 10 * (ref.error + shifted.error)


def test_counterterm_densities_are_geometry_independent():
    delta = 3e-18
    for box in (CUBE, B.BoxGeometry(300.0, 700.0, 2000.0)):
        i1, i2, i3 = B.counterterms(box, "scalar", delta)
        ref = B.counterterms(CUBE, "scalar", delta)
        assert i1 / box.volume == pytest.approx(ref[0] / CUBE.volume, rel=1e-15)
        assert i2 / box.face_sum == pytest.approx(ref[1] / CUBE.face_sum, rel=1e-15)
        assert i3 / box.edge_sum == pytest.approx(ref[2] / CUBE.edge_sum, rel=1e-15)
