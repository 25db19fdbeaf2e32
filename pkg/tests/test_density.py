import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fermi_equilibria.density import (
    AnnulusDensity,
    BallDensity,
    FermiDiracDensity,
    RadialGridDensity,
    ball_mass,
    compute_moments,
    entropy,
    evaluate,
    l1_distance,
    mass_radius,
    moment_inequality_check,
    radial_average,
    shell_integral,
)
from fermi_equilibria.errors import (
    DegenerateProfile,
    DimensionMismatch,
    InvalidDensity,
    ZeroMass,
)
from fermi_equilibria.fermi import sphere_area, threshold
from fermi_equilibria.numerics import sphere_integral


def test_fermi_dirac_values_and_complement():
    f = FermiDiracDensity(2.0, 0.5, 3)
    v = np.array([1.0, 0.0, 1.0])
    e = 2.0 * math.exp(-0.5 * 2.0)
    assert evaluate(f, v) == pytest.approx(e / (1 + e), rel=1e-15)
    assert f.complement(v) == pytest.approx(1 / (1 + e), rel=1e-15)
    # the complement keeps full precision far in the tail
    far = np.array([30.0, 0.0, 0.0])
    assert f(far) > 0 and f.complement(far) == 1.0


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        BallDensity(1.0, 3)(np.zeros(2))


def test_invalid_parameters():
    with pytest.raises(InvalidDensity):
        FermiDiracDensity(-1.0, 1.0, 2)
    with pytest.raises(InvalidDensity):
        BallDensity(0.0, 2)
    with pytest.raises(InvalidDensity):
        AnnulusDensity(1.5, 2)
    with pytest.raises(InvalidDensity):
        RadialGridDensity([0, 1], [0.5, 0.2], 2)
    with pytest.raises(InvalidDensity):
        RadialGridDensity([0, 1], [1.5, 0.0], 2)
    with pytest.raises(InvalidDensity):
        RadialGridDensity([1, 0], [0.5, 0.0], 2)


def test_fermi_dirac_moments_closed_form():
    # n = 2, a = b = 1: M0 = pi log 2, M2 = pi^3 / 12
    m = compute_moments(FermiDiracDensity(1.0, 1.0, 2))
    assert m.M0 == pytest.approx(math.pi * math.log(2), rel=1e-12)
    assert m.M2 == pytest.approx(math.pi ** 3 / 12, rel=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("R", [0.5, 1.0, 2.0])
def test_ball_moments_closed_form(n, R):
    m = compute_moments(BallDensity(R, n))
    assert m.M0 == pytest.approx(sphere_area(n) * R ** n / n, rel=1e-13)
    assert m.M2 == pytest.approx(sphere_area(n) * R ** (n + 2) / (n + 2), rel=1e-13)
    assert m.ratio == pytest.approx(threshold(n), rel=1e-12)


def test_zero_mass():
    with pytest.raises(ZeroMass):
        compute_moments(RadialGridDensity([0.0, 1.0], [0.0, 0.0], 2))


def test_entropy_values():
    assert entropy(BallDensity(1.0, 3)) == 0.0
    assert entropy(AnnulusDensity(0.5, 2)) == 0.0
    # n = 2, a = b = 1: S = pi^3 / 6
    assert entropy(FermiDiracDensity(1.0, 1.0, 2)) == pytest.approx(math.pi ** 3 / 6, rel=1e-10)
    assert entropy(FermiDiracDensity(1e6, 1.0, 2)) > 0


def test_grid_from_csv(tmp_path):
    path = tmp_path / "profile.csv"
    path.write_text("r,value\n0,1\n0.5,1\n1.0,0\n")
    f = RadialGridDensity.from_csv(path, 2)
    assert f(np.array([0.75, 0.0])) == pytest.approx(0.5)
    m = compute_moments(f)
    # cone profile: 2 pi [int_0^.5 r dr + int_.5^1 r (2 - 2r) dr]
    assert m.M0 == pytest.approx(2 * math.pi * (0.125 + (0.75 - 7 / 12)), rel=1e-12)


def test_grid_csv_without_header(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("0,0.5\n2,0\n")
    assert RadialGridDensity.from_csv(path, 3).support == 2.0


def test_grid_csv_bad_rows(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("r,value\n0,0.5\nfoo,bar\n")
    with pytest.raises(InvalidDensity):
        RadialGridDensity.from_csv(path, 2)


def test_translation_moves_centre_only():
    f = FermiDiracDensity(3.0, 2.0, 2)
    g = f.translated(np.array([1.0, -2.0]))
    m, mg = compute_moments(f), compute_moments(g)
    assert mg.M0 == m.M0 and mg.M2 == m.M2
    assert np.allclose(mg.v0, [1.0, -2.0])
    assert g(np.array([1.0, -2.0])) == f(np.zeros(2))


def test_radial_average_of_radial_density():
    f = FermiDiracDensity(1.0, 1.0, 3)
    assert radial_average(f, 0.7) == pytest.approx(float(f.profile(0.7)))


def test_moment_inequality_indicator_and_gaussian():
    ind = moment_inequality_check(lambda r: np.where(r <= 1.0, 1.0, 0.0), 1, 3,
                                  support=2.0, points=(1.0,))
    assert ind.is_indicator_equality
    assert ind.lhs == pytest.approx(1.0)
    gauss = moment_inequality_check(lambda r: np.exp(-r * r), 2, 4)
    assert not gauss.is_indicator_equality
    assert gauss.lhs < gauss.rhs
    with pytest.raises(DegenerateProfile):
        moment_inequality_check(lambda r: 0.0 * r, 1, 2, support=1.0)


@given(st.floats(min_value=0.1, max_value=3.0), st.floats(min_value=0.2, max_value=3.0))
def test_moment_inequality_property(p, gap):
    q = p + gap
    res = moment_inequality_check(lambda r: np.exp(-r * r) / (1 + r), p, q)
    assert res.lhs <= res.rhs * (1 + 1e-10)


def test_shell_integral_matches_sphere_integral():
    f = FermiDiracDensity(2.0, 1.0, 2)
    v = np.array([0.4, -0.3])
    rho = 0.8
    direct = sphere_integral(lambda s: f(v + rho * s), 2)
    assert shell_integral(f, v, rho) == pytest.approx(direct, rel=1e-9)


def test_ball_mass_inside_ball():
    f = BallDensity(1.0, 2)
    assert ball_mass(f, np.array([0.5, 0.0]), 0.3) == pytest.approx(0.09 * math.pi, rel=1e-9)


def test_l1_distance_of_balls():
    assert l1_distance(BallDensity(1.0, 2), BallDensity(0.5, 2)) == pytest.approx(
        0.75 * math.pi, rel=1e-12)


def test_mass_radius():
    f = FermiDiracDensity(1.0, 1.0, 2)
    r = mass_radius(f, 0.9999)
    m = compute_moments(f).M0
    inside = ball_mass(f, np.zeros(2), r)
    assert inside / m == pytest.approx(0.9999, rel=1e-7)
    assert mass_radius(BallDensity(2.0, 3)) == 2.0


def _random_grid(rng, n):
    k = rng.integers(3, 12)
    radii = np.sort(rng.uniform(0.0, 3.0, size=k))
    radii = np.unique(np.concatenate([[0.0], radii]))
    values = rng.uniform(0.0, 1.0, size=radii.size)
    values[-1] = 0.0
    return RadialGridDensity(radii, values, n)


@given(st.integers(min_value=0, max_value=10 ** 6), st.sampled_from([2, 3, 4]))
def test_grid_ratio_never_below_threshold(seed, n):
    f = _random_grid(np.random.default_rng(seed), n)
    try:
        m = compute_moments(f)
    except ZeroMass:
        return
    assert m.ratio >= threshold(n) * (1 - 1e-9)
