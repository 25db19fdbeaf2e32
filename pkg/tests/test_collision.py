import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from fermi_equilibria.collision import (
    CollisionPair,
    angular_reduction,
    angular_reduction_mc,
    collision_terms,
    conservation_residuals,
    dissipation_estimate,
    equilibrium_residual,
    gain_functional_I,
    gamma_rate,
    kernel_b,
    lipschitz_constant,
    loss_functional_J,
    post_collision,
)
from fermi_equilibria.density import (
    AnnulusDensity,
    BallDensity,
    FermiDiracDensity,
    RadialGridDensity,
    compute_moments,
)
from fermi_equilibria.errors import DimensionMismatch, InfiniteDissipation, InvalidDimension
from fermi_equilibria.numerics import McConfig

MC = McConfig(seed=3, samples=40_000)
ZERO = RadialGridDensity([0.0, 1.0], [0.0, 0.0], 2)


def test_post_collision_example():
    vp, vsp = post_collision([1.0, 0.0], [-1.0, 0.0], [0.0, 1.0])
    assert np.allclose(vp, [0.0, 1.0]) and np.allclose(vsp, [0.0, -1.0])


def test_post_collision_accepts_pair():
    pair = CollisionPair(np.array([1.0, 0.0]), np.array([-1.0, 0.0]), np.array([0.0, 1.0]))
    vp, vsp = post_collision(pair)
    assert np.allclose(vp, [0.0, 1.0]) and np.allclose(vsp, [0.0, -1.0])


def test_identity_collision():
    v, vs = np.array([0.3, 1.2, -0.4]), np.array([-1.0, 0.5, 2.0])
    sigma = (v - vs) / np.linalg.norm(v - vs)
    vp, vsp = CollisionPair(v, vs, sigma).post()
    assert np.allclose(vp, v, atol=1e-15) and np.allclose(vsp, vs, atol=1e-15)


def test_post_collision_shape_mismatch():
    with pytest.raises(DimensionMismatch):
        post_collision([1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0])


vectors = arrays(np.float64, 3, elements=st.floats(-10, 10))


@given(vectors, vectors, vectors.filter(lambda s: np.linalg.norm(s) > 1e-3))
def test_conservation_property(v, vs, s):
    s = s / np.linalg.norm(s)
    mom, energy = conservation_residuals(v, vs, s)
    assert mom <= 1e-12 * max(1.0, np.abs(v).max(), np.abs(vs).max())
    assert energy <= 1e-12 * max(1.0, v @ v + vs @ vs)


def test_kernel_identity():
    th = np.linspace(0, math.pi / 2, 11)
    assert np.allclose(kernel_b(np.abs(np.cos(2 * th))), np.sin(2 * th) ** 2, atol=1e-15)


def test_gamma_rate():
    assert gamma_rate(1.0, 1.0) == 0.0
    assert gamma_rate(2.0, 1.0) == pytest.approx(math.log(2.0), rel=1e-15)
    assert gamma_rate(1.0, 0.0) == math.inf
    assert gamma_rate(0.0, 3.0) == math.inf
    assert gamma_rate(0.0, 0.0) == 0.0
    assert gamma_rate(1e-301, 0.0) == 0.0


@given(st.floats(1e-6, 1e6), st.floats(1e-6, 1e6))
def test_gamma_nonnegative_symmetric(a, b):
    assert gamma_rate(a, b) >= 0.0
    assert gamma_rate(a, b) == pytest.approx(gamma_rate(b, a), rel=1e-12)


def test_lipschitz_constants():
    # (2^4 + 2) * |S^0| * pi/4 with |S^0| = 2
    assert lipschitz_constant(2) == pytest.approx(9 * math.pi, rel=1e-15)
    assert lipschitz_constant(3) == pytest.approx(34 * 2 * math.pi * 2 / 3, rel=1e-15)
    assert lipschitz_constant(3) == pytest.approx(142.42, abs=5e-3)
    with pytest.raises(InvalidDimension):
        lipschitz_constant(1)


def test_zero_density_functionals():
    v = np.array([0.2, 0.1])
    assert gain_functional_I(ZERO, v, mc=MC) == 0.0
    assert loss_functional_J(ZERO, v, mc=MC) == 0.0


def test_fermi_dirac_functionals_positive_and_bounded():
    f = FermiDiracDensity(1.0, 1.0, 2)
    bound = lipschitz_constant(2) * compute_moments(f).M0
    for r in (0.0, 0.5, 1.5, 3.0):
        t = collision_terms(f, np.array([r, 0.0]), MC)
        assert t.gain > 0 and t.loss > 0
        assert t.gain + 3 * t.gain_error <= bound or t.gain <= bound
        assert t.loss <= bound


def test_ball_loss_vanishes_inside():
    f = BallDensity(1.0, 2)
    t = collision_terms(f, np.zeros(2), MC)
    # some post-collision point stays inside the ball whenever v_* is inside
    assert t.loss == 0.0
    assert t.gain > 0.0
    assert t.residual == 0.0


def test_sigma_symmetry():
    f = FermiDiracDensity(2.0, 1.5, 2)
    psi = lambda r: np.exp(-r)
    v = np.array([0.3, -0.2])
    mc = McConfig(seed=9, samples=200_000)
    a, ea = angular_reduction_mc(psi, f, v, mc, psi_support=2.0)
    b, eb = angular_reduction_mc(psi, f, v, mc, psi_support=2.0, use_star=True)
    assert abs(a - b) <= 3 * math.hypot(ea, eb)


def test_angular_reduction_trivial_cases():
    psi = lambda r: np.where(r <= 0.5, 1.0, 0.0)
    assert angular_reduction(psi, ZERO, np.zeros(2), psi_support=0.5) == 0.0
    f = FermiDiracDensity(1.0, 1.0, 2)
    assert angular_reduction(lambda r: 0.0 * r, f, np.zeros(2), psi_support=1.0) == 0.0


@pytest.mark.parametrize("n", [2, 3])
def test_angular_reduction_matches_mc(n):
    f = FermiDiracDensity(1.0, 1.0, n)
    v = np.zeros(n)
    v[0] = 0.4
    psi = lambda r: np.where(r <= 0.7, 1.0, 0.0)
    quad = angular_reduction(psi, f, v, psi_support=0.7)
    mc, err = angular_reduction_mc(psi, f, v, McConfig(seed=1, samples=400_000), psi_support=0.7)
    assert abs(quad - mc) <= 3 * err


def test_equilibrium_residual_small_sample():
    mc = McConfig(seed=2, samples=50_000)
    fd = equilibrium_residual(FermiDiracDensity(1.0, 1.0, 2), mc=mc)
    ball = equilibrium_residual(BallDensity(1.0, 2), mc=mc)
    ann = equilibrium_residual(AnnulusDensity(0.5, 2), mc=mc)
    assert fd.passed and ball.passed
    assert ann.residual > 10 * ann.bound


def test_residual_explicit_points_and_zero_density():
    rep = equilibrium_residual(ZERO, [np.zeros(2)], mc=MC)
    assert rep.residual == 0.0 and rep.passed


def test_dissipation_cases():
    mc = McConfig(seed=4, samples=50_000)
    fd = dissipation_estimate(FermiDiracDensity(1.0, 1.0, 2), mc)
    assert abs(fd.value) <= 3 * fd.std_error and fd.infinite_hits == 0
    ball = dissipation_estimate(BallDensity(1.0, 2), mc)
    assert ball.value == 0.0 and ball.infinite_hits == 0
    ann = dissipation_estimate(AnnulusDensity(0.5, 2), mc)
    assert ann.infinite_hits > 0 and ann.value == math.inf
    with pytest.raises(InfiniteDissipation):
        dissipation_estimate(AnnulusDensity(0.5, 2), mc, raise_on_infinite=True)


def test_dissipation_infinite_for_compact_non_ball():
    # compact support that is not a ball scatters mass into the empty region
    r = np.linspace(0.0, 2.0, 21)
    f = RadialGridDensity(r, 0.5 * (1 - r / 2.0), 2)
    est = dissipation_estimate(f, McConfig(seed=1, samples=100_000))
    assert est.infinite_hits > 0 and est.value == math.inf


def test_worker_count_independence():
    f = FermiDiracDensity(1.0, 1.0, 2)
    mc = McConfig(seed=8, samples=100_000)
    a = collision_terms(f, np.array([0.5, 0.0]), mc)
    b = collision_terms(f, np.array([0.5, 0.0]), mc.replace(workers=4))
    assert a == b
    d1 = dissipation_estimate(AnnulusDensity(0.3, 2), mc)
    d2 = dissipation_estimate(AnnulusDensity(0.3, 2), mc.replace(workers=3))
    assert d1 == d2


def test_collision_terms_dimension_check():
    with pytest.raises(DimensionMismatch):
        collision_terms(FermiDiracDensity(1.0, 1.0, 2), np.zeros(3), MC)
