"""Acceptance suite: one test per criterion, each recording a pass/fail line.

The lines are printed as each test finishes and again in the terminal summary
(see ``conftest.py``).
"""

import math

import numpy as np
import pytest

from fermi_equilibria.collision import (
    angular_reduction,
    angular_reduction_mc,
    collision_terms,
    conservation_residuals,
    dissipation_estimate,
    equilibrium_residual,
    lipschitz_constant,
)
from fermi_equilibria.density import (
    AnnulusDensity,
    BallDensity,
    FermiDiracDensity,
    RadialGridDensity,
    compute_moments,
    l1_distance,
)
from fermi_equilibria.equilibrium import Regime, classify, invert_parameters
from fermi_equilibria.fermi import (
    extrapolated_threshold,
    fermi_dP,
    fermi_I,
    fermi_J,
    fermi_P,
    sphere_area,
    threshold,
)
from fermi_equilibria.geometry import (
    AnnulusShape,
    BallShape,
    ReuleauxShape,
    annulus_lambda_bound,
    check_antipodal_condition,
    check_triples,
    lambda_estimate,
    change_of_variables_check,
    reuleaux_witness,
)
from fermi_equilibria.numerics import McConfig

RESULTS = {}


def record(num, ok, detail):
    RESULTS[num] = (bool(ok), detail)
    print(f"\ncriterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    return ok


def test_criterion_01_threshold_limit():
    worst = 0.0
    for n in range(2, 7):
        worst = max(worst, abs(extrapolated_threshold(n) / threshold(n) - 1.0))
    assert record(1, worst <= 1e-6, f"max rel. error of extrapolated P(0+) = {worst:.2e} (<= 1e-6)")


def test_criterion_02_monotonicity():
    t = np.logspace(-2, 2, 50)
    worst_step, worst_fd, worst_d = math.inf, math.inf, math.inf
    for n in range(2, 7):
        P = np.array([fermi_P(x, n) for x in t])
        worst_step = min(worst_step, float(np.min(np.diff(P))))
        h = 1e-4 * t
        fd = np.array([(fermi_P(x + d, n) - fermi_P(x - d, n)) / (2 * d) for x, d in zip(t, h)])
        worst_fd = min(worst_fd, float(fd.min()))
        worst_d = min(worst_d, min(fermi_dP(x, n) for x in t))
    ok = worst_step > 0 and worst_fd > 0 and worst_d > 0
    assert record(2, ok, f"min step {worst_step:.3e}, min finite-difference dP {worst_fd:.3e}, "
                         f"min closed-form dP {worst_d:.3e} (all > 0)")


def test_criterion_03_integration_by_parts():
    worst = 0.0
    for s in (1, 2, 3, 4, 5):
        for t in (0.1, 1.0, 10.0):
            i = fermi_I(s, t)
            worst = max(worst, abs(i - 2 * t / (s + 1) * fermi_J(s + 2, t)) / i)
    assert record(3, worst <= 1e-9, f"max rel. residual {worst:.2e} (<= 1e-9)")


def test_criterion_04_inversion_round_trip():
    worst = 0.0
    for n in (2, 3, 4):
        for a in (0.1, 1.0, 10.0):
            for b in (0.25, 1.0, 4.0):
                m = compute_moments(FermiDiracDensity(a, b, n))
                a2, b2 = invert_parameters(m)
                worst = max(worst, abs(a2 / a - 1), abs(b2 / b - 1))
    assert record(4, worst <= 1e-7, f"max rel. error in (a, b) over 27 cases {worst:.2e} (<= 1e-7)")


def test_criterion_05_ball_equality():
    w_exact, w_quad, w_R, regimes = 0.0, 0.0, 0.0, True
    for n in (2, 3, 4):
        c = threshold(n)
        area = sphere_area(n)
        for R in (0.5, 1.0, 2.0):
            M0, M2 = area * R ** n / n, area * R ** (n + 2) / (n + 2)
            w_exact = max(w_exact, abs(M2 / M0 ** ((n + 2) / n) / c - 1))
            m = compute_moments(BallDensity(R, n))
            w_quad = max(w_quad, abs(m.ratio / c - 1))
            cl = classify(m)
            regimes &= cl.regime is Regime.BALL
            if cl.regime is Regime.BALL:
                w_R = max(w_R, abs(cl.R / R - 1))
    ok = w_exact <= 1e-10 and w_quad <= 1e-8 and regimes and w_R <= 1e-10
    assert record(5, ok, f"closed form {w_exact:.1e} (<= 1e-10), quadrature {w_quad:.1e} "
                         f"(<= 1e-8), all Regime II: {regimes}, R error {w_R:.1e} (<= 1e-10)")


def _random_grid(rng, n):
    k = int(rng.integers(3, 30))
    radii = np.sort(rng.uniform(0.0, 3.0, k))
    radii[0] = 0.0
    radii = np.unique(radii)
    values = rng.uniform(0.0, 1.0, len(radii))
    values[-1] = 0.0
    return RadialGridDensity(radii, values, n)


def test_criterion_06_lower_bound():
    rng = np.random.default_rng(2024)
    worst = math.inf
    for n in (2, 3):
        for _ in range(20):
            m = compute_moments(_random_grid(rng, n))
            worst = min(worst, m.ratio - threshold(n))
    ann = math.inf
    for n in (2, 3):
        for eps in (0.1, 0.5, 0.9):
            ann = min(ann, compute_moments(AnnulusDensity(eps, n)).ratio - threshold(n))
    ok = worst >= -1e-9 and ann > 0
    assert record(6, ok, f"min(ratio - threshold) over 40 grids {worst:.3e} (>= -1e-9), "
                         f"annuli {ann:.3e} (> 0)")


def test_criterion_07_equilibrium_residual():
    mc = McConfig(seed=7, samples=1_000_000)
    fd = equilibrium_residual(FermiDiracDensity(1.0, 1.0, 2), mc=mc)
    ball = equilibrium_residual(BallDensity(1.0, 2), mc=mc)
    ann = equilibrium_residual(AnnulusDensity(0.5, 2), mc=mc)
    ok = fd.passed and ball.passed and ann.residual > 10 * ann.bound
    assert record(7, ok, f"FD {fd.residual:.2e} <= {fd.bound:.2e}, ball {ball.residual:.2e} <= "
                         f"{ball.bound:.2e}, annulus {ann.residual:.3f} > 10 x {ann.bound:.2e}")


def test_criterion_08_lipschitz():
    rng = np.random.default_rng(8)
    C = lipschitz_constant(2)
    mc = McConfig(seed=8, samples=20_000)
    radii = np.linspace(0.0, 2.5, 26)
    worst = 0.0
    for _ in range(10):
        fv = rng.uniform(0.0, 1.0, radii.size)
        gv = np.clip(fv + rng.normal(0.0, 0.2, radii.size), 0.0, 1.0)
        fv[-1] = gv[-1] = 0.0
        f, g = RadialGridDensity(radii, fv, 2), RadialGridDensity(radii, gv, 2)
        dist = l1_distance(f, g)
        for _ in range(20):
            r, phi = 2.0 * math.sqrt(rng.uniform()), rng.uniform(0, 2 * math.pi)
            v = np.array([r * math.cos(phi), r * math.sin(phi)])
            diff = abs(collision_terms(f, v, mc).gain - collision_terms(g, v, mc).gain)
            worst = max(worst, diff / (C * dist))
    assert record(8, worst <= 1.0, f"max |I_f - I_g| / (C ||f - g||_1) over 200 points "
                                   f"{worst:.3f} (<= 1), C = {C:.4f}")


def _step(R):
    return lambda r: np.where(np.asarray(r) <= R, 1.0, 0.0)


def _bump(R):
    return lambda r: np.where(np.asarray(r) < R, (1.0 - (np.asarray(r) / R) ** 2) ** 2, 0.0)


def test_criterion_09_angular_reduction():
    cases = [
        ("FD n=2 step", FermiDiracDensity(1.0, 1.0, 2), [0.4, 0.0], _step(0.7), 0.7),
        ("FD n=3 bump", FermiDiracDensity(2.0, 0.5, 3), [0.2, -0.1, 0.3], _bump(1.5), 1.5),
        ("ball n=2 bump", BallDensity(1.0, 2), [0.5, 0.5], _bump(1.0), 1.0),
        ("annulus n=2 step", AnnulusDensity(0.5, 2), [0.0, 0.0], _step(1.2), 1.2),
        ("grid n=3 step", RadialGridDensity([0, 0.5, 1.0, 1.5], [1.0, 0.8, 0.3, 0.0], 3),
         [0.3, 0.0, 0.0], _step(0.9), 0.9),
    ]
    mc = McConfig(seed=9, samples=400_000)
    worst, parts = 0.0, []
    for name, f, v, psi, R in cases:
        v = np.array(v, dtype=float)
        q = angular_reduction(psi, f, v, psi_support=R, psi_points=(R,))
        m, se = angular_reduction_mc(psi, f, v, mc, psi_support=R)
        err = math.hypot(se, abs(q) * 1e-10)
        worst = max(worst, abs(q - m) / err)
        parts.append(f"{name} {abs(q - m) / err:.2f}")
    F = lambda c, x, y: (np.where(np.sum(y * y, 1) < 1, 1 - np.sum(y * y, 1), 0.0)
                         * np.exp(-np.sum(x * x, 1)) * (1 + c * c))
    chk = change_of_variables_check(F, np.zeros(2), mc=McConfig(seed=9, samples=200_000))
    z = abs(chk.lhs - chk.rhs) / chk.combined_error
    ok = worst <= 3.0 and z <= 3.0
    assert record(9, ok, f"|quad - MC| / combined SE: {', '.join(parts)}; "
                         f"change of variables {z:.2f} (all <= 3)")


def test_criterion_10_geometry():
    mc = McConfig(seed=10, samples=10_000)
    balls = all(check_antipodal_condition(BallShape(1.0, n), mc).passed for n in (2, 3, 4))
    x, y, s = reuleaux_witness()
    witness = [list(check_triples(ReuleauxShape(), x, y, s)[0]) == [0] for _ in range(2)]
    lam_ok, mono, parts = True, True, []
    for n in (2, 3):
        hats = []
        for eps in (0.2, 0.5, 0.8):
            est = lambda_estimate(AnnulusShape(eps, n), McConfig(seed=1, samples=4096), pairs=200)
            bound = annulus_lambda_bound(eps, n)
            lam_ok &= est.lambda_hat >= bound - 3 * est.std_error
            hats.append(est.lambda_hat)
            parts.append(f"n={n} eps={eps} {est.lambda_hat:.4f}/{bound:.4f}")
        mono &= hats[0] > hats[1] > hats[2]
    ok = balls and all(witness) and lam_ok and mono
    assert record(10, ok, f"balls pass: {balls}, Reuleaux witness fails: {all(witness)}, "
                          f"lambda_hat/bound {'; '.join(parts)}, increasing as eps falls: {mono}")


def test_criterion_11_dissipation():
    mc = McConfig(seed=11, samples=1_000_000)
    fd = dissipation_estimate(FermiDiracDensity(1.0, 1.0, 2), mc)
    ball = dissipation_estimate(BallDensity(1.0, 2), mc)
    ann = dissipation_estimate(AnnulusDensity(0.5, 2), mc)
    zero = all(e.infinite_hits == 0 and abs(e.value) <= 3 * e.std_error for e in (fd, ball))
    flagged = ann.infinite_hits > 0 or ann.value > 3 * ann.std_error
    assert record(11, zero and flagged,
                  f"FD {fd.value:.2e} (SE {fd.std_error:.1e}), ball {ball.value:.2e} "
                  f"(SE {ball.std_error:.1e}), annulus {ann.value} with {ann.infinite_hits} "
                  f"infinite samples")


def test_criterion_12_conservation():
    rng = np.random.default_rng(12)
    worst = 0.0
    for n in (2, 3, 4):
        v, vs = rng.normal(size=(100_000, n)), rng.normal(size=(100_000, n))
        s = rng.normal(size=(100_000, n))
        s /= np.linalg.norm(s, axis=1)[:, None]
        worst = max(worst, *conservation_residuals(v, vs, s))
    assert record(12, worst <= 1e-12, f"max momentum/energy residual {worst:.2e} (<= 1e-12)")
