"""Sampling checks of the collision-sphere characterisation of balls.

A compact set ``K`` is a Euclidean ball exactly when, for all boundary points
``x, y`` and every direction ``sigma``, at least one of the two antipodal
points ``(x+y)/2 +- |x-y| sigma / 2`` lies in ``K``.  The checker here is a
falsifier: a failing triple is a certificate, a pass is only evidence.

Shapes are membership oracles with analytic boundary and interior samplers
rather than meshes.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels
from .density import AnnulusDensity, BallDensity, ball_mass
from .errors import DegeneratePair, InvalidShape
from .fermi import sphere_area, subsphere_area
from .numerics import (
    DEFAULT_QUADRATURE,
    McConfig,
    check_dimension,
    integrate_1d,
    mean_and_error,
    orthonormal_complement,
    ordered_sum,
    run_blocks,
    sphere_rule,
)

DEFAULT_MC = McConfig(samples=10_000)
MAX_WITNESSES = 16
_SPOT_CHECKS = 64


def _unit_rows(z):
    return z / np.linalg.norm(z, axis=1)[:, None]


class Shape:
    """Membership oracle with boundary and interior samplers.

    Subclasses implement ``contains(points, slack)``, ``boundary_block`` and
    ``interior_block``; both samplers are pure functions of
    ``(key, start, count)``.
    """

    n: int
    diameter_bound: float
    name = "shape"

    def _spot_check(self):
        pts, normals = self.boundary_block(0x5EED, 0, _SPOT_CHECKS)
        delta = 1e-6 * self.diameter_bound
        if not np.all(self.contains(pts, 1e-12 * self.diameter_bound)):
            raise InvalidShape(f"{self.name}: boundary sampler left the set")
        if np.any(self.contains(pts + delta * normals, 0.0)):
            raise InvalidShape(f"{self.name}: outward normals point into the set")

    def boundary_sample(self, seed, index):
        """One boundary point (and its outward normal) for ``(seed, index)``."""
        pts, normals = self.boundary_block(McConfig(seed=seed).key("boundary"), index, 1)
        return pts[0], normals[0]

    def as_dict(self):
        return {"shape": self.name, "n": self.n}


@dataclass(eq=False)
class BallShape(Shape):
    radius: float
    n: int
    center: np.ndarray = None
    name = "ball"

    def __post_init__(self):
        check_dimension(self.n)
        if not self.radius > 0:
            raise InvalidShape("radius must be positive")
        self.center = np.zeros(self.n) if self.center is None else np.asarray(self.center, float)
        self.diameter_bound = 2.0 * self.radius
        self._spot_check()

    def contains(self, points, slack=0.0):
        d = np.linalg.norm(np.atleast_2d(points) - self.center, axis=1)
        return d <= self.radius + slack

    def boundary_block(self, key, start, count):
        u = _unit_rows(kernels.normal_block(key, start, count, self.n))
        return self.center + self.radius * u, u

    def interior_block(self, key, start, count):
        z = kernels.normal_block(key, start, count, self.n)
        s = kernels.uniform_block(key ^ 0xA5A5A5A5, start, count, 1)[:, 0]
        return self.center + _unit_rows(z) * (self.radius * s ** (1.0 / self.n))[:, None]


@dataclass(eq=False)
class AnnulusShape(Shape):
    """``eps <= |x| <= 1``."""

    eps: float
    n: int
    name = "annulus"

    def __post_init__(self):
        check_dimension(self.n)
        if not 0.0 < self.eps < 1.0:
            raise InvalidShape("annulus inner radius must lie in (0, 1)")
        self.diameter_bound = 2.0
        self._spot_check()

    def contains(self, points, slack=0.0):
        d = np.linalg.norm(np.atleast_2d(points), axis=1)
        return (d >= self.eps - slack) & (d <= 1.0 + slack)

    def boundary_block(self, key, start, count):
        z = kernels.normal_block(key, start, count, self.n)
        pick = kernels.uniform_block(key ^ 0x5A5A5A5A, start, count, 1)[:, 0]
        u = _unit_rows(z)
        # the two spheres are chosen in proportion to their areas
        inner = pick <= self.eps ** (self.n - 1) / (1.0 + self.eps ** (self.n - 1))
        r = np.where(inner, self.eps, 1.0)
        normals = np.where(inner[:, None], -u, u)
        return u * r[:, None], normals

    def interior_block(self, key, start, count):
        z = kernels.normal_block(key, start, count, self.n)
        s = kernels.uniform_block(key ^ 0xA5A5A5A5, start, count, 1)[:, 0]
        lo = self.eps ** self.n
        r = (lo + s * (1.0 - lo)) ** (1.0 / self.n)
        return _unit_rows(z) * r[:, None]

    def as_dict(self):
        return {"shape": self.name, "n": self.n, "eps": self.eps}


REULEAUX_VERTICES = np.array([[0.0, math.sqrt(3.0) / 2.0], [-0.5, 0.0], [0.5, 0.0]])


@dataclass(eq=False)
class ReuleauxShape(Shape):
    """Reuleaux triangle of width 1 on the vertices ``(0, sqrt3/2), (-1/2, 0), (1/2, 0)``.

    Each arc is centred at one vertex and joins the other two.
    """

    n: int = 2
    name = "reuleaux"

    def __post_init__(self):
        if self.n != 2:
            raise InvalidShape("the Reuleaux triangle is planar")
        self.diameter_bound = 1.0
        # arc k: centre vertex k, angles from vertex k to the two others
        self._arcs = []
        for k in range(3):
            c = REULEAUX_VERTICES[k]
            others = [REULEAUX_VERTICES[j] - c for j in range(3) if j != k]
            angles = sorted(math.atan2(p[1], p[0]) for p in others)
            if angles[1] - angles[0] > math.pi:
                angles = [angles[1], angles[0] + 2.0 * math.pi]
            self._arcs.append((c, angles[0]))
        self._spot_check()

    def contains(self, points, slack=0.0):
        p = np.atleast_2d(points)
        d = np.linalg.norm(p[:, None, :] - REULEAUX_VERTICES[None, :, :], axis=2)
        return np.all(d <= 1.0 + slack, axis=1)

    def boundary_block(self, key, start, count):
        # equal arcs of angle pi/3, so uniform in (arc, angle) is uniform in arc length
        u = kernels.uniform_block(key, start, count, 1)[:, 0] * 3.0
        arc = np.minimum(u.astype(np.int64), 2)
        frac = u - arc
        centres = np.array([a[0] for a in self._arcs])[arc]
        phi = np.array([a[1] for a in self._arcs])[arc] + frac * (math.pi / 3.0)
        normals = np.stack([np.cos(phi), np.sin(phi)], axis=1)
        return centres + normals, normals

    def interior_block(self, key, start, count):
        # rejection from the bounding box; each row uses its own counter range
        out = np.empty((count, 2))
        for i in range(count):
            j = 0
            while True:
                u = kernels.uniform_block(key, (start + i) * 64 + j, 1, 2)[0]
                p = np.array([u[0] - 0.5, u[1] + REULEAUX_VERTICES[0, 1] - 1.0])
                if self.contains(p)[0]:
                    out[i] = p
                    break
                j += 1
        return out


def make_shape(name, n=2, eps=0.5, radius=1.0):
    """Shape by name: ``ball``, ``reuleaux`` or ``annulus``."""
    if name == "ball":
        return BallShape(radius, n)
    if name == "reuleaux":
        return ReuleauxShape(n)
    if name == "annulus":
        return AnnulusShape(eps, n)
    raise InvalidShape(f"unknown shape {name!r}")


def as_shape(E):
    if isinstance(E, Shape):
        return E
    if isinstance(E, AnnulusDensity):
        return AnnulusShape(E.eps, E.n)
    if isinstance(E, BallDensity):
        return BallShape(E.R, E.n, E.center)
    raise InvalidShape(f"cannot treat {type(E).__name__} as a set")


# ------------------------------------------------------------- condition check

def collision_candidates(x, y, sigma):
    """The two antipodal points ``(x+y)/2 +- |x-y| sigma / 2`` (row-wise)."""
    x, y, sigma = (np.atleast_2d(np.asarray(a, dtype=np.float64)) for a in (x, y, sigma))
    mid = 0.5 * (x + y)
    half = 0.5 * np.linalg.norm(x - y, axis=1)[:, None] * sigma
    return mid + half, mid - half


@dataclass
class ConditionReport:
    """Outcome of :func:`check_antipodal_condition`; ``passed`` iff no witness was found."""

    pairs_tested: int
    failures: list = field(default_factory=list)
    failure_count: int = 0

    @property
    def passed(self):
        return self.failure_count == 0

    def as_dict(self):
        return {"pairs_tested": self.pairs_tested, "failure_count": self.failure_count,
                "pass": self.passed, "failures": self.failures}


def _witness(x, y, s, c1, c2):
    return {"x": x.tolist(), "y": y.tolist(), "sigma": s.tolist(),
            "candidate1": c1.tolist(), "candidate2": c2.tolist()}


def check_triples(K, x, y, sigma, membership_slack=None):
    """Test explicit ``(x, y, sigma)`` rows; returns the failing row indices."""
    slack = 1e-9 * K.diameter_bound if membership_slack is None else membership_slack
    c1, c2 = collision_candidates(x, y, sigma)
    bad = ~K.contains(c1, slack) & ~K.contains(c2, slack)
    return np.flatnonzero(bad), c1, c2


def check_antipodal_condition(K, mc=DEFAULT_MC, membership_slack=None, *, extra_triples=None):
    """Sample ``mc.samples`` triples ``(x, y, sigma)`` with ``x, y`` on the boundary.

    A triple fails when neither antipodal candidate lies within
    ``membership_slack`` (default ``1e-9 * diameter``) of ``K``.

    Args:
        extra_triples: optional ``(x, y, sigma)`` arrays tested before the
            random ones, e.g. a known witness.
    """
    slack = 1e-9 * K.diameter_bound if membership_slack is None else membership_slack
    report = ConditionReport(0)

    def record(x, y, s):
        idx, c1, c2 = check_triples(K, x, y, s, slack)
        report.pairs_tested += len(x)
        report.failure_count += len(idx)
        for i in idx:
            if len(report.failures) >= MAX_WITNESSES:
                break
            report.failures.append(_witness(x[i], y[i], s[i], c1[i], c2[i]))

    if extra_triples is not None:
        record(*(np.atleast_2d(np.asarray(a, float)) for a in extra_triples))
    kx, ky, ks = mc.key("boundary-x"), mc.key("boundary-y"), mc.key("sigma")
    n = K.n

    def block(start, count):
        x, _ = K.boundary_block(kx, start, count)
        y, _ = K.boundary_block(ky, start, count)
        s = _unit_rows(kernels.normal_block(ks, start, count, n))
        return x, y, s

    for x, y, s in run_blocks(block, mc.samples, mc.workers):
        record(x, y, s)
    return report


def reuleaux_witness():
    """A boundary pair at distance 1 on the symmetry axis and the direction across it.

    ``a`` is the top vertex, ``b`` the midpoint of the opposite arc and
    ``sigma`` is perpendicular to ``a - b``.  Both candidates are
    ``(+-1/2, (sqrt3 - 1)/2)``, outside the triangle.
    """
    a = REULEAUX_VERTICES[0].copy()
    b = a + np.array([0.0, -1.0])
    return a, b, np.array([1.0, 0.0])


def necessity_identity_residual(x, y, x0, sigma):
    """``| |m + h sigma - x0|^2 + |m - h sigma - x0|^2 - |x - x0|^2 - |y - x0|^2 |``.

    ``m = (x+y)/2`` and ``h = |x-y|/2``; the expression vanishes identically.
    Works row-wise on stacked inputs.
    """
    x, y, x0, sigma = (np.asarray(a, dtype=np.float64) for a in (x, y, x0, sigma))
    c1, c2 = collision_candidates(x, y, sigma)
    x, y, x0 = (np.atleast_2d(a) for a in (x, y, x0))
    lhs = np.sum((c1 - x0) ** 2, axis=1) + np.sum((c2 - x0) ** 2, axis=1)
    rhs = np.sum((x - x0) ** 2, axis=1) + np.sum((y - x0) ** 2, axis=1)
    out = np.abs(lhs - rhs)
    return float(out[0]) if out.shape == (1,) else out


# ------------------------------------------------------------- sphere fraction

def _fraction_hits(E, v, v_star, sig):
    c1, c2 = collision_candidates(np.broadcast_to(v, sig.shape), np.broadcast_to(v_star, sig.shape), sig)
    # same membership slack as the condition check, so boundary rounding is not a miss
    slack = 1e-9 * E.diameter_bound
    return E.contains(c1, slack) | E.contains(c2, slack)


def sphere_fraction(E, v, v_star, mc=DEFAULT_MC):
    """Fraction of directions ``sigma`` for which a collision candidate lies in ``E``.

    Returns:
        ``(fraction, std_error)``.

    Raises:
        DegeneratePair: if ``v == v_star``.
    """
    E = as_shape(E)
    v = np.asarray(v, dtype=np.float64)
    v_star = np.asarray(v_star, dtype=np.float64)
    if np.array_equal(v, v_star):
        raise DegeneratePair("the pair must consist of two distinct points")
    key = mc.key("fraction-sigma")

    def block(start, count):
        sig = _unit_rows(kernels.normal_block(key, start, count, E.n))
        hit = _fraction_hits(E, v, v_star, sig).astype(np.float64)
        return np.array([hit.sum()])

    hits = ordered_sum(run_blocks(block, mc.samples, mc.workers))[0]
    p = hits / mc.samples
    return p, math.sqrt(max(p * (1.0 - p), 0.0) / mc.samples)


@dataclass(frozen=True)
class LambdaEstimate:
    """Minimum sampled sphere fraction; biased downwards as an estimate of the infimum."""

    lambda_hat: float
    std_error: float
    pairs: int
    sigma_samples: int
    argmin: tuple

    def as_dict(self):
        return {"lambda_hat": self.lambda_hat, "std_error": self.std_error, "pairs": self.pairs,
                "sigma_samples": self.sigma_samples, "bias": "downward (minimum over pairs)",
                "argmin": [list(map(float, p)) for p in self.argmin]}


def lambda_estimate(E, mc=DEFAULT_MC, *, pairs=200):
    """Minimum over ``pairs`` interior pairs of :func:`sphere_fraction`.

    Every pair uses the same ``mc.samples`` directions.
    """
    E = as_shape(E)
    kv, kw = mc.key("lambda-v"), mc.key("lambda-w")
    v = E.interior_block(kv, 0, pairs)
    w = E.interior_block(kw, 0, pairs)
    best, best_err, arg = math.inf, 0.0, None
    for i in range(pairs):
        if np.array_equal(v[i], w[i]):
            continue
        p, err = sphere_fraction(E, v[i], w[i], mc)
        if p < best:
            best, best_err, arg = p, err, (v[i], w[i])
    return LambdaEstimate(best, best_err, pairs, mc.samples, arg)


def annulus_lambda_bound(eps, n, spec=DEFAULT_QUADRATURE):
    """``int_0^x (1-t^2)^{(n-3)/2} dt / int_0^1 (1-t^2)^{(n-3)/2} dt`` with ``x = (1-eps^2)/(1+eps^2)``.

    Evaluated in ``t = sin u``, which turns the integrand into the bounded
    ``cos^{n-2} u``.
    """
    n = check_dimension(n)
    if not 0.0 < eps < 1.0:
        raise InvalidShape("eps must lie in (0, 1)")
    x = (1.0 - eps * eps) / (1.0 + eps * eps)
    g = lambda u: np.cos(u) ** (n - 2)
    return integrate_1d(g, 0.0, math.asin(x), spec) / integrate_1d(g, 0.0, 0.5 * math.pi, spec)


# ------------------------------------------------------- change-of-variables

@dataclass(frozen=True)
class IdentityCheck:
    lhs: float
    lhs_error: float
    rhs: float
    rhs_error: float

    @property
    def combined_error(self):
        return math.hypot(self.lhs_error, self.rhs_error)

    def agrees(self, k=3.0):
        return abs(self.lhs - self.rhs) <= k * self.combined_error

    def as_dict(self):
        return {"lhs": self.lhs, "lhs_error": self.lhs_error, "rhs": self.rhs,
                "rhs_error": self.rhs_error, "agree": self.agrees()}


def _change_of_variables_rhs(F, v, rho_max, order):
    n = v.shape[0]
    omegas, w_omega = sphere_rule(n, order)
    tilde, w_tilde = sphere_rule(n - 1, order)
    th, w_th = np.polynomial.legendre.leggauss(order)
    th = 0.25 * math.pi * (th + 1.0)
    w_th = 0.25 * math.pi * w_th
    u, w_u = np.polynomial.legendre.leggauss(order)
    u = 0.5 * (u + 1.0)
    w_u = 0.5 * w_u
    # after rho = rho_max cos(theta) u the weight sin^{n-2} / cos^2 * rho^{n-1} is smooth
    T, U = np.meshgrid(th, u, indexing="ij")
    W = np.outer(w_th, w_u) * np.sin(T) ** (n - 2) * np.cos(T) ** (n - 2) * U ** (n - 1)
    T, U, W = T.ravel(), U.ravel(), W.ravel()
    rho = rho_max * np.cos(T) * U
    c = np.cos(2.0 * T)
    total = 0.0
    for om, wo in zip(omegas, w_omega):
        basis = orthonormal_complement(om)
        dirs = tilde @ basis
        vs = v - rho[:, None] * om
        for d, wd in zip(dirs, w_tilde):
            y = vs + (rho * np.tan(T))[:, None] * d
            total += wo * wd * float(np.dot(W, F(c, vs, y)))
    return 2.0 ** (n - 1) * rho_max ** n * total


def change_of_variables_check(F, v, spec=DEFAULT_QUADRATURE, mc=DEFAULT_MC, *, rho_max=1.0,
                           order=24):
    """Both sides of the change of variables
    ``int int F(<n,sigma>, v'_*, v_*) dv_* dsigma = 2^{n-1} int dv_* int_0^{pi/2}
    sin^{n-2}/cos^2 int_{S^{n-2}(n)} F(cos 2theta, v_*, v_* + |v - v_*| tan(theta) s) ds dtheta``.

    ``F(c, x, y)`` receives a vector of cosines and two ``(m, n)`` arrays and
    must vanish when ``|y - v| > rho_max``.  The left side is Monte Carlo with
    ``v_*`` uniform in that ball; the right side is a Gauss product rule in
    polar coordinates about ``v``, with error estimated against a rule of
    two thirds the order.
    """
    v = np.asarray(v, dtype=np.float64)
    n = check_dimension(v.shape[0])
    area = sphere_area(n)
    vol = area * rho_max ** n / n
    kn, ku = mc.key("cov-normal"), mc.key("cov-uniform")

    def block(start, count):
        z = kernels.normal_block(kn, start, count, 2 * n)
        s = kernels.uniform_block(ku, start, count, 1)[:, 0]
        rho = rho_max * s ** (1.0 / n)
        nvec = _unit_rows(z[:, :n])
        sig = _unit_rows(z[:, n:])
        vs = v - nvec * rho[:, None]
        mid = 0.5 * (v + vs)
        vsp = mid - 0.5 * rho[:, None] * sig
        val = vol * area * np.asarray(F(np.sum(nvec * sig, axis=1), vsp, vs), dtype=np.float64)
        return np.array([val.sum(), (val * val).sum()])

    sums = ordered_sum(run_blocks(block, mc.samples, mc.workers))
    lhs, lhs_err = mean_and_error(sums[0], sums[1], mc.samples)
    rhs = _change_of_variables_rhs(F, v, rho_max, order)
    rhs_lo = _change_of_variables_rhs(F, v, rho_max, max(4, (2 * order) // 3))
    return IdentityCheck(float(lhs), float(lhs_err), rhs, abs(rhs - rhs_lo))


def ball_average_inequality_check(f, v, r, spec=DEFAULT_QUADRATURE, mc=DEFAULT_MC):
    """Both sides of ``r^{-n} int_{B_r(v)} f >= int int sqrt(1 - <w,s>^2) / (2^{n+1} |S^{n-2}|)
    (f(v + r(w+s)/2) + f(v + r(w-s)/2)) ds dw``.

    The left side is a radial quadrature of shell integrals, the right side
    Monte Carlo over independent uniform ``w, s``.

    Returns:
        IdentityCheck with the quadrature side as ``lhs``.
    """
    v = np.asarray(v, dtype=np.float64)
    n = f.n
    r = float(r)
    if not r > 0:
        raise ValueError("r must be positive")
    lhs = ball_mass(f, v, r, spec) / r ** n
    area = sphere_area(n)
    const = area * area / (2.0 ** (n + 1) * subsphere_area(n))
    kw, ks = mc.key("ball-average-w"), mc.key("ball-average-s")

    def block(start, count):
        w = _unit_rows(kernels.normal_block(kw, start, count, n))
        s = _unit_rows(kernels.normal_block(ks, start, count, n))
        c = np.sum(w * s, axis=1)
        val = const * np.sqrt(np.maximum(1.0 - c * c, 0.0)) * (
            f(v + 0.5 * r * (w + s)) + f(v + 0.5 * r * (w - s)))
        return np.array([val.sum(), (val * val).sum()])

    sums = ordered_sum(run_blocks(block, mc.samples, mc.workers))
    rhs, rhs_err = mean_and_error(sums[0], sums[1], mc.samples)
    return IdentityCheck(float(lhs), abs(lhs) * spec.rel_tol, float(rhs), float(rhs_err))


check_condition_41 = check_antipodal_condition
lemma54_identity_check = change_of_variables_check
