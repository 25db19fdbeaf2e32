"""Binary collisions, the Pauli-blocked gain/loss functionals and entropy production.

The angular kernel is fixed to ``b(t) = 1 - t^2`` evaluated at
``t = |<n, sigma>|`` with ``n = (v - v_*)/|v - v_*|``.  Other kernels would
only need new sampling kernels; the classification does not depend on the
choice.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._backend import kernels as _active_kernels
from .density import RadialDensity, mass_radius, shell_integral
from .errors import DimensionMismatch, InfiniteDissipation
from .fermi import sphere_area, subsphere_area
from .numerics import (
    DEFAULT_QUADRATURE,
    McConfig,
    integrate_1d,
    mean_and_error,
    ordered_sum,
    run_blocks,
)

DEFAULT_MC = McConfig()
GAMMA_FLOOR = 1e-300
GAMMA_REL_GUARD = 1e-12
# sample radii for the equilibrium residual, as fractions of the envelope scale
RESIDUAL_RADII = (0.0, 0.3, 0.6, 0.9, 1.2, 1.5)


def kernel_b(t):
    """The angular kernel ``1 - t^2``."""
    t = np.asarray(t, dtype=np.float64)
    return 1.0 - t * t


def post_collision(v, v_star=None, sigma=None):
    """Post-collision velocities ``(v + v_*)/2 +- |v - v_*| sigma / 2``.

    Accepts a :class:`CollisionPair`, or single vectors or row-stacked
    arrays of shape ``(m, n)``.
    """
    if isinstance(v, CollisionPair):
        v, v_star, sigma = v.v, v.v_star, v.sigma
    v = np.asarray(v, dtype=np.float64)
    v_star = np.asarray(v_star, dtype=np.float64)
    sigma = np.asarray(sigma, dtype=np.float64)
    if not v.shape == v_star.shape == sigma.shape:
        raise DimensionMismatch("v, v_star and sigma must have the same shape")
    mid = 0.5 * (v + v_star)
    g = np.sqrt(np.sum((v - v_star) ** 2, axis=-1, keepdims=True))
    half = 0.5 * g * sigma
    return mid + half, mid - half


@dataclass(frozen=True)
class CollisionPair:
    v: np.ndarray
    v_star: np.ndarray
    sigma: np.ndarray

    @property
    def n(self):
        return np.asarray(self.v).shape[-1]

    def post(self):
        return post_collision(self.v, self.v_star, self.sigma)


def conservation_residuals(v, v_star, sigma):
    """Largest momentum and energy defects of the collision map over the rows."""
    vp, vsp = post_collision(v, v_star, sigma)
    v = np.asarray(v, dtype=np.float64)
    v_star = np.asarray(v_star, dtype=np.float64)
    mom = np.max(np.abs(vp + vsp - v - v_star))
    energy = np.max(np.abs(np.sum(vp * vp + vsp * vsp, axis=-1)
                           - np.sum(v * v + v_star * v_star, axis=-1)))
    return float(mom), float(energy)


def gamma_rate(a, b):
    """``(a - b) log(a/b)`` with ``Gamma(0, 0) = 0`` and ``+inf`` if exactly one is 0.

    Arguments below ``1e-300`` count as 0.
    """
    a = 0.0 if a < GAMMA_FLOOR else float(a)
    b = 0.0 if b < GAMMA_FLOOR else float(b)
    if a == 0.0 and b == 0.0:
        return 0.0
    if a == 0.0 or b == 0.0:
        return math.inf
    return (a - b) * math.log(a / b)


def lipschitz_constant(n):
    """``(2^{n+2} + 2) |S^{n-2}| int_0^{pi/2} sin^n``, with ``|S^0| = 2``."""
    area = subsphere_area(n)
    # int_0^{pi/2} sin^n via the Wallis ratio
    wallis = math.sqrt(math.pi) * math.gamma((n + 1) / 2.0) / (2.0 * math.gamma(n / 2.0 + 1.0))
    return (2.0 ** (n + 2) + 2.0) * area * wallis


@dataclass(frozen=True)
class CollisionTerms:
    """Monte-Carlo estimates at one velocity, each with its standard error."""

    gain: float
    gain_error: float
    loss: float
    loss_error: float
    residual: float
    residual_error: float
    f_value: float


def _velocity(f, v):
    v = np.ascontiguousarray(np.asarray(v, dtype=np.float64).reshape(-1))
    if v.shape[0] != f.n:
        raise DimensionMismatch(f"velocity has {v.shape[0]} components, expected {f.n}")
    return v


def collision_terms(f, v, mc=DEFAULT_MC, *, kernels=None):
    """Gain ``I_f(v)``, loss ``J_f(v)`` and ``f(v) J_f(v) - (1 - f(v)) I_f(v)``.

    ``v_*`` is importance-sampled from a Gaussian of width
    ``f.envelope_scale`` about the centre and ``sigma`` uniformly.  The
    random stream depends on ``mc.seed`` and the bytes of ``v`` only, so two
    densities evaluated at the same ``v`` share their samples.
    """
    k = kernels or _active_kernels
    v = _velocity(f, v)
    kind, params, radii, values = f.kernel_spec()
    fv, gv = (float(x) for x in f.profile_pair(f.radius_of(v)))
    key = mc.key("collision:" + v.tobytes().hex())
    center = np.ascontiguousarray(f.center, dtype=np.float64)
    area = sphere_area(f.n)
    scale = float(f.envelope_scale)

    def block(start, count):
        return k.collision_block(kind, params, radii, values, center, v, fv, gv, scale,
                                 area, key, start, count)

    sums = ordered_sum(run_blocks(block, mc.samples, mc.workers))
    gain, gain_err = mean_and_error(sums[0], sums[1], mc.samples)
    loss, loss_err = mean_and_error(sums[2], sums[3], mc.samples)
    res, res_err = mean_and_error(sums[4], sums[5], mc.samples)
    return CollisionTerms(gain, gain_err, loss, loss_err, res, res_err, fv)


def gain_functional_I(f, v, spec=DEFAULT_QUADRATURE, mc=DEFAULT_MC):
    """``I_f(v) = int int b f(v') f(v'_*) (1 - f(v_*)) dv_* dsigma`` (Monte Carlo).

    Use :func:`collision_terms` for the standard error.
    """
    return collision_terms(f, v, mc).gain


def loss_functional_J(f, v, spec=DEFAULT_QUADRATURE, mc=DEFAULT_MC):
    """``J_f(v) = int int b f(v_*) (1 - f(v')) (1 - f(v'_*)) dv_* dsigma`` (Monte Carlo)."""
    return collision_terms(f, v, mc).loss


def default_residual_points(f):
    """Velocities along the first axis at :data:`RESIDUAL_RADII` times the envelope scale."""
    scale = float(f.envelope_scale)
    pts = []
    for frac in RESIDUAL_RADII:
        p = f.center.copy()
        p[0] += frac * scale
        pts.append(p)
    return pts


@dataclass(frozen=True)
class ResidualReport:
    """Normalized equilibrium residual and its error budget.

    ``residual`` is ``max_v |f(v)(I+J) - I|`` divided by ``max_v (I+J)``;
    ``error`` is the matching normalized Monte-Carlo standard error plus the
    quadrature tolerance; ``bound = factor * error``.
    """

    residual: float
    mc_error: float
    quad_error: float
    factor: float
    per_point: tuple

    @property
    def error(self):
        return self.mc_error + self.quad_error

    @property
    def bound(self):
        return self.factor * self.error

    @property
    def passed(self):
        return self.residual <= self.bound

    def as_dict(self):
        return {"residual": self.residual, "std_error": self.mc_error,
                "quadrature_error": self.quad_error, "bound": self.bound, "pass": self.passed,
                "points": [dict(p) for p in self.per_point]}


def equilibrium_residual(f, v_samples=None, spec=DEFAULT_QUADRATURE, mc=DEFAULT_MC, *,
                         factor=5.0):
    """Residual of ``f(v)[I_f(v) + J_f(v)] = I_f(v)`` over the sample velocities.

    The per-sample integrand ``f(v) J - (1 - f(v)) I`` is estimated directly,
    so the cancellation happens sample by sample rather than between two
    noisy means.
    """
    if v_samples is None:
        v_samples = default_residual_points(f)
    terms = [collision_terms(f, v, mc) for v in v_samples]
    norm = max(t.gain + t.loss for t in terms)
    if not norm > 0:
        return ResidualReport(0.0, 0.0, spec.rel_tol, factor, ())
    worst = max(abs(t.residual) for t in terms) / norm
    err = max(t.residual_error for t in terms) / norm
    points = tuple(
        (("v", [float(x) for x in np.ravel(v)]), ("f", t.f_value), ("gain", t.gain),
         ("loss", t.loss), ("residual", t.residual), ("std_error", t.residual_error))
        for v, t in zip(v_samples, terms)
    )
    return ResidualReport(worst, err, spec.rel_tol, factor, points)


# ---------------------------------------------------------- angular reduction

def angular_reduction(psi, f, v, spec=DEFAULT_QUADRATURE, *, psi_support, psi_points=()):
    """Reduced form of ``int int b(|<n,sigma>|) Psi(|v - v_*|) f(v') dv_* dsigma``.

    With ``b(|cos 2 theta|) / cos^2 theta = 4 sin^2 theta`` the reduced
    integral becomes

        2^{n-1} |S^{n-2}| int_0^R rho^{n-1} S(rho) W(rho) drho,
        W(rho) = int_0^{pi/2} 4 sin^n(theta) Psi(rho / cos theta) dtheta,

    where ``S(rho)`` is the integral of ``f`` over the sphere of radius
    ``rho`` about ``v`` and ``R = psi_support`` (``Psi`` vanishes beyond it).
    Integrating ``theta`` innermost means every shell integral is computed
    once per radial node.

    Args:
        psi: vectorized nonnegative function on ``[0, inf)``.
        psi_support: radius beyond which ``psi`` is zero.
        psi_points: radii where ``psi`` is not smooth.
    """
    n = f.n
    v = _velocity(f, v)
    R = float(psi_support)
    psi_points = tuple(float(p) for p in psi_points if 0.0 < p < R)

    def weight(rho):
        if rho >= R:
            return 0.0
        upper = math.acos(rho / R) if rho > 0 else 0.5 * math.pi
        cuts = [math.acos(rho / p) for p in psi_points if p > rho]

        def g(th):
            c = np.cos(th)
            arg = np.where(c > 0, rho / np.maximum(c, 1e-300), np.inf)
            return 4.0 * np.sin(th) ** n * np.where(arg <= R, psi(np.minimum(arg, R)), 0.0)

        return integrate_1d(g, 0.0, upper, spec, [c for c in cuts if 0 < c < upper])

    d = float(f.radius_of(v))
    edge_pts = [abs(e - d) for e in f.edges] + [e + d for e in f.edges]
    pts = [p for p in edge_pts + list(psi_points) if 0 < p < R]

    def radial(rho):
        rho = np.atleast_1d(rho)
        return np.array([x ** (n - 1) * shell_integral(f, v, x, spec) * weight(x) for x in rho])

    return 2.0 ** (n - 1) * subsphere_area(n) * integrate_1d(radial, 0.0, R, spec, pts)


def angular_reduction_mc(psi, f, v, mc=DEFAULT_MC, *, psi_support, use_star=False):
    """Direct Monte-Carlo value of ``int int b Psi(|v - v_*|) f(v') dv_* dsigma``.

    ``v_*`` is uniform in the ball of radius ``psi_support`` about ``v``.
    With ``use_star`` the integrand takes ``f(v'_*)`` instead, which has the
    same value.

    Returns:
        ``(value, std_error)``.
    """
    n = f.n
    v = _velocity(f, v)
    R = float(psi_support)
    area = sphere_area(n)
    vol = area * R ** n / n
    k = _active_kernels
    kn, ku = mc.key("reduction-normal"), mc.key("reduction-uniform")

    def block(start, count):
        z = k.normal_block(kn, start, count, 2 * n)
        u = k.uniform_block(ku, start, count, 1)[:, 0]
        d = z[:, :n]
        rho = R * u ** (1.0 / n)
        vs = v - d * (rho / np.linalg.norm(d, axis=1))[:, None]
        sig = z[:, n:] / np.linalg.norm(z[:, n:], axis=1)[:, None]
        vp, vsp = post_collision(np.broadcast_to(v, vs.shape), vs, sig)
        c = np.sum((v - vs) * sig, axis=1) / np.maximum(rho, 1e-300)
        val = vol * area * kernel_b(c) * psi(rho) * f(vsp if use_star else vp)
        return np.array([val.sum(), (val * val).sum()])

    sums = ordered_sum(run_blocks(block, mc.samples, mc.workers))
    return mean_and_error(sums[0], sums[1], mc.samples)


# ---------------------------------------------------------------- dissipation

@dataclass(frozen=True)
class DissipationEstimate:
    """``value`` is ``inf`` whenever any sampled term was infinite."""

    value: float
    std_error: float
    infinite_hits: int
    samples: int
    radius: float

    def as_dict(self):
        return {"value": self.value, "std_error": self.std_error,
                "infinite_hits": self.infinite_hits, "samples": self.samples,
                "radius": self.radius}


def dissipation_estimate(f, mc=DEFAULT_MC, *, rel_guard=GAMMA_REL_GUARD, radius=None,
                         raise_on_infinite=False, kernels=None):
    """Monte-Carlo estimate of the entropy production ``D(f)``.

    ``D(f) = 1/4 int int int b Gamma(f' f'_* (1-f)(1-f_*), f f_* (1-f')(1-f'_*))``
    with ``v, v_*`` uniform in the ball holding 99.99% of the mass and
    ``sigma`` uniform.  Terms whose two arguments agree to ``rel_guard``
    relative are set to 0: their exact value is zero on an equilibrium and
    what remains is round-off.

    Raises:
        InfiniteDissipation: if ``raise_on_infinite`` and a sampled term was
            ``+inf``.
    """
    if not isinstance(f, RadialDensity):
        raise TypeError("dissipation_estimate needs a radial density")
    k = kernels or _active_kernels
    kind, params, radii, values = f.kernel_spec()
    R = float(radius) if radius is not None else mass_radius(f, 0.9999)
    center = np.ascontiguousarray(f.center, dtype=np.float64)
    area = sphere_area(f.n)
    kn, ku = mc.key("dissipation-normal"), mc.key("dissipation-uniform")

    def block(start, count):
        return k.dissipation_block(kind, params, radii, values, center, R, area, rel_guard,
                                   kn, ku, start, count)

    sums = ordered_sum(run_blocks(block, mc.samples, mc.workers))
    hits = int(sums[2])
    mean, err = mean_and_error(sums[0], sums[1], mc.samples)
    if hits:
        if raise_on_infinite:
            raise InfiniteDissipation(f"{hits} of {mc.samples} sampled terms were infinite")
        mean = math.inf
    return DissipationEstimate(float(mean), float(err), hits, mc.samples, R)
