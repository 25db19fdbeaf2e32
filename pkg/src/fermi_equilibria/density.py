"""Admissible velocity densities (0 <= f <= 1) and their radial functionals.

All density types here are radial about a stored centre, so the spherical
average about the barycentre is the radial profile itself and every moment
reduces to a one-dimensional quadrature in the radius.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import _pykernels as pk
from .errors import (
    DegenerateProfile,
    DimensionMismatch,
    InvalidDensity,
    NonConvergence,
    ZeroMass,
)
from .fermi import sphere_area, subsphere_area
from .numerics import (
    DEFAULT_QUADRATURE,
    bisect_monotone,
    check_dimension,
    integrate_1d,
    integrate_semi_infinite,
    sphere_integral,
)

# values at or below this count as exact 0 in y log y
ENTROPY_FLOOR = 1e-300


def _center(v0, n):
    if v0 is None:
        return np.zeros(n)
    c = np.asarray(v0, dtype=np.float64).reshape(-1)
    if c.shape != (n,):
        raise DimensionMismatch(f"centre has {c.shape[0]} components, expected {n}")
    return c


class RadialDensity:
    """Common behaviour of the radial density types.

    Subclasses provide ``kind``/``params`` for the sampling kernels,
    ``edges`` (radii where the profile is not smooth), ``support`` (compact
    support radius or ``None``), ``decay_rate`` for unbounded support and
    ``envelope_scale`` for Monte-Carlo importance sampling.
    """

    n: int
    center: np.ndarray
    kind: int
    edges: tuple = ()
    support = None
    decay_rate = 1.0

    def _kernel_arrays(self):
        return np.zeros(1), np.zeros(1)

    def kernel_spec(self):
        radii, values = self._kernel_arrays()
        return self.kind, np.asarray(self.params, dtype=np.float64), radii, values

    def profile_pair(self, r):
        kind, params, radii, values = self.kernel_spec()
        return pk.radial_value_complement(kind, params, radii, values, np.abs(r))

    def profile(self, r):
        return self.profile_pair(r)[0]

    def profile_complement(self, r):
        return self.profile_pair(r)[1]

    def radius_of(self, v):
        v = np.asarray(v, dtype=np.float64)
        if v.shape[-1] != self.n:
            raise DimensionMismatch(f"point has {v.shape[-1]} components, expected {self.n}")
        return np.sqrt(np.sum((v - self.center) ** 2, axis=-1))

    def __call__(self, v):
        return self.profile(self.radius_of(v))

    def complement(self, v):
        return self.profile_complement(self.radius_of(v))

    def translated(self, shift):
        raise NotImplementedError

    @property
    def envelope_scale(self):
        return float(self.support)


@dataclass(frozen=True, eq=False)
class FermiDiracDensity(RadialDensity):
    """``a e^{-b|v-v0|^2} / (1 + a e^{-b|v-v0|^2})``."""

    a: float
    b: float
    n: int
    v0: object = None
    center: np.ndarray = field(init=False, repr=False)
    kind = pk.KIND_FD

    def __post_init__(self):
        check_dimension(self.n)
        if not (self.a > 0 and self.b > 0 and math.isfinite(self.a) and math.isfinite(self.b)):
            raise InvalidDensity("Fermi-Dirac coefficients must be finite and positive")
        object.__setattr__(self, "center", _center(self.v0, self.n))

    @property
    def params(self):
        return (self.a, self.b)

    @property
    def edges(self):
        return (math.sqrt(math.log(self.a) / self.b),) if self.a > 1.0 else ()

    @property
    def decay_rate(self):
        return self.b

    @property
    def envelope_scale(self):
        return math.sqrt(max(1.0, math.log1p(self.a)) / self.b)

    def translated(self, shift):
        return FermiDiracDensity(self.a, self.b, self.n, self.center + shift)


@dataclass(frozen=True, eq=False)
class BallDensity(RadialDensity):
    """Indicator of the closed ball ``|v - v0| <= R``."""

    R: float
    n: int
    v0: object = None
    center: np.ndarray = field(init=False, repr=False)
    kind = pk.KIND_BALL

    def __post_init__(self):
        check_dimension(self.n)
        if not (self.R > 0 and math.isfinite(self.R)):
            raise InvalidDensity("ball radius must be finite and positive")
        object.__setattr__(self, "center", _center(self.v0, self.n))

    @property
    def params(self):
        return (self.R,)

    @property
    def edges(self):
        return (self.R,)

    @property
    def support(self):
        return self.R

    def translated(self, shift):
        return BallDensity(self.R, self.n, self.center + shift)


@dataclass(frozen=True, eq=False)
class AnnulusDensity(RadialDensity):
    """Indicator of ``eps <= |v| <= 1``."""

    eps: float
    n: int
    center: np.ndarray = field(init=False, repr=False)
    kind = pk.KIND_ANNULUS

    def __post_init__(self):
        check_dimension(self.n)
        if not 0.0 < self.eps < 1.0:
            raise InvalidDensity("annulus inner radius must lie in (0, 1)")
        object.__setattr__(self, "center", np.zeros(self.n))

    @property
    def params(self):
        return (self.eps, 1.0)

    @property
    def edges(self):
        return (self.eps, 1.0)

    @property
    def support(self):
        return 1.0


@dataclass(frozen=True, eq=False)
class RadialGridDensity(RadialDensity):
    """Piecewise-linear radial profile through ``(radii[i], values[i])``.

    The profile is constant below ``radii[0]`` and equal to ``values[-1] = 0``
    beyond ``radii[-1]``.
    """

    radii: object
    values: object
    n: int
    v0: object = None
    center: np.ndarray = field(init=False, repr=False)
    kind = pk.KIND_GRID
    params = (0.0,)

    def __post_init__(self):
        check_dimension(self.n)
        r = np.asarray(self.radii, dtype=np.float64).copy()
        f = np.asarray(self.values, dtype=np.float64).copy()
        if r.ndim != 1 or r.shape != f.shape or r.size < 2:
            raise InvalidDensity("radii and values must be 1-D arrays of equal length >= 2")
        if r[0] < 0 or np.any(np.diff(r) <= 0):
            raise InvalidDensity("radii must be non-negative and strictly increasing")
        if np.any(f < 0) or np.any(f > 1) or not np.all(np.isfinite(f)):
            raise InvalidDensity("values must lie in [0, 1]")
        if f[-1] != 0.0:
            raise InvalidDensity("the last value must be 0 (compact support)")
        r.flags.writeable = False
        f.flags.writeable = False
        object.__setattr__(self, "radii", r)
        object.__setattr__(self, "values", f)
        object.__setattr__(self, "center", _center(self.v0, self.n))

    def _kernel_arrays(self):
        return self.radii, self.values

    @property
    def edges(self):
        return tuple(float(x) for x in self.radii)

    @property
    def support(self):
        return float(self.radii[-1])

    def translated(self, shift):
        return RadialGridDensity(self.radii, self.values, self.n, self.center + shift)

    @classmethod
    def from_csv(cls, path, n, v0=None):
        """Load a two-column ``r,value`` CSV file; a header row is optional."""
        rows = []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or not "".join(row).strip():
                    continue
                try:
                    rows.append((float(row[0]), float(row[1])))
                except ValueError:
                    if rows:
                        raise InvalidDensity(f"non-numeric row {row!r} in {path}")
                    continue
        if not rows:
            raise InvalidDensity(f"{path} holds no data rows")
        r, f = zip(*rows)
        return cls(r, f, n, v0)


@dataclass(frozen=True)
class Moments:
    M0: float
    M2: float
    v0: np.ndarray
    n: int

    def __post_init__(self):
        check_dimension(self.n)
        if not (self.M0 > 0 and self.M2 > 0):
            raise ValueError("moments require M0 > 0 and M2 > 0")

    @property
    def ratio(self):
        """``M2 / M0^{(n+2)/n}``."""
        return self.M2 / self.M0 ** ((self.n + 2) / self.n)


@dataclass(frozen=True)
class MomentInequality:
    lhs: float
    rhs: float
    is_indicator_equality: bool


def evaluate(f, v):
    """Pointwise value ``f(v)``; raises DimensionMismatch for wrong-sized ``v``."""
    return f(v)


def radial_average(f, r, spec=DEFAULT_QUADRATURE):
    """Average of ``f`` over the sphere of radius ``r`` about its barycentre."""
    if isinstance(f, RadialDensity):
        return f.profile(r)
    n = f.n
    center = np.asarray(getattr(f, "center", np.zeros(n)))
    r = float(r)
    return sphere_integral(lambda s: f(center + r * s), n, spec) / sphere_area(n)


def radial_integral(f, integrand, spec=DEFAULT_QUADRATURE):
    """``int_0^inf integrand(r) dr`` over the support of a radial density."""
    if f.support is not None:
        return integrate_1d(integrand, 0.0, f.support, spec, f.edges)
    return integrate_semi_infinite(integrand, spec, f.decay_rate, f.edges)


def compute_moments(f, spec=DEFAULT_QUADRATURE):
    """Mass and centred second moment by radial quadrature.

    The barycentre of a radial density is its centre, so ``v0`` is the stored
    centre for every type.

    Raises:
        ZeroMass: if the density integrates to zero.
    """
    n = f.n
    area = sphere_area(n)
    m0 = area * radial_integral(f, lambda r: r ** (n - 1) * f.profile(r), spec)
    if not m0 > 0:
        raise ZeroMass("density has zero mass")
    m2 = area * radial_integral(f, lambda r: r ** (n + 1) * f.profile(r), spec)
    return Moments(m0, m2, f.center.copy(), n)


def entropy(f, spec=DEFAULT_QUADRATURE):
    """``S(f) = int -(1-f) log(1-f) - f log f dv``, zero on {0,1}-valued f."""
    n = f.n

    def xlogx(y):
        return np.where(y > ENTROPY_FLOOR, y * np.log(np.maximum(y, ENTROPY_FLOOR)), 0.0)

    def h(r):
        y, yc = f.profile_pair(r)
        return r ** (n - 1) * -(xlogx(yc) + xlogx(y))

    return max(sphere_area(n) * radial_integral(f, h, spec), 0.0)


def moment_inequality_check(phi, p, q, spec=DEFAULT_QUADRATURE, *, tol=1e-8,
                            support=None, points=(), decay_hint=1.0):
    """Both sides of ``(p int r^{p-1} phi)^{1/p} <= (q int r^{q-1} phi)^{1/q}``.

    ``phi`` is a radial profile with values in [0, 1].  Equality within the
    relative tolerance ``tol`` is flagged; it holds only for indicators of
    ``[0, R]``.

    Raises:
        DegenerateProfile: if the q-moment is zero or not finite.
    """
    if not 0 < p < q:
        raise ValueError("need 0 < p < q")

    def moment(k):
        g = lambda r: r ** (k - 1) * phi(r)
        if support is not None:
            return integrate_1d(g, 0.0, support, spec, points)
        return integrate_semi_infinite(g, spec, decay_hint, points)

    try:
        mq = moment(q)
    except NonConvergence as exc:
        raise DegenerateProfile(f"q-moment did not converge: {exc}") from exc
    if not (mq > 0 and math.isfinite(mq)):
        raise DegenerateProfile("q-moment must be positive and finite")
    lhs = (p * moment(p)) ** (1.0 / p)
    rhs = (q * mq) ** (1.0 / q)
    return MomentInequality(lhs, rhs, abs(rhs - lhs) <= tol * rhs)


def shell_integral(f, v, rho, spec=DEFAULT_QUADRATURE):
    """``int_{S^{n-1}} f(v + rho w) dw`` for a radial density ``f``.

    With ``d = |v - centre|`` this is the zonal integral
    ``|S^{n-2}| int_0^pi sin^{n-2}(phi) fbar(sqrt(d^2 + rho^2 + 2 d rho cos phi)) dphi``,
    split where the radius crosses one of the profile's edges.
    """
    n = f.n
    d = float(f.radius_of(np.asarray(v, dtype=np.float64)))
    rho = float(rho)
    if d == 0.0 or rho == 0.0:
        return sphere_area(n) * float(f.profile(np.hypot(d, rho)))
    points = []
    for e in f.edges:
        c = (e * e - d * d - rho * rho) / (2.0 * d * rho)
        if -1.0 < c < 1.0:
            points.append(math.acos(c))

    def g(phi):
        rad = np.sqrt(np.maximum(d * d + rho * rho + 2.0 * d * rho * np.cos(phi), 0.0))
        return np.sin(phi) ** (n - 2) * f.profile(rad)

    return subsphere_area(n) * integrate_1d(g, 0.0, math.pi, spec, points)


def ball_mass(f, v, r, spec=DEFAULT_QUADRATURE):
    """``int_{B_r(v)} f``, as a radial integral of shell integrals about ``v``."""
    n = f.n
    d = float(f.radius_of(np.asarray(v, dtype=np.float64)))
    points = [abs(e - d) for e in f.edges] + [e + d for e in f.edges]

    def g(rho):
        rho = np.atleast_1d(rho)
        return np.array([x ** (n - 1) * shell_integral(f, v, x, spec) for x in rho])

    return integrate_1d(g, 0.0, float(r), spec, [p for p in points if 0 < p < r])


def l1_distance(f, g, spec=DEFAULT_QUADRATURE):
    """``||f - g||_{L^1}`` for two radial densities sharing a centre."""
    if f.n != g.n:
        raise DimensionMismatch("densities live in different dimensions")
    if not np.allclose(f.center, g.center):
        raise ValueError("l1_distance needs densities radial about a common centre")
    n = f.n
    points = sorted(set(f.edges) | set(g.edges))
    integrand = lambda r: r ** (n - 1) * np.abs(f.profile(r) - g.profile(r))
    if f.support is not None and g.support is not None:
        val = integrate_1d(integrand, 0.0, max(f.support, g.support), spec, points)
    else:
        rate = min(f.decay_rate if f.support is None else math.inf,
                   g.decay_rate if g.support is None else math.inf)
        val = integrate_semi_infinite(integrand, spec, rate, points)
    return sphere_area(n) * val


def mass_radius(f, fraction=0.9999, spec=DEFAULT_QUADRATURE):
    """Radius about the centre that holds ``fraction`` of the mass.

    Compactly supported densities return their support radius.
    """
    if f.support is not None:
        return float(f.support)
    n = f.n
    total = compute_moments(f, spec).M0 / sphere_area(n)
    cumulative = lambda R: integrate_1d(lambda r: r ** (n - 1) * f.profile(r), 0.0, R, spec,
                                        [e for e in f.edges if e < R])
    return bisect_monotone(cumulative, fraction * total, (1e-3, 1.0), rel_width=1e-8)
