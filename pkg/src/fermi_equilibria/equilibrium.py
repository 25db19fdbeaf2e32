"""Classification of admissible densities into the two equilibrium regimes.

Given the mass ``M0`` and centred second moment ``M2`` of an admissible
density, the ratio ``M2 / M0^{(n+2)/n}`` is compared with the sharp lower
bound ``threshold(n)``.  Strictly above it the equilibrium is a Fermi-Dirac
distribution whose parameters are found by inverting the moment-ratio
function ``P``; at the bound it is the indicator of a ball.
"""

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .density import (
    BallDensity,
    FermiDiracDensity,
    Moments,
    compute_moments,
    entropy,
    l1_distance,
    mass_radius,
)
from .errors import InfeasibleMoments, InvalidMass
from .fermi import fermi_I, fermi_P, sphere_area, threshold
from .numerics import QuadratureSpec, bisect_monotone, check_dimension

REGIME_TOLERANCE = 1e-9
# inversion resolves a to 1e-7, so P is evaluated well below that
INVERSION_QUADRATURE = QuadratureSpec(abs_tol=1e-300, rel_tol=1e-13, max_subdivisions=4000)
VERIFY_NODES = 256


class Regime(enum.Enum):
    FERMI_DIRAC = "I"
    BALL = "II"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class Classification:
    """Outcome of :func:`classify`.

    ``a``/``b`` are set for Regime I, ``R`` for Regime II.  ``v0`` is the
    centre the moments were taken about.
    """

    regime: Regime
    ratio: float
    threshold: float
    n: int
    a: float = None
    b: float = None
    R: float = None
    v0: np.ndarray = field(default=None, repr=False)

    def equilibrium(self):
        """The equilibrium density this classification describes."""
        if self.regime is Regime.FERMI_DIRAC:
            return FermiDiracDensity(self.a, self.b, self.n, self.v0)
        if self.regime is Regime.BALL:
            return BallDensity(self.R, self.n, self.v0)
        raise InfeasibleMoments("infeasible moments have no equilibrium", self.ratio, self.threshold)

    def as_dict(self):
        out = {"regime": self.regime.value, "ratio": self.ratio, "threshold": self.threshold,
               "n": self.n}
        if self.regime is Regime.FERMI_DIRAC:
            out.update(a=self.a, b=self.b)
        elif self.regime is Regime.BALL:
            out["R"] = self.R
        return out


def _moments(m):
    if isinstance(m, Moments):
        return m
    raise TypeError("expected a Moments instance")


def classify(m, tol=REGIME_TOLERANCE, spec=INVERSION_QUADRATURE):
    """Classify moments by the ratio ``M2 / M0^{(n+2)/n}``.

    Args:
        m: Moments of the density.
        tol: relative tolerance on ``|ratio - threshold|`` for the ball case.
        spec: quadrature used when inverting for ``(a, b)``.

    Raises:
        InfeasibleMoments: ratio more than ``tol`` below the threshold, which
            no admissible density can produce.
    """
    m = _moments(m)
    n = m.n
    ratio = m.ratio
    c = threshold(n)
    if abs(ratio - c) <= tol * c:
        R = ball_from_mass(m.M0, n).R
        return Classification(Regime.BALL, ratio, c, n, R=R, v0=m.v0)
    if ratio < c:
        raise InfeasibleMoments(
            f"ratio {ratio!r} lies below the admissible bound {c!r}", ratio, c)
    a, b = invert_parameters(m, spec)
    return Classification(Regime.FERMI_DIRAC, ratio, c, n, a=a, b=b, v0=m.v0)


def invert_parameters(m, spec=INVERSION_QUADRATURE):
    """Fermi-Dirac ``(a, b)`` reproducing the given moments.

    Solves ``P(1/a) = |S^{n-1}|^{2/n} M2 / M0^{(n+2)/n}`` by bisection in
    ``t = 1/a`` (``P`` is strictly increasing), then
    ``b = (I_{n-1}(1/a) |S^{n-1}| / M0)^{2/n}``.

    Raises:
        InfeasibleMoments: ratio at or below the threshold.
        BracketFailure: ratio so close to the threshold that ``a`` would leave
            the representable range.
    """
    m = _moments(m)
    n = m.n
    c = threshold(n)
    ratio = m.ratio
    if not ratio > c:
        raise InfeasibleMoments(
            f"ratio {ratio!r} is not above the bound {c!r}; no Fermi-Dirac fit exists", ratio, c)
    area = sphere_area(n)
    target = area ** (2.0 / n) * ratio
    t = bisect_monotone(lambda x: fermi_P(x, n, spec), target, (1e-8, 1e8), rel_width=1e-14)
    b = (fermi_I(n - 1, t, spec) * area / m.M0) ** (2.0 / n)
    return 1.0 / t, b


def ball_from_mass(M0, n):
    """Ball about the origin of mass ``M0``: ``R = (n M0 / |S^{n-1}|)^{1/n}``."""
    n = check_dimension(n)
    if not (M0 > 0 and math.isfinite(M0)):
        raise InvalidMass(f"mass must be finite and positive, got {M0!r}")
    return BallDensity((n * M0 / sphere_area(n)) ** (1.0 / n), n)


def classify_density(f, tol=REGIME_TOLERANCE, spec=None):
    """Moments of ``f`` by quadrature, then :func:`classify`."""
    m = compute_moments(f) if spec is None else compute_moments(f, spec)
    return classify(m, tol)


@dataclass
class Leg:
    name: str
    value: float
    tolerance: float
    passed: bool

    def as_dict(self):
        return {"name": self.name, "value": self.value, "tolerance": self.tolerance,
                "pass": self.passed}


@dataclass
class VerificationReport:
    regime: Regime
    legs: list

    @property
    def passed(self):
        return all(leg.passed for leg in self.legs)

    def leg(self, name):
        for item in self.legs:
            if item.name == name:
                return item
        raise KeyError(name)

    def as_dict(self):
        return {"regime": self.regime.value, "pass": self.passed,
                "legs": [leg.as_dict() for leg in self.legs]}


def verify_classification(f, c, spec=INVERSION_QUADRATURE, *, form_tol=1e-6,
                          ratio_tol=REGIME_TOLERANCE):
    """Check the three equivalent characterisations for the regime of ``c``.

    Regime I: positive entropy, ratio strictly above the threshold, and
    ``max |f - F_{a,b}|`` over 256 radial nodes (spanning the radius holding
    99.99% of the mass) within ``form_tol``.

    Regime II: zero entropy, ratio at the threshold, and the mass of the
    symmetric difference with the ball, relative to ``M0``, within
    ``form_tol``.
    """
    if c.regime is Regime.INFEASIBLE:
        raise InfeasibleMoments("nothing to verify for infeasible moments", c.ratio, c.threshold)
    s = entropy(f, spec)
    ratio_gap = (c.ratio - c.threshold) / c.threshold
    eq = c.equilibrium()
    if c.regime is Regime.FERMI_DIRAC:
        legs = [
            Leg("entropy", s, 0.0, s > 0.0),
            Leg("moment_ratio", ratio_gap, ratio_tol, ratio_gap > ratio_tol),
        ]
        radius = max(mass_radius(f, 0.9999, spec), mass_radius(eq, 0.9999, spec))
        r = np.linspace(0.0, radius, VERIFY_NODES)
        resid = float(np.max(np.abs(f.profile(r) - eq.profile(r))))
        legs.append(Leg("functional_form", resid, form_tol, resid <= form_tol))
    else:
        m0 = compute_moments(f, spec).M0
        # the ball must share the density's centre for the comparison to mean anything
        ball = BallDensity(c.R, f.n, f.center)
        diff = l1_distance(f, ball, spec) / m0
        legs = [
            Leg("entropy", s, 1e-12, s <= 1e-12),
            Leg("moment_ratio", abs(ratio_gap), ratio_tol, abs(ratio_gap) <= ratio_tol),
            Leg("functional_form", diff, form_tol, diff <= form_tol),
        ]
    return VerificationReport(c.regime, legs)
