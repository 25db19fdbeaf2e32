"""Fermi-type integrals and the moment-ratio function.

With ``x = r**2 + ln t`` the integrands are written through the logistic
function, which keeps them finite for every ``t > 0``::

    I_s(t) = int_0^inf r^s / (1 + t e^{r^2}) dr
    J_s(t) = int_0^inf r^s e^{r^2} / (1 + t e^{r^2})^2 dr      (= -I_s'(t))
    K_s(rho) = int_0^inf u^{s/2} / (1 + e^{rho (u - 1)}) du
    P(t) = I_{n+1}(t) / I_{n-1}(t)^{(n+2)/n}
"""

import math

import numpy as np

from .errors import DomainError
from .numerics import (
    DEFAULT_QUADRATURE,
    check_dimension,
    integrate_semi_infinite,
    unit_sphere_area,
)

RICHARDSON_RHOS = (20.0, 40.0, 80.0)


def sphere_area(n):
    """``|S^{n-1}|``, the area of the unit sphere in R^n (``n >= 2``)."""
    return unit_sphere_area(check_dimension(n))


def subsphere_area(n):
    """``|S^{n-2}|`` for ``n >= 2``, with the two-point sphere counted as 2."""
    return unit_sphere_area(check_dimension(n) - 1)


def _check(s, t):
    if not s >= 0:
        raise DomainError(f"order s must be >= 0, got {s}")
    if not t > 0:
        raise DomainError(f"t must be > 0, got {t}")


def _fermi_edge(t):
    # radius where t e^{r^2} = 1; the integrands change from flat to decaying there
    return (math.sqrt(-math.log(t)),) if t < 1.0 else ()


def fermi_I(s, t, spec=DEFAULT_QUADRATURE):
    _check(s, t)
    lt = math.log(t)

    def integrand(r):
        return r ** s * np.exp(-np.logaddexp(0.0, r * r + lt))

    return integrate_semi_infinite(integrand, spec, 1.0, _fermi_edge(t))


def fermi_J(s, t, spec=DEFAULT_QUADRATURE):
    _check(s, t)
    lt = math.log(t)

    def integrand(r):
        e = np.exp(-np.abs(r * r + lt))
        return r ** s * e / ((1.0 + e) ** 2 * t)

    return integrate_semi_infinite(integrand, spec, 1.0, _fermi_edge(t))


def fermi_P(t, n, spec=DEFAULT_QUADRATURE):
    n = check_dimension(n)
    return fermi_I(n + 1, t, spec) / fermi_I(n - 1, t, spec) ** ((n + 2) / n)


def fermi_dP(t, n, spec=DEFAULT_QUADRATURE):
    """Derivative of ``P`` written through ``J``:
    ``(2t/n)^{-(n+2)/n} J_{n+1}^{-(n+2)/n - 1} (J_{n-1} J_{n+3} - J_{n+1}^2)``.
    """
    n = check_dimension(n)
    alpha = (n + 2) / n
    jm, j0, jp = (fermi_J(s, t, spec) for s in (n - 1, n + 1, n + 3))
    return (2.0 * t / n) ** (-alpha) * j0 ** (-alpha - 1.0) * (jm * jp - j0 * j0)


def ibp_residual(s, t, spec=DEFAULT_QUADRATURE):
    """Relative residual of ``I_s(t) = 2t/(s+1) * J_{s+2}(t)``."""
    i = fermi_I(s, t, spec)
    return abs(i - 2.0 * t / (s + 1.0) * fermi_J(s + 2, t, spec)) / i


def k_integral(s, rho, spec=DEFAULT_QUADRATURE):
    """``K_s(rho)``, evaluated in ``u = r^2`` so the tail decays like ``e^{-rho r^2}``."""
    if not s >= 0:
        raise DomainError(f"order s must be >= 0, got {s}")
    if not rho > 0:
        raise DomainError(f"rho must be > 0, got {rho}")

    def integrand(r):
        return 2.0 * r ** (s + 1) * np.exp(-np.logaddexp(0.0, rho * (r * r - 1.0)))

    return integrate_semi_infinite(integrand, spec, rho, (1.0,))


def p_limit_closed_form(n):
    """``lim_{t->0+} P(t) = n^{(n+2)/n} / (n + 2)``."""
    n = check_dimension(n)
    return n ** ((n + 2) / n) / (n + 2)


def threshold(n):
    """Lower bound ``n/(n+2) (n/|S^{n-1}|)^{2/n}`` of ``M2 / M0^{(n+2)/n}``."""
    n = check_dimension(n)
    return n / (n + 2) * (n / sphere_area(n)) ** (2.0 / n)


def p_small_t_limit(n, rhos=RICHARDSON_RHOS, spec=DEFAULT_QUADRATURE):
    """Extrapolate ``P(0+)`` from ``P(e^{-rho})`` at three doubling ``rho`` values.

    The approach to the limit is a series in ``rho**-2``, so two Richardson
    levels in ``h = rho**-2`` (ratio 4) remove the leading two terms.
    """
    n = check_dimension(n)
    r0, r1, r2 = rhos
    if not (math.isclose(r1, 2 * r0) and math.isclose(r2, 2 * r1)):
        raise ValueError("rhos must double: (rho, 2 rho, 4 rho)")
    p0, p1, p2 = (fermi_P(math.exp(-r), n, spec) for r in rhos)
    a = (4.0 * p1 - p0) / 3.0
    b = (4.0 * p2 - p1) / 3.0
    return (16.0 * b - a) / 15.0


def extrapolated_threshold(n, spec=DEFAULT_QUADRATURE):
    """``P(0+) / |S^{n-1}|^{2/n}`` from the extrapolated small-t limit."""
    return p_small_t_limit(n, spec=spec) / sphere_area(n) ** (2.0 / n)


def p_via_k(rho, n, spec=DEFAULT_QUADRATURE):
    """``P(e^{-rho}) = 2^{2/n} K_n(rho) / K_{n-2}(rho)^{(n+2)/n}``."""
    n = check_dimension(n)
    return 2.0 ** (2.0 / n) * k_integral(n, rho, spec) / k_integral(n - 2, rho, spec) ** ((n + 2) / n)
