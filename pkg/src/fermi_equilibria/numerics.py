"""Dimension-generic quadrature, sphere sampling, seeded Monte Carlo and
monotone root finding.

Every Monte-Carlo routine in the package draws from a counter-based stream:
the ``i``-th sample is a pure function of ``(seed, stream name, i)``.  Sample
ranges are cut into fixed-size blocks that workers may process in any order;
block sums are combined in index order with :func:`math.fsum`, so the reported
numbers do not depend on the worker count.
"""

import heapq
import math
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_gegenbauer

from ._backend import kernels
from .errors import BracketFailure, InvalidDecayHint, InvalidDimension, NonConvergence

MASK64 = (1 << 64) - 1
BLOCK_SIZE = 1 << 15

# Gauss-Kronrod 7/15 abscissae and weights (positive half, centre last).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], [0.0], _XGK[-2::-1]])
_KWEIGHTS = np.concatenate([_WGK[:-1], [_WGK[-1]], _WGK[-2::-1]])
_GWEIGHTS = np.zeros(15)
_GWEIGHTS[[1, 3, 5, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[-2::-1]])
_GWEIGHTS[7] = _WG[-1]
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances for the adaptive quadrature routines."""

    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_subdivisions: int = 1000

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("abs_tol and rel_tol must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


DEFAULT_QUADRATURE = QuadratureSpec()


def _mix64(z):
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_key(seed, stream):
    """64-bit stream key for ``seed`` and a named or numbered sub-stream."""
    if isinstance(stream, str):
        stream = zlib.crc32(stream.encode())
    return _mix64(_mix64(seed) ^ ((stream * 0xD1B54A32D192ED03) & MASK64))


@dataclass(frozen=True)
class McConfig:
    """Reproducibility contract of a Monte-Carlo estimate.

    Equal ``(seed, samples)`` give bit-identical results for any ``workers``.
    """

    seed: int = 0
    samples: int = 100_000
    workers: int = 1

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def key(self, stream):
        return derive_key(self.seed, stream)

    def replace(self, **changes):
        fields = {"seed": self.seed, "samples": self.samples, "workers": self.workers}
        fields.update(changes)
        return McConfig(**fields)


def blocks(total, block_size=BLOCK_SIZE):
    """``(start, count)`` pairs covering ``range(total)`` in index order."""
    return [(s, min(block_size, total - s)) for s in range(0, total, block_size)]


def run_blocks(fn, total, workers=1):
    """Apply ``fn(start, count)`` to every block; results come back in index order."""
    parts = blocks(total)
    if workers <= 1 or len(parts) <= 1:
        return [fn(s, c) for s, c in parts]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda sc: fn(*sc), parts))


def ordered_sum(arrays):
    """Column-wise compensated sum of equally shaped block results."""
    stacked = np.asarray(arrays, dtype=np.float64)
    if stacked.ndim == 1:
        return math.fsum(stacked)
    return np.array([math.fsum(col) for col in stacked.T])


def mean_and_error(total, total_sq, count):
    """Sample mean and its standard error from running sums."""
    mean = total / count
    if count < 2:
        return mean, math.inf
    var = max(total_sq / count - mean * mean, 0.0) * count / (count - 1)
    return mean, math.sqrt(var / count)


# ---------------------------------------------------------------- quadrature

def _vectorize(f):
    """Wrap ``f`` so it maps float arrays to float arrays of the same shape."""
    def call(x):
        try:
            y = f(x)
        except (TypeError, ValueError):
            return np.array([float(f(float(xi))) for xi in x])
        y = np.asarray(y, dtype=np.float64)
        if y.shape != x.shape:
            y = np.broadcast_to(y, x.shape).astype(np.float64)
        return y
    return call


def _kronrod(fv, lo, hi):
    centre = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    x = centre[:, None] + half[:, None] * _NODES[None, :]
    y = fv(x.ravel()).reshape(x.shape)
    if not np.all(np.isfinite(y)):
        raise NonConvergence("integrand is not finite on the integration interval")
    k = half * (y @ _KWEIGHTS)
    g = half * (y @ _GWEIGHTS)
    resabs = np.abs(half) * (np.abs(y) @ _KWEIGHTS)
    return k, np.abs(k - g), resabs


def integrate_1d(f, a, b, spec=DEFAULT_QUADRATURE, points=()):
    """Adaptive Gauss-Kronrod (7/15) integral of ``f`` over ``[a, b]``.

    ``f`` is called with 1-D float arrays when it supports them and pointwise
    otherwise.  ``points`` are interior breakpoints (kinks, jumps) used for the
    initial partition.

    Raises:
        NonConvergence: if the subdivision budget runs out before the error
            estimate meets ``max(abs_tol, rel_tol * |result|)``.
    """
    a = float(a)
    b = float(b)
    if not a < b:
        if a == b:
            return 0.0
        raise ValueError("integrate_1d requires a < b")
    fv = _vectorize(f)
    edges = sorted({a, b, *(float(p) for p in points if a < p < b)})
    lo = np.array(edges[:-1])
    hi = np.array(edges[1:])
    k, err, resabs = _kronrod(fv, lo, hi)

    heap = []
    for i in range(len(lo)):
        heapq.heappush(heap, (-err[i], lo[i], hi[i], k[i], err[i], resabs[i]))
    subdivisions = len(heap)
    scale = max(abs(a), abs(b), 1.0)

    while True:
        total = math.fsum(item[3] for item in heap)
        # intervals whose error is at round-off level, or that can no longer be
        # split, cannot be improved; they do not count against the tolerance
        live = 0.0
        for _, l, h, _, e, ra in heap:
            if e > 50.0 * _EPS * ra and (h - l) > 1e-14 * scale:
                live += e
        if live <= max(spec.abs_tol, spec.rel_tol * abs(total)):
            return total
        if subdivisions >= spec.max_subdivisions:
            raise NonConvergence(
                f"integrate_1d: {subdivisions} subdivisions, error estimate {live:.3e}"
            )
        # split the worst improvable interval
        stash = []
        while heap:
            item = heapq.heappop(heap)
            _, l, h, _, e, ra = item
            if e > 50.0 * _EPS * ra and (h - l) > 1e-14 * scale:
                break
            stash.append(item)
        for item in stash:
            heapq.heappush(heap, item)
        m = 0.5 * (l + h)
        k2, e2, r2 = _kronrod(fv, np.array([l, m]), np.array([m, h]))
        heapq.heappush(heap, (-e2[0], l, m, k2[0], e2[0], r2[0]))
        heapq.heappush(heap, (-e2[1], m, h, k2[1], e2[1], r2[1]))
        subdivisions += 1


def integrate_semi_infinite(f, spec=DEFAULT_QUADRATURE, decay_hint=1.0, points=()):
    """Integral of ``f`` over ``[0, inf)`` for integrands with Gaussian decay.

    ``decay_hint`` is the rate ``c`` in the assumed bound ``exp(-c r**2)``; it
    fixes the truncation step ``L = sqrt(ln(1e16) / c)``.  The range
    ``[0, max(points) + L]`` is integrated first and then extended by steps of
    ``L`` until a step adds less than ``1e-16`` of the running estimate, which
    also covers integrands whose decay only sets in past a breakpoint.
    """
    if not decay_hint > 0:
        raise InvalidDecayHint(f"decay_hint must be positive, got {decay_hint}")
    step = math.sqrt(math.log(1e16) / decay_hint)
    start = max((float(p) for p in points), default=0.0)
    upper = start + step
    total = integrate_1d(f, 0.0, upper, spec, points)
    for _ in range(256):
        piece = integrate_1d(f, upper, upper + step, spec)
        total += piece
        upper += step
        if abs(piece) <= 1e-16 * abs(total):
            return total
    raise NonConvergence("integrate_semi_infinite: integrand does not decay")


# -------------------------------------------------------------------- spheres

def check_dimension(n):
    if int(n) != n or n < 2:
        raise InvalidDimension(f"dimension must be an integer >= 2, got {n}")
    return int(n)


def unit_sphere_area(n):
    """Area of the unit sphere in R^n, ``2 pi^(n/2) / Gamma(n/2)``.

    Defined for ``n >= 1``; ``n = 1`` gives the two-point sphere with
    counting measure 2.
    """
    if int(n) != n or n < 1:
        raise InvalidDimension(f"sphere dimension must be an integer >= 1, got {n}")
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def sphere_integral(g, n, spec=DEFAULT_QUADRATURE, *, zonal=False, mc=None):
    """Surface integral of ``g`` over the unit sphere in R^n.

    With ``zonal=True``, ``g`` is a function of ``t = <omega, sigma>`` for a
    fixed axis and the integral reduces to
    ``|S^{n-2}| * int_0^pi sin^(n-2)(theta) g(cos theta) dtheta``.
    Otherwise ``g`` receives unit vectors as rows of an ``(m, n)`` array:
    for ``n = 2`` the circle is integrated by quadrature in the angle, for
    ``n >= 3`` by Monte Carlo under ``mc``.
    """
    n = check_dimension(n)
    if zonal:
        gz = _vectorize(g)
        lower = unit_sphere_area(n - 1)
        return lower * integrate_1d(
            lambda th: np.sin(th) ** (n - 2) * gz(np.cos(th)), 0.0, math.pi, spec
        )
    if n == 2:
        def on_circle(phi):
            pts = np.stack([np.cos(phi), np.sin(phi)], axis=-1)
            return _eval_rows(g, pts)
        return integrate_1d(on_circle, 0.0, 2.0 * math.pi, spec)
    mc = mc or McConfig()
    area = unit_sphere_area(n)

    def block(start, count):
        sig = _sphere_block(n, mc.key("sphere"), start, count)
        vals = _eval_rows(g, sig)
        return np.array([vals.sum()])

    total = ordered_sum(run_blocks(block, mc.samples, mc.workers))[0]
    return area * total / mc.samples


def _eval_rows(g, pts):
    try:
        vals = np.asarray(g(pts), dtype=np.float64)
        if vals.shape != (pts.shape[0],):
            vals = np.broadcast_to(vals, (pts.shape[0],)).astype(np.float64)
    except (TypeError, ValueError):
        vals = np.array([float(g(p)) for p in pts])
    return vals


def _sphere_block(n, key, start, count):
    z = kernels.normal_block(key, start, count, n)
    return z / np.linalg.norm(z, axis=1)[:, None]


def sample_sphere(n, mc):
    """``mc.samples`` uniform directions on the unit sphere, shape ``(samples, n)``.

    Row ``i`` depends only on ``(mc.seed, i)``.
    """
    n = check_dimension(n)
    key = mc.key("sphere")
    parts = run_blocks(lambda s, c: _sphere_block(n, key, s, c), mc.samples, mc.workers)
    return np.concatenate(parts, axis=0)


def sphere_rule(n, order):
    """Product quadrature rule on the unit sphere in R^n.

    Returns ``(nodes, weights)`` with nodes of shape ``(m, n)`` and weights
    summing to the sphere area.  Polar angles use Gauss-Gegenbauer nodes of
    ``order`` points; the final circle uses ``2 * order`` equispaced angles.
    For ``n = 1`` the sphere is ``{-1, +1}`` with unit weights.
    """
    if n == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if n == 2:
        m = 2 * order
        phi = 2.0 * math.pi * (np.arange(m) + 0.5) / m
        return np.stack([np.cos(phi), np.sin(phi)], axis=1), np.full(m, 2.0 * math.pi / m)
    inner, w_inner = sphere_rule(n - 1, order)
    t, wt = roots_gegenbauer(order, (n - 2) / 2.0)
    s = np.sqrt(1.0 - t * t)
    nodes = np.concatenate(
        [np.repeat(t, len(inner))[:, None], (s[:, None, None] * inner[None, :, :]).reshape(-1, n - 1)],
        axis=1,
    )
    weights = (wt[:, None] * w_inner[None, :]).ravel()
    return nodes, weights


def orthonormal_complement(u):
    """Rows form an orthonormal basis of the hyperplane orthogonal to ``u``."""
    u = np.asarray(u, dtype=np.float64)
    _, _, vt = np.linalg.svd(u[None, :] / np.linalg.norm(u))
    return vt[1:]


# ------------------------------------------------------------- root finding

def bisect_monotone(g, target, bracket_seed=(1e-8, 1e8), *, domain=(0.0, math.inf),
                    rel_width=1e-12, max_expansion=2.0 ** 200):
    """Solve ``g(x) = target`` for strictly increasing ``g``.

    The seed bracket is expanded by doubling (geometrically towards 0 when the
    domain's lower end is 0) until ``g(lo) <= target <= g(hi)``, then bisected
    until the bracket's relative width is below ``rel_width``.

    Raises:
        BracketFailure: if the bracket grows by more than ``max_expansion``
            without enclosing ``target``.
    """
    lo, hi = (float(x) for x in bracket_seed)
    dlo, dhi = domain
    if not (dlo <= lo < hi <= dhi):
        raise ValueError("bracket seed must satisfy domain[0] <= lo < hi <= domain[1]")
    steps = int(round(math.log2(max_expansion)))

    glo = g(lo)
    for _ in range(steps + 1):
        if glo <= target:
            break
        lo = lo / 2.0 if (dlo == 0.0 and lo > 0.0) else max(lo - (hi - lo), dlo)
        glo = g(lo)
    else:
        raise BracketFailure(f"target {target!r} lies below the range reached near {lo!r}")
    ghi = g(hi)
    for _ in range(steps + 1):
        if ghi >= target:
            break
        hi = hi * 2.0 if hi > 0.0 else min(hi + (hi - lo), dhi)
        ghi = g(hi)
    else:
        raise BracketFailure(f"target {target!r} lies above the range reached near {hi!r}")
    if glo == target:
        return lo
    if ghi == target:
        return hi

    for _ in range(10_000):
        if hi - lo <= rel_width * max(abs(lo), abs(hi)) or hi - lo <= 1e-300:
            break
        if lo > 0.0 and hi > 4.0 * lo:
            mid = math.sqrt(lo * hi)
        else:
            mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        if g(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
