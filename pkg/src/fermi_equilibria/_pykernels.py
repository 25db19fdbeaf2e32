"""Pure numpy implementation of the hot Monte-Carlo kernels.

This module is the fallback used when the compiled ``_kernels`` extension is
unavailable.  Both implementations share one contract: the random stream is a
pure function of ``(key, counter)``, so a block of samples can be produced
anywhere in the index range without generating its predecessors.

Density kinds understood by the kernels (radial about ``center``):

    0  Fermi-Dirac     params = (a, b)
    1  ball indicator  params = (R,)
    2  annulus         params = (inner, outer)
    3  radial grid     params unused; ``radii``/``values`` hold the nodes
"""

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_TWO53 = 1.0 / 9007199254740992.0
_TWO_PI = 2.0 * np.pi

KIND_FD = 0
KIND_BALL = 1
KIND_ANNULUS = 2
KIND_GRID = 3


def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def uniform_block(key, start, count, width):
    """Uniform doubles in (0, 1], shape ``(count, width)``.

    Entry ``(i, j)`` depends only on ``key`` and the counter
    ``(start + i) * width + j``.
    """
    counters = np.arange(start * width, (start + count) * width, dtype=np.uint64)
    z = _mix(np.uint64(key) + (counters + np.uint64(1)) * GOLDEN)
    u = ((z >> np.uint64(11)).astype(np.float64) + 1.0) * _TWO53
    return u.reshape(count, width)


def normal_block(key, start, count, width):
    """Standard normals of shape ``(count, width)`` by Box-Muller pairs."""
    w2 = width + (width & 1)
    u = uniform_block(key, start, count, w2)
    r = np.sqrt(-2.0 * np.log(u[:, 0::2]))
    theta = _TWO_PI * u[:, 1::2]
    z = np.empty((count, w2))
    z[:, 0::2] = r * np.cos(theta)
    z[:, 1::2] = r * np.sin(theta)
    return z[:, :width]


def radial_value_complement(kind, params, radii, values, r):
    """Return ``(f, 1 - f)`` for a radial density at radii ``r``.

    The complement is computed directly rather than by subtraction so that
    products of complements keep full relative precision.
    """
    r = np.asarray(r, dtype=np.float64)
    if kind == KIND_FD:
        a, b = params[0], params[1]
        e = a * np.exp(-b * r * r)
        return e / (1.0 + e), 1.0 / (1.0 + e)
    if kind == KIND_BALL:
        inside = r <= params[0]
    elif kind == KIND_ANNULUS:
        inside = (r >= params[0]) & (r <= params[1])
    elif kind == KIND_GRID:
        f = np.interp(r, radii, values, right=values[-1])
        return f, 1.0 - f
    else:
        raise ValueError(f"unknown density kind {kind}")
    f = inside.astype(np.float64)
    return f, 1.0 - f


def _density(kind, params, radii, values, center, x):
    r = np.sqrt(np.sum((x - center) ** 2, axis=-1))
    return radial_value_complement(kind, params, radii, values, r)


def collision_block(kind, params, radii, values, center, v, fv, gv, scale,
                    sphere_area, key, start, count):
    """Fused gain/loss/residual sums over one block of samples.

    ``v_*`` is drawn from a Gaussian envelope of standard deviation ``scale``
    about ``center`` and ``sigma`` uniformly on the sphere.  ``fv``/``gv`` are
    ``f(v)`` and ``1 - f(v)``.

    Returns:
        float64 array ``[sum I, sum I^2, sum J, sum J^2, sum D, sum D^2]`` where
        per sample ``I``/``J`` are the weighted gain/loss integrands and
        ``D = f(v) J - (1 - f(v)) I``.
    """
    n = v.shape[0]
    z = normal_block(key, start, count, 2 * n)
    sig = z[:, :n]
    sig = sig / np.sqrt(np.sum(sig * sig, axis=1))[:, None]
    zs = z[:, n:]
    vs = center + scale * zs
    q = np.sum(zs * zs, axis=1)
    # |S^{n-1}| / envelope pdf
    w = sphere_area * (2.0 * np.pi * scale * scale) ** (0.5 * n) * np.exp(0.5 * q)

    rel = v - vs
    g = np.sqrt(np.sum(rel * rel, axis=1))
    mid = 0.5 * (v + vs)
    half = 0.5 * g[:, None] * sig
    vp = mid + half
    vsp = mid - half
    with np.errstate(invalid="ignore", divide="ignore"):
        c = np.sum(rel * sig, axis=1) / g
    kern = np.where(g > 0.0, 1.0 - c * c, 0.0)

    fp, gp = _density(kind, params, radii, values, center, vp)
    fsp, gsp = _density(kind, params, radii, values, center, vsp)
    fs, gs = _density(kind, params, radii, values, center, vs)
    wk = w * kern
    gain = wk * fp * fsp * gs
    loss = wk * fs * gp * gsp
    dres = fv * loss - gv * gain
    return np.array([
        gain.sum(), (gain * gain).sum(),
        loss.sum(), (loss * loss).sum(),
        dres.sum(), (dres * dres).sum(),
    ])


def _uniform_ball(zdir, u, radius):
    n = zdir.shape[1]
    norm = np.sqrt(np.sum(zdir * zdir, axis=1))
    return zdir * (radius * u ** (1.0 / n) / norm)[:, None]


def dissipation_block(kind, params, radii, values, center, radius, sphere_area,
                      rel_guard, key_normal, key_uniform, start, count):
    """Sums of the weighted entropy-production integrand over one block.

    ``v`` and ``v_*`` are uniform in the ball of the given radius about
    ``center``; ``sigma`` is uniform on the sphere.

    Returns:
        ``[sum G, sum G^2, number of infinite terms]`` with the infinite terms
        excluded from the two sums.
    """
    n = center.shape[0]
    z = normal_block(key_normal, start, count, 3 * n)
    u = uniform_block(key_uniform, start, count, 2)
    v = center + _uniform_ball(z[:, :n], u[:, 0], radius)
    vs = center + _uniform_ball(z[:, n:2 * n], u[:, 1], radius)
    sig = z[:, 2 * n:]
    sig = sig / np.sqrt(np.sum(sig * sig, axis=1))[:, None]

    ball_volume = sphere_area * radius ** n / n
    w = 0.25 * ball_volume * ball_volume * sphere_area

    rel = v - vs
    g = np.sqrt(np.sum(rel * rel, axis=1))
    mid = 0.5 * (v + vs)
    half = 0.5 * g[:, None] * sig
    vp = mid + half
    vsp = mid - half
    with np.errstate(invalid="ignore", divide="ignore"):
        c = np.sum(rel * sig, axis=1) / g
    kern = np.where(g > 0.0, 1.0 - c * c, 0.0)

    f, fc = _density(kind, params, radii, values, center, v)
    fs, fsc = _density(kind, params, radii, values, center, vs)
    fp, fpc = _density(kind, params, radii, values, center, vp)
    fsp, fspc = _density(kind, params, radii, values, center, vsp)
    A = fp * fsp * fc * fsc
    B = f * fs * fpc * fspc
    A = np.where(A < 1e-300, 0.0, A)
    B = np.where(B < 1e-300, 0.0, B)

    both = (A > 0.0) & (B > 0.0)
    inf_mask = (A > 0.0) != (B > 0.0)
    # only samples with kern > 0 carry weight; a zero-kernel infinity is 0 * inf
    inf_mask &= kern > 0.0
    gam = np.zeros_like(A)
    with np.errstate(invalid="ignore", divide="ignore"):
        diff = A - B
        close = np.abs(diff) <= rel_guard * np.maximum(A, B)
        val = diff * np.log(A / B)
    ok = both & ~close
    gam[ok] = val[ok]
    term = w * kern * gam
    return np.array([term.sum(), (term * term).sum(), float(inf_mask.sum())])
