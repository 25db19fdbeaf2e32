# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Monte-Carlo kernels.

Drop-in replacement for :mod:`fermi_equilibria._pykernels`; see that module for
the contract of each function.  Loops run without the GIL so that worker
threads sharding a sample range can execute concurrently.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, log, exp, cos, sin, pow, M_PI
from libc.stdint cimport uint64_t

cnp.import_array()

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef double TWO53 = 1.0 / 9007199254740992.0


cdef inline uint64_t _mix(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double _uniform(uint64_t key, uint64_t counter) noexcept nogil:
    cdef uint64_t z = _mix(key + (counter + 1) * GOLDEN)
    return (<double>(z >> 11) + 1.0) * TWO53


cdef void _normals(uint64_t key, uint64_t index, int width, double* out) noexcept nogil:
    cdef int w2 = width + (width & 1)
    cdef uint64_t base = index * <uint64_t>w2
    cdef int j
    cdef double u1, u2, r, th
    j = 0
    while j < w2:
        u1 = _uniform(key, base + j)
        u2 = _uniform(key, base + j + 1)
        r = sqrt(-2.0 * log(u1))
        th = 2.0 * M_PI * u2
        out[j] = r * cos(th)
        out[j + 1] = r * sin(th)
        j += 2


cdef inline void _value(int kind, const double* params, const double* radii,
                        const double* values, Py_ssize_t m, double r,
                        double* f, double* g) noexcept nogil:
    cdef double e, t
    cdef Py_ssize_t lo, hi, mid
    if kind == 0:
        e = params[0] * exp(-params[1] * r * r)
        f[0] = e / (1.0 + e)
        g[0] = 1.0 / (1.0 + e)
    elif kind == 1:
        if r <= params[0]:
            f[0] = 1.0
        else:
            f[0] = 0.0
        g[0] = 1.0 - f[0]
    elif kind == 2:
        if r >= params[0] and r <= params[1]:
            f[0] = 1.0
        else:
            f[0] = 0.0
        g[0] = 1.0 - f[0]
    else:
        if r <= radii[0]:
            f[0] = values[0]
        elif r >= radii[m - 1]:
            f[0] = values[m - 1]
        else:
            lo = 0
            hi = m - 1
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if radii[mid] <= r:
                    lo = mid
                else:
                    hi = mid
            t = (r - radii[lo]) / (radii[hi] - radii[lo])
            f[0] = values[lo] + t * (values[hi] - values[lo])
        g[0] = 1.0 - f[0]


cdef inline double _dist(const double* x, const double* c, int n) noexcept nogil:
    cdef double s = 0.0, d
    cdef int k
    for k in range(n):
        d = x[k] - c[k]
        s += d * d
    return sqrt(s)


def uniform_block(uint64_t key, Py_ssize_t start, Py_ssize_t count, int width):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((count, width))
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i
    cdef int j
    with nogil:
        for i in range(count):
            for j in range(width):
                o[i, j] = _uniform(key, <uint64_t>((start + i) * width + j))
    return out


def normal_block(uint64_t key, Py_ssize_t start, Py_ssize_t count, int width):
    cdef int w2 = width + (width & 1)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] buf = np.empty((count, w2))
    cdef double[:, ::1] b = buf
    cdef Py_ssize_t i
    with nogil:
        for i in range(count):
            _normals(key, <uint64_t>(start + i), width, &b[i, 0])
    return buf[:, :width]


def collision_block(int kind, const double[::1] params, const double[::1] radii, const double[::1] values,
                    const double[::1] center, const double[::1] v, double fv, double gv, double scale,
                    double sphere_area, uint64_t key, Py_ssize_t start, Py_ssize_t count):
    cdef int n = v.shape[0]
    cdef Py_ssize_t m = radii.shape[0]
    cdef double[::1] zbuf = np.empty(2 * n + 2)
    cdef double[::1] vs = np.empty(n)
    cdef double[::1] vp = np.empty(n)
    cdef double[::1] vsp = np.empty(n)
    cdef double[::1] sig = np.empty(n)
    cdef double sums[6]
    cdef Py_ssize_t i
    cdef int k
    cdef double q, nrm, g, c, kern, w, norm_const
    cdef double fp, gp, fsp, gsp, fs, gs, gain, loss, dres
    cdef const double* pp = &params[0]
    cdef const double* rp = &radii[0]
    cdef const double* valp = &values[0]
    for k in range(6):
        sums[k] = 0.0
    norm_const = sphere_area * pow(2.0 * M_PI * scale * scale, 0.5 * n)
    with nogil:
        for i in range(count):
            _normals(key, <uint64_t>(start + i), 2 * n, &zbuf[0])
            nrm = 0.0
            q = 0.0
            for k in range(n):
                nrm += zbuf[k] * zbuf[k]
                q += zbuf[n + k] * zbuf[n + k]
            nrm = sqrt(nrm)
            for k in range(n):
                sig[k] = zbuf[k] / nrm
                vs[k] = center[k] + scale * zbuf[n + k]
            w = norm_const * exp(0.5 * q)
            g = 0.0
            c = 0.0
            for k in range(n):
                g += (v[k] - vs[k]) * (v[k] - vs[k])
                c += (v[k] - vs[k]) * sig[k]
            g = sqrt(g)
            if g > 0.0:
                c = c / g
                kern = 1.0 - c * c
            else:
                kern = 0.0
            for k in range(n):
                vp[k] = 0.5 * (v[k] + vs[k]) + 0.5 * g * sig[k]
                vsp[k] = 0.5 * (v[k] + vs[k]) - 0.5 * g * sig[k]
            _value(kind, pp, rp, valp, m, _dist(&vp[0], &center[0], n), &fp, &gp)
            _value(kind, pp, rp, valp, m, _dist(&vsp[0], &center[0], n), &fsp, &gsp)
            _value(kind, pp, rp, valp, m, _dist(&vs[0], &center[0], n), &fs, &gs)
            gain = w * kern * fp * fsp * gs
            loss = w * kern * fs * gp * gsp
            dres = fv * loss - gv * gain
            sums[0] += gain
            sums[1] += gain * gain
            sums[2] += loss
            sums[3] += loss * loss
            sums[4] += dres
            sums[5] += dres * dres
    return np.array([sums[0], sums[1], sums[2], sums[3], sums[4], sums[5]])


cdef inline void _ball_point(const double* z, double u, double radius, int n,
                             const double* center, double* out) noexcept nogil:
    cdef double nrm = 0.0, s
    cdef int k
    for k in range(n):
        nrm += z[k] * z[k]
    s = radius * pow(u, 1.0 / n) / sqrt(nrm)
    for k in range(n):
        out[k] = center[k] + z[k] * s


def dissipation_block(int kind, const double[::1] params, const double[::1] radii, const double[::1] values,
                      const double[::1] center, double radius, double sphere_area, double rel_guard,
                      uint64_t key_normal, uint64_t key_uniform, Py_ssize_t start,
                      Py_ssize_t count):
    cdef int n = center.shape[0]
    cdef Py_ssize_t m = radii.shape[0]
    cdef double[::1] zbuf = np.empty(3 * n + 2)
    cdef double[::1] v = np.empty(n)
    cdef double[::1] vs = np.empty(n)
    cdef double[::1] vp = np.empty(n)
    cdef double[::1] vsp = np.empty(n)
    cdef double[::1] sig = np.empty(n)
    cdef Py_ssize_t i
    cdef int k
    cdef double s0 = 0.0, s1 = 0.0, ninf = 0.0
    cdef double u0, u1, nrm, g, c, kern, w, ball_volume
    cdef double f, fc, fs, fsc, fp, fpc, fsp, fspc, A, B, gam, term
    cdef const double* pp = &params[0]
    cdef const double* rp = &radii[0]
    cdef const double* valp = &values[0]
    ball_volume = sphere_area * pow(radius, n) / n
    w = 0.25 * ball_volume * ball_volume * sphere_area
    with nogil:
        for i in range(count):
            _normals(key_normal, <uint64_t>(start + i), 3 * n, &zbuf[0])
            u0 = _uniform(key_uniform, <uint64_t>(2 * (start + i)))
            u1 = _uniform(key_uniform, <uint64_t>(2 * (start + i) + 1))
            _ball_point(&zbuf[0], u0, radius, n, &center[0], &v[0])
            _ball_point(&zbuf[n], u1, radius, n, &center[0], &vs[0])
            nrm = 0.0
            for k in range(n):
                nrm += zbuf[2 * n + k] * zbuf[2 * n + k]
            nrm = sqrt(nrm)
            g = 0.0
            c = 0.0
            for k in range(n):
                sig[k] = zbuf[2 * n + k] / nrm
                g += (v[k] - vs[k]) * (v[k] - vs[k])
                c += (v[k] - vs[k]) * sig[k]
            g = sqrt(g)
            if g > 0.0:
                c = c / g
                kern = 1.0 - c * c
            else:
                kern = 0.0
            for k in range(n):
                vp[k] = 0.5 * (v[k] + vs[k]) + 0.5 * g * sig[k]
                vsp[k] = 0.5 * (v[k] + vs[k]) - 0.5 * g * sig[k]
            _value(kind, pp, rp, valp, m, _dist(&v[0], &center[0], n), &f, &fc)
            _value(kind, pp, rp, valp, m, _dist(&vs[0], &center[0], n), &fs, &fsc)
            _value(kind, pp, rp, valp, m, _dist(&vp[0], &center[0], n), &fp, &fpc)
            _value(kind, pp, rp, valp, m, _dist(&vsp[0], &center[0], n), &fsp, &fspc)
            A = fp * fsp * fc * fsc
            B = f * fs * fpc * fspc
            if A < 1e-300:
                A = 0.0
            if B < 1e-300:
                B = 0.0
            gam = 0.0
            if A > 0.0 and B > 0.0:
                if not (abs(A - B) <= rel_guard * (A if A > B else B)):
                    gam = (A - B) * log(A / B)
            elif (A > 0.0) != (B > 0.0):
                if kern > 0.0:
                    ninf += 1.0
            term = w * kern * gam
            s0 += term
            s1 += term * term
    return np.array([s0, s1, ninf])
