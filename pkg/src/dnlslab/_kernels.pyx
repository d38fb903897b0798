# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled kernels: truncated quadratic convolution and RK4 stepping.

Same contract as _kernels_py.  The convolution is the direct O(K^2)
double sum in C, the stepping loop avoids per-step Python overhead;
both agree with the numpy fallback to rounding.
"""

import numpy as np

from libc.math cimport cos, sin

ctypedef double complex cplx


cdef void _quad_conv_c(const cplx* a, cplx* out, int K) noexcept nogil:
    # out[k+K] = sum_{k1+k2=k, |k1|,|k2|<=K} a[k1+K] a[k2+K]
    cdef int i, j, lo, hi
    cdef int M = 2 * K
    cdef cplx s
    for i in range(M + 1):
        lo = i - K
        if lo < 0:
            lo = 0
        hi = i + K
        if hi > M:
            hi = M
        s = 0
        for j in range(lo, hi + 1):
            s = s + a[j] * a[i - j + K]
        out[i] = s


def quad_conv(a):
    """Truncated quadratic self-convolution, |k| <= K in and out."""
    a_arr = np.ascontiguousarray(a, dtype=np.complex128)
    cdef const cplx[::1] av = a_arr
    cdef int K = (av.shape[0] - 1) // 2
    out_arr = np.empty(2 * K + 1, dtype=np.complex128)
    cdef cplx[::1] ov = out_arr
    with nogil:
        _quad_conv_c(&av[0], &ov[0], K)
    return out_arr


cdef void _stage_c(const cplx* v, double t, int K, bint interaction,
                   cplx* u, cplx* w, cplx* dv) noexcept nogil:
    cdef int i, k
    cdef int n = 2 * K + 1
    cdef double ph
    cdef cplx e
    if interaction:
        for i in range(n):
            k = i - K
            ph = (<double> k) * k * t
            e = cos(ph) - 1j * sin(ph)
            u[i] = e * v[i]
        _quad_conv_c(u, w, K)
        for i in range(n):
            k = i - K
            ph = (<double> k) * k * t
            e = cos(ph) + 1j * sin(ph)
            dv[i] = e * (0.5j * k) * w[i]
    else:
        _quad_conv_c(v, w, K)
        for i in range(n):
            k = i - K
            dv[i] = -1j * (<double> k) * k * v[i] + (0.5j * k) * w[i]
    dv[K] = 0


def rk4_run(v0, double t0, double dt, long nsteps, long stride, double guard,
            bint interaction):
    """Classical RK4 stepping loop; see _kernels_py.rk4_run for the contract."""
    v_arr = np.array(v0, dtype=np.complex128, copy=True)
    cdef cplx[::1] v = v_arr
    cdef int n = v.shape[0]
    cdef int K = (n - 1) // 2
    cdef long nsamp = nsteps // stride + 1
    samples = np.empty((nsamp, n), dtype=np.complex128)
    cdef cplx[:, ::1] smp = samples

    scratch = np.empty((7, n), dtype=np.complex128)
    cdef cplx[:, ::1] sc = scratch
    cdef cplx* u = &sc[0, 0]
    cdef cplx* w = &sc[1, 0]
    cdef cplx* k1 = &sc[2, 0]
    cdef cplx* k2 = &sc[3, 0]
    cdef cplx* k3 = &sc[4, 0]
    cdef cplx* k4 = &sc[5, 0]
    cdef cplx* vt = &sc[6, 0]

    cdef long step, si = 1
    cdef int i
    cdef double t
    cdef bint tripped = 0
    cdef long done = nsteps

    smp[0, :] = v
    with nogil:
        for step in range(nsteps):
            t = t0 + step * dt
            _stage_c(&v[0], t, K, interaction, u, w, k1)
            for i in range(n):
                vt[i] = v[i] + 0.5 * dt * k1[i]
            _stage_c(vt, t + 0.5 * dt, K, interaction, u, w, k2)
            for i in range(n):
                vt[i] = v[i] + 0.5 * dt * k2[i]
            _stage_c(vt, t + 0.5 * dt, K, interaction, u, w, k3)
            for i in range(n):
                vt[i] = v[i] + dt * k3[i]
            _stage_c(vt, t + dt, K, interaction, u, w, k4)
            for i in range(n):
                v[i] = v[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            for i in range(n):
                if v[i].real > guard or v[i].real < -guard or \
                   v[i].imag > guard or v[i].imag < -guard:
                    tripped = 1
                    break
            if tripped:
                done = step + 1
                break
            if (step + 1) % stride == 0 and si < nsamp:
                smp[si, :] = v
                si += 1
    return samples[:si], (1 if tripped else 0), done
