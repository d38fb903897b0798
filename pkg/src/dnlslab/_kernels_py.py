"""Pure-numpy kernels: truncated quadratic convolution and RK4 stepping.

Same contract as the compiled extension ``_kernels``; which one is active
is decided at import time by :mod:`dnlslab.kernels`.  Arrays hold Fourier
coefficients over k = -K..K at index k + K; the k = 0 slot of dynamical
states is identically zero.
"""

import numpy as np


def _next_pow2(n):
    m = 1
    while m < n:
        m *= 2
    return m


def quad_conv(a):
    """Truncated quadratic self-convolution.

    Returns the array w with w[k+K] = sum_{k1+k2=k} a[k1+K] a[k2+K] over
    |k1|, |k2| <= K, restricted to |k| <= K.  Computed as an exact linear
    convolution on a zero-padded FFT buffer (support 4K+1, no wraparound),
    so the result matches the direct double sum to rounding.
    """
    a = np.asarray(a, dtype=np.complex128)
    K = (a.shape[0] - 1) // 2
    m = _next_pow2(4 * K + 2)
    buf = np.zeros(m, dtype=np.complex128)
    buf[: 2 * K + 1] = a
    full = np.fft.ifft(np.fft.fft(buf) ** 2)
    # polynomial index i1+i2 = k + 2K for k = (i1-K) + (i2-K)
    return full[np.arange(-K, K + 1) + 2 * K]


def _stage(v, t, k, K, interaction):
    if interaction:
        phase = np.exp(-1j * k * k * t)
        u = phase * v
        w = quad_conv(u)
        dv = np.conj(phase) * (0.5j * k) * w
    else:
        w = quad_conv(v)
        dv = -1j * k * k * v + (0.5j * k) * w
    dv[K] = 0.0
    return dv


def rk4_run(v0, t0, dt, nsteps, stride, guard, interaction):
    """Classical RK4 on the quadratic spectral right-hand side.

    interaction=True steps the phase-conjugated (nonstiff) form; False steps
    the physical form with its -i k^2 diagonal.  Stores v0 and then every
    ``stride``-th step.  Returns (samples, status, steps_done) with status 1
    if any |coefficient| exceeded ``guard``.
    """
    v = np.array(v0, dtype=np.complex128, copy=True)
    n = v.shape[0]
    K = (n - 1) // 2
    k = np.arange(-K, K + 1, dtype=np.float64)
    nsamp = nsteps // stride + 1
    samples = np.empty((nsamp, n), dtype=np.complex128)
    samples[0] = v
    si = 1
    for step in range(nsteps):
        t = t0 + step * dt
        a = _stage(v, t, k, K, interaction)
        b = _stage(v + 0.5 * dt * a, t + 0.5 * dt, k, K, interaction)
        c = _stage(v + 0.5 * dt * b, t + 0.5 * dt, k, K, interaction)
        d = _stage(v + dt * c, t + dt, k, K, interaction)
        v = v + (dt / 6.0) * (a + 2.0 * b + 2.0 * c + d)
        if np.max(np.abs(v.real)) > guard or np.max(np.abs(v.imag)) > guard:
            return samples[:si], 1, step + 1
        if (step + 1) % stride == 0 and si < nsamp:
            samples[si] = v
            si += 1
    return samples[:si], 0, nsteps
