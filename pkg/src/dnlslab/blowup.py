"""Closed-form large-data solution blowing up at t* = pi/2.

The gauge loop W(t, x) = 1 - i e^{-it} cos x solves the free equation and
touches the origin for the first time at t* (at x = 0, where
|W(t,0)|^2 = 2(1 - sin t)); inverting the gauge gives the mean-zero flow
solution u(t, x) = -2 e^{-it} sin x / (1 - i e^{-it} cos x) on [0, t*),
whose modulus is 2|sin x| / sqrt(1 - 2 sin t cos x + cos^2 x).  At t* the
modulus degenerates to 2|sin x| / (1 - cos x) ~ 2/|x| near 0, so every
L^p norm (and hence every admissible FL norm of the truncations) diverges.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .cole_hopf import GaugeState
from .errors import DomainError, QuadratureNotConverged
from .spectral import FLParams, GridField, fl_norm, grid_to_state

T_STAR = math.pi / 2.0
T_GUARD = 1e-12
MEAN_TOL = 1e-10


def u_closed(t, x):
    return -2.0 * np.exp(-1j * t) * np.sin(x) / (1.0 - 1j * np.exp(-1j * t) * np.cos(x))


def u_modulus(t, x):
    return 2.0 * np.abs(np.sin(x)) / np.sqrt(
        1.0 - 2.0 * np.sin(t) * np.cos(x) + np.cos(x) ** 2
    )


def w_closed(t, x):
    return 1.0 - 1j * np.exp(-1j * t) * np.cos(x)


def _check_time(t):
    if not (0.0 <= t < T_STAR - T_GUARD):
        raise DomainError(f"t must lie in [0, pi/2) with a {T_GUARD:g} guard; got {t}")


def blowup_gauge(t, N=1024):
    """Gauge loop W(t) as a GaugeState; defined for every real t."""
    x = 2.0 * np.pi * np.arange(N) / N
    return GaugeState.from_samples(w_closed(t, x), time=float(t))


@dataclass(frozen=True)
class BlowupSample:
    """Grid snapshot of the blowup solution with norms and diagnostics."""

    t: float
    u: GridField
    norms: dict
    min_W_modulus: float
    modulus_crosscheck: float
    mean_abs: float


def blowup_fields(t, N=2048, fl_params=()):
    """Sample W and u at time t < t* and record norms.

    |u| is cross-checked against the closed modulus formula; the L^1 and
    L^inf entries are grid values (use blowup_norm_curve for adaptive
    quadrature near t*), L^2 integrates the smooth |u|^2 on the grid.
    Norms use the normalized measure dx / 2 pi.
    """
    _check_time(t)
    x = 2.0 * np.pi * np.arange(N) / N
    uu = u_closed(t, x)
    ww = w_closed(t, x)
    cross = float(np.max(np.abs(np.abs(uu) - u_modulus(t, x))))
    mean_abs = float(np.abs(np.mean(uu)))
    if mean_abs > MEAN_TOL:
        raise DomainError(f"closed-form mean {mean_abs:.3e} exceeds {MEAN_TOL:.1e}")
    norms = {
        "1": float(np.mean(np.abs(uu))),
        "2": float(np.sqrt(np.mean(np.abs(uu) ** 2))),
        "inf": float(np.max(np.abs(uu))),
    }
    field = GridField(N=N, samples=uu, time=float(t))
    for prm in fl_params:
        K = N // 2 - 1
        state = grid_to_state(field, K, allow_truncation=True, strip_mean=True)
        norms[f"fl_s{prm.s:g}_p{prm.p:g}"] = fl_norm(state, prm)
    return BlowupSample(
        t=float(t),
        u=field,
        norms=norms,
        min_W_modulus=float(np.min(np.abs(ww))),
        modulus_crosscheck=cross,
        mean_abs=mean_abs,
    )


def lp_norm(t, p, rel_tol=1e-6):
    """||u(t)||_{L^p} by adaptive quadrature with a breakpoint at the x = 0
    peak (normalized measure); p = inf refines the grid maximum."""
    _check_time(t)
    if math.isinf(p):
        N = 4096
        prev = None
        for _ in range(10):
            x = 2.0 * np.pi * np.arange(N) / N
            m = float(np.max(u_modulus(t, x)))
            if prev is not None and abs(m - prev) <= 1e-12 * m:
                return m, 0.0
            prev = m
            N *= 2
        return prev, 0.0
    # |u| is even: integrate the half period through the peak at 0
    f = lambda xx: u_modulus(t, xx) ** p
    val, err = quad(f, 0.0, np.pi, limit=400, points=[0.0])
    if not np.isfinite(val) or err > max(rel_tol * abs(val), 1e-13):
        raise QuadratureNotConverged(
            f"adaptive quadrature error {err:.3e} for p={p}, t={t}"
        )
    total = 2.0 * val / (2.0 * np.pi)
    return float(total ** (1.0 / p)), float(err / math.pi)


def blowup_norm_curve(p, eps_list):
    """Rows (eps, ||u(pi/2 - eps)||_{L^p}, quadrature error estimate).

    Each eps must lie in (0, 0.5]; norms increase strictly as eps shrinks.
    """
    rows = []
    for eps in eps_list:
        if not (0.0 < eps <= 0.5):
            raise DomainError(f"eps must lie in (0, 0.5], got {eps}")
        norm, err = lp_norm(T_STAR - eps, p)
        rows.append((float(eps), float(norm), float(err)))
    return rows


def log_fit_slopes(rows):
    """Slopes of the norm against log(1/eps) between consecutive rows."""
    out = []
    for (e0, n0, _), (e1, n1, _) in zip(rows, rows[1:]):
        out.append((n1 - n0) / (math.log(1.0 / e1) - math.log(1.0 / e0)))
    return out


def blowup_initial_state(K, N=2048, time=0.0):
    """Truncation of the blowup data u(0) to |k| <= K (physical state)."""
    x = 2.0 * np.pi * np.arange(N) / N
    field = GridField(N=N, samples=u_closed(0.0, x), time=time)
    return grid_to_state(field, K, allow_truncation=True)


def blowup_residual(t, dt, K, N=None):
    """Centered-in-time residual of the closed form truncated to K modes.

    Returns max and l2 residual plus the K-tail fraction of the spectrum;
    the contract is max_residual <= C dt^2 + truncation tail.
    """
    if dt <= 0:
        raise DomainError("dt must be positive")
    _check_time(t - dt)
    _check_time(t + dt)
    if N is None:
        from .spectral import next_pow2

        N = next_pow2(max(1024, 8 * K))
    x = 2.0 * np.pi * np.arange(N) / N

    def coeffs(tt):
        c = np.fft.fft(u_closed(tt, x)) / N
        ks = np.arange(-K, K + 1)
        out = c[ks % N].copy()
        out[K] = 0.0
        return out

    from . import kernels

    up, um, u0 = coeffs(t + dt), coeffs(t - dt), coeffs(t)
    k = np.arange(-K, K + 1, dtype=np.float64)
    fd = (up - um) / (2.0 * dt)
    rhs = -1j * k * k * u0 + 0.5j * k * kernels.quad_conv(u0)
    resid = fd - rhs
    resid[K] = 0.0

    c_full = np.fft.fft(u_closed(t, x)) / N
    kk = np.fft.fftfreq(N, 1.0 / N).astype(int)
    tail = float(
        np.linalg.norm(c_full[np.abs(kk) > K]) / max(np.linalg.norm(c_full), 1e-300)
    )
    return {
        "t": float(t),
        "dt": float(dt),
        "K": K,
        "max_residual": float(np.max(np.abs(resid))),
        "l2_residual": float(np.linalg.norm(resid)),
        "tail_fraction": tail,
    }
