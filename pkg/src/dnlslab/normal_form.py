"""Multilinear operators of the iterated normal-form reduction and the
Picard solver for the reduced integral equation.

For a frequency tuple (k_1..k_n) with |k|_n = sum k_i and modulation
Phi_n = (sum k_i)^2 - sum k_i^2, the operators are

  N^n_k(v) = (-1)^n k / (2^{n-1} n!) sum_{|k|_n=k} e^{i Phi_n t} prod v_{k_j}/k_j
  I^n_k(v) = same sum weighted by i Phi_n                              (n >= 2)
  R^n_k(v) = -(i/4) M(u) N^{n-1}_k(v)                                  (n >= 2)

with N^1(v) = -v.  The flow satisfies, for every n,
  d/dt v_k = d/dt sum_{j=2}^n N^j_k + sum_{j=2}^n R^j_k + I^{n+1}_k,
and sending n to infinity yields the integral equation solved here by
fixed-point iteration:
  v(t) = phi + sum_{n>=2} [N^n(t)(v(t)) - N^n(0)(phi)]
         + int_0^t -(i/4) M(u) sum_{n>=1} N^n(v) dt'.

Fast paths evaluate the sums as n-fold convolution powers of
b_k = e^{-i k^2 t} v_k / k on a zero-padded spectrum (width >= 2nK+1,
so the comparison against the direct tuple sums is exact up to rounding).
"""

import math
import warnings
from dataclasses import dataclass
from itertools import product

import numpy as np

from .dynamics import Trajectory
from .errors import (
    ComplexityBudget,
    DomainError,
    NotContracting,
    SmallnessViolated,
    StrideTooCoarse,
    ZeroFrequency,
)
from .spectral import (
    INTERACTION,
    FLParams,
    SpectralState,
    Z_const,
    canonical_order,
    fl_norm,
    l2_norm,
    next_pow2,
    z_const,
    z_is_extension,
)

DIRECT_MAX_N = 5
DIRECT_MAX_K = 8

Z02 = None  # set lazily; Z_{0,2} = pi/sqrt(3)


def _z02():
    global Z02
    if Z02 is None:
        Z02 = Z_const(FLParams(0.0, 2.0))
    return Z02


# ---------------------------------------------------------------------------
# modulation function
# ---------------------------------------------------------------------------


def modulation_phi(ks):
    """(sum k_i)^2 - sum k_i^2, exactly, for a tuple of nonzero integers.

    Both algebraic forms (the square difference and 2 sum_{i<j} k_i k_j)
    are integers and are compared; Phi_1 = 0 by construction.
    """
    ks = tuple(int(k) for k in ks)
    if any(k == 0 for k in ks):
        raise ZeroFrequency(f"tuple {ks} contains a zero frequency")
    total = sum(ks)
    phi = total * total - sum(k * k for k in ks)
    if __debug__:
        cross = 2 * sum(
            ks[i] * ks[j] for i in range(len(ks)) for j in range(i + 1, len(ks))
        )
        assert phi == cross
    return phi


# ---------------------------------------------------------------------------
# estimate constants
# ---------------------------------------------------------------------------


def C_s(s, n):
    """Norm-inflation constant of the multilinear estimates: 1 for s<=0, n^s else."""
    return 1.0 if s <= 0 else float(n) ** s


def A_s(s):
    """sup_n C_s(n) n / 2^{n-1}, found by scanning until 10 straight decreases."""
    best = 0.0
    decreasing = 0
    n = 1
    prev = math.inf
    while decreasing < 10:
        a = C_s(s, n) * n / 2.0 ** (n - 1)
        best = max(best, a)
        decreasing = decreasing + 1 if a < prev else 0
        prev = a
        n += 1
    return best


def delta1(params):
    """Smallness radius: A_s (e^{4 Z delta1} - 1) = 1/4."""
    return math.log(1.0 + 0.25 / A_s(params.s)) / (4.0 * Z_const(params))


def contraction_time_bound(params, R):
    """Admissible horizon for the fixed-point map at ball radius R."""
    A = A_s(params.s)
    z = z_const(params)
    Z = Z_const(params)
    e = math.exp(Z * R)
    return min(
        1.0 / (2.0 * A * z * z * R * R * e),
        1.0 / (A * z * z * R * R * e * (2.0 + e)),
    )


def fl_estimate_bound(params, n, norm_v):
    """Right side of the n-linear norm estimate:
    C_s(n) Z^{n-1} / (2^{n-1} (n-1)!) ||v||^n."""
    Z = Z_const(params)
    return (
        C_s(params.s, n)
        * Z ** (n - 1)
        / (2.0 ** (n - 1) * math.factorial(n - 1))
        * norm_v**n
    )


def fl_lipschitz_bound(params, n, norm_v, norm_w):
    """Right side of the n-linear difference estimate (without ||v - w||)."""
    Z = Z_const(params)
    return (
        C_s(params.s, n)
        * n
        * Z ** (n - 1)
        / (2.0 ** (n - 1) * math.factorial(n - 1))
        * (norm_v + norm_w) ** (n - 1)
    )


def sup_I_bound(n, k, C0):
    """Per-mode sup bound |I^n_k| <= |k| Z^{n-2} C0^n / (2^{n-1} (n-2)!), n >= 2."""
    Z = _z02()
    return abs(k) * Z ** (n - 2) * C0**n / (2.0 ** (n - 1) * math.factorial(n - 2))


def sup_N_bound(n, C0):
    """Per-mode sup bound |N^n_k| <= Z^{n-1} C0^n / (2^{n-1} (n-1)!)."""
    Z = _z02()
    return Z ** (n - 1) * C0**n / (2.0 ** (n - 1) * math.factorial(n - 1))


def sup_R_bound(n, C0):
    """Per-mode sup bound |R^n_k| <= Z^{n-2} C0^{n+1} / (2^n (n-2)!), n >= 2."""
    Z = _z02()
    return Z ** (n - 2) * C0 ** (n + 1) / (2.0**n * math.factorial(n - 2))


def series_tail_bound(N_max, C0):
    """sum_{n > N_max} of the per-mode N bound, in closed form."""
    a = _z02() * C0 / 2.0
    partial = sum(a**m / math.factorial(m) for m in range(N_max))
    return C0 * (math.exp(a) - partial)


# ---------------------------------------------------------------------------
# fast paths (padded convolution powers)
# ---------------------------------------------------------------------------


def _b_weights(coeffs, t, K):
    """b_k = e^{-i k^2 t} v_k / k (the derivative-weighted physical data)."""
    k = np.arange(-K, K + 1, dtype=np.float64)
    kk = k.copy()
    kk[K] = 1.0
    b = np.exp(-1j * k * k * t) * coeffs / kk
    b[K] = 0.0
    return b


def _spread(arr, K, m):
    """Place coefficients over [-K, K] into an FFT buffer of size m (circular
    layout), m large enough that all later convolutions stay linear."""
    buf = np.zeros(m, dtype=np.complex128)
    buf[np.arange(-K, K + 1) % m] = arr
    return buf


def _gather(full, K_out, m, support):
    ks = np.arange(-K_out, K_out + 1)
    out = np.zeros(2 * K_out + 1, dtype=np.complex128)
    sel = np.abs(ks) <= support
    out[sel] = full[ks[sel] % m]
    return out


def _scale(n, K_out, t):
    ko = np.arange(-K_out, K_out + 1, dtype=np.float64)
    return ((-1.0) ** n * ko / (2.0 ** (n - 1) * math.factorial(n))) * np.exp(
        1j * ko * ko * t
    )


def _nf_N_fast(coeffs, t, n, K, K_out):
    b = _b_weights(coeffs, t, K)
    m = next_pow2(2 * n * K + 2)
    B = np.fft.fft(_spread(b, K, m))
    conv = np.fft.ifft(B**n)
    out = _scale(n, K_out, t) * _gather(conv, K_out, m, n * K)
    out[K_out] = 0.0
    return out


def _nf_I_fast(coeffs, t, n, K, K_out):
    b = _b_weights(coeffs, t, K)
    k = np.arange(-K, K + 1, dtype=np.float64)
    d = k * k * b
    m = next_pow2(2 * n * K + 2)
    B = np.fft.fft(_spread(b, K, m))
    D = np.fft.fft(_spread(d, K, m))
    conv_b = np.fft.ifft(B**n)
    conv_d = np.fft.ifft(D * B ** (n - 1))
    ko = np.arange(-K_out, K_out + 1, dtype=np.float64)
    # i Phi_n = i k^2 - i sum k_j^2 splits into the two convolutions
    out = _scale(n, K_out, t) * (
        1j * ko * ko * _gather(conv_b, K_out, m, n * K)
        - 1j * n * _gather(conv_d, K_out, m, n * K)
    )
    out[K_out] = 0.0
    return out


def _nf_sum_fast(coeffs, t, N_max, K, K_out, n_from=1):
    """sum_{n=n_from}^{N_max} N^n_k(v) in one FFT pass (shared k e^{ik^2 t})."""
    b = _b_weights(coeffs, t, K)
    m = next_pow2(2 * N_max * K + 2)
    B = np.fft.fft(_spread(b, K, m))
    acc = np.zeros(m, dtype=np.complex128)
    Bp = np.ones(m, dtype=np.complex128)
    for n in range(1, N_max + 1):
        Bp = Bp * B
        if n >= n_from:
            acc += ((-1.0) ** n / (2.0 ** (n - 1) * math.factorial(n))) * Bp
    full = np.fft.ifft(acc)
    ko = np.arange(-K_out, K_out + 1, dtype=np.float64)
    out = ko * np.exp(1j * ko * ko * t) * _gather(full, K_out, m, N_max * K)
    out[K_out] = 0.0
    return out


# ---------------------------------------------------------------------------
# direct paths (brute-force tuple sums)
# ---------------------------------------------------------------------------


def _nf_direct(coeffs, t, n, K, K_out, weighted):
    """Enumerate all tuples in ([-K,K] \\ {0})^n; weighted=True inserts the
    i Phi_n factor (the I operator).  Cost (2K)^n; guarded by the caller."""
    out = np.zeros(2 * K_out + 1, dtype=np.complex128)
    nonzero = [k for k in range(-K, K + 1) if k != 0]
    for tup in product(nonzero, repeat=n):
        s = sum(tup)
        if s == 0 or abs(s) > K_out:
            continue
        phi = s * s - sum(k * k for k in tup)
        term = np.exp(1j * phi * t)
        for k in tup:
            term *= coeffs[k + K] / k
        if weighted:
            term *= 1j * phi
        out[s + K_out] += term
    ko = np.arange(-K_out, K_out + 1, dtype=np.float64)
    return ((-1.0) ** n * ko / (2.0 ** (n - 1) * math.factorial(n))) * out


def _check_direct_budget(n, K):
    if n > DIRECT_MAX_N or K > DIRECT_MAX_K:
        raise ComplexityBudget(
            f"direct evaluation limited to n <= {DIRECT_MAX_N}, K <= {DIRECT_MAX_K}; "
            f"got n={n}, K={K}"
        )


# ---------------------------------------------------------------------------
# public operators
# ---------------------------------------------------------------------------


def _as_term(coeffs, K_out, t):
    return SpectralState(K=K_out, coeffs=coeffs, time=t, representation=INTERACTION)


def nf_N(v, n, t=None, method="fast", K_out=None):
    """Boundary operator N^n of the reduction; N^1(v) = -v.

    K_out defaults to the full convolution support nK; restrict to the
    state's K for compositions.
    """
    if n < 1:
        raise DomainError("n must be at least 1")
    if v.representation != INTERACTION:
        raise DomainError("normal-form operators act on the interaction representation")
    if t is None:
        t = v.time
    K = v.K
    if K_out is None:
        K_out = n * K
    if n == 1:
        out = np.zeros(2 * K_out + 1, dtype=np.complex128)
        lo = min(K, K_out)
        out[K_out - lo : K_out + lo + 1] = -v.coeffs[K - lo : K + lo + 1]
        return _as_term(out, K_out, t)
    if method == "direct":
        _check_direct_budget(n, K)
        coeffs = _nf_direct(v.coeffs, t, n, K, K_out, weighted=False)
    elif method == "fast":
        coeffs = _nf_N_fast(v.coeffs, t, n, K, K_out)
    else:
        raise DomainError(f"unknown method {method!r}")
    return _as_term(coeffs, K_out, t)


def nf_I(v, n, t=None, method="fast", K_out=None):
    """Remainder operator I^n (n >= 2); I^2 is the full right-hand side."""
    if n < 2:
        raise DomainError("I^n is defined for n >= 2")
    if v.representation != INTERACTION:
        raise DomainError("normal-form operators act on the interaction representation")
    if t is None:
        t = v.time
    K = v.K
    if K_out is None:
        K_out = n * K
    if method == "direct":
        _check_direct_budget(n, K)
        coeffs = _nf_direct(v.coeffs, t, n, K, K_out, weighted=True)
    elif method == "fast":
        coeffs = _nf_I_fast(v.coeffs, t, n, K, K_out)
    else:
        raise DomainError(f"unknown method {method!r}")
    return _as_term(coeffs, K_out, t)


def M_interaction(v, t=None):
    """M(u) = sum_m e^{-2i m^2 t} v_m v_{-m}, the zero mode of u^2."""
    if t is None:
        t = v.time
    k = v.k_grid.astype(np.float64)
    u = np.exp(-1j * k * k * t) * v.coeffs
    prod = u * u[::-1]
    ks = v.k_grid
    order = canonical_order(ks)
    order = order[ks[order] != 0]
    return complex(np.sum(prod[order]))


def nf_R(v, n, t=None, K_out=None, method="fast"):
    """Correction operator R^n = -(i/4) M(u) N^{n-1}(v), n >= 2."""
    if n < 2:
        raise DomainError("R^n is defined for n >= 2")
    if t is None:
        t = v.time
    if K_out is None:
        K_out = v.K
    Nprev = nf_N(v, n - 1, t=t, method=method, K_out=K_out)
    M = M_interaction(v, t)
    return _as_term(-0.25j * M * Nprev.coeffs, K_out, t)


@dataclass(frozen=True)
class NFSeries:
    """Truncated boundary series sum_{n=1}^{N_max} N^n(v) with its tail
    certificate from the factorial sup bounds (C0 = l2 norm of v)."""

    N_max: int
    basis_time: float
    tail_bound: float
    terms: tuple

    def term(self, n):
        return self.terms[n - 1]

    def total(self, n_from=1):
        acc = np.zeros_like(self.terms[0].coeffs)
        for n in range(n_from, self.N_max + 1):
            acc = acc + self.terms[n - 1].coeffs
        return _as_term(acc, self.terms[0].K, self.basis_time)

    def to_json(self):
        return {
            "N_max": self.N_max,
            "basis_time": self.basis_time,
            "tail_bound": self.tail_bound,
            "terms": {str(n): self.terms[n - 1].to_json() for n in range(1, self.N_max + 1)},
        }


def nf_series(v, N_max, t=None, K_out=None):
    """Terms n = 1..N_max of the boundary series at a common output truncation."""
    if N_max < 2:
        raise DomainError("N_max must be at least 2")
    if t is None:
        t = v.time
    if K_out is None:
        K_out = v.K
    terms = tuple(nf_N(v, n, t=t, K_out=K_out) for n in range(1, N_max + 1))
    tail = series_tail_bound(N_max, l2_norm(v))
    return NFSeries(N_max=N_max, basis_time=t, tail_bound=tail, terms=terms)


# ---------------------------------------------------------------------------
# finite-reduction residual
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ResidualReport:
    n: int
    k: int
    sup_residual: float
    fd_error: float
    sup_I: dict
    sup_I_bounds: dict
    C0: float

    def to_csv_rows(self):
        for j in sorted(self.sup_I):
            yield (j, self.k, self.sup_I[j], self.sup_I_bounds[j])


def finite_nf_residual(traj, n, k, fd_tol=1e-4):
    """Residual of the n-step reduction identity along a trajectory.

    r_n(t) = | d/dt^{FD}[v_k - sum_{j=2}^n N^j_k] - sum_{j=2}^n R^j_k - I^{n+1}_k |
    at interior samples; the identity is exact, so r_n is pure
    finite-difference error.  fd_error is a certified estimate of that error
    (1.5x the spread between the 2nd- and 4th-order difference, plus a
    rounding floor); StrideTooCoarse if it exceeds fd_tol.  The report also
    carries sup_t |I^j_k| for j = 2..n+1 with their factorial sup bounds.
    """
    if n < 2:
        raise DomainError("the reduction residual is defined for n >= 2")
    traj = traj.as_interaction()
    if len(traj) < 5:
        raise DomainError("need at least five samples")
    h = traj.dt
    K = traj.K
    ki = k + K

    g = np.empty(len(traj), dtype=np.complex128)
    rhs = np.empty(len(traj), dtype=np.complex128)
    sup_I = {j: 0.0 for j in range(2, n + 2)}
    C0 = 0.0
    for i, s in enumerate(traj.states):
        t = s.time
        C0 = max(C0, l2_norm(s))
        boundary = _nf_sum_fast(s.coeffs, t, n, K, K, n_from=2)
        g[i] = s.coeffs[ki] - boundary[ki]
        acc = 0.0 + 0.0j
        M = M_interaction(s, t)
        for j in range(2, n + 1):
            Nprev = _nf_N_fast(s.coeffs, t, j - 1, K, K) if j > 2 else -s.coeffs
            acc += -0.25j * M * Nprev[ki]
        for j in range(2, n + 2):
            Ij = _nf_I_fast(s.coeffs, t, j, K, K)
            sup_I[j] = max(sup_I[j], abs(Ij[ki]))
            if j == n + 1:
                acc += Ij[ki]
        rhs[i] = acc

    resid = []
    fd_err = []
    for i in range(2, len(traj) - 2):
        fd2 = (g[i + 1] - g[i - 1]) / (2.0 * h)
        fd4 = (-g[i + 2] + 8.0 * g[i + 1] - 8.0 * g[i - 1] + g[i - 2]) / (12.0 * h)
        resid.append(abs(fd2 - rhs[i]))
        fd_err.append(1.5 * abs(fd2 - fd4) + 1e-12)
    sup_res = float(max(resid))
    fd_error = float(max(fd_err))
    if fd_error > fd_tol:
        raise StrideTooCoarse(
            f"finite-difference error estimate {fd_error:.3e} exceeds {fd_tol:.1e}"
        )
    bounds = {j: sup_I_bound(j, k, C0) for j in sup_I}
    return ResidualReport(
        n=n, k=k, sup_residual=sup_res, fd_error=fd_error, sup_I=sup_I,
        sup_I_bounds=bounds, C0=C0,
    )


# ---------------------------------------------------------------------------
# Picard solver for the reduced integral equation
# ---------------------------------------------------------------------------


def _cumulative_simpson(y, h):
    """4th-order cumulative integral of uniform samples, I[0] = 0.

    Even indices use composite Simpson; odd ones add the quadratic-fit
    integral over the last interval.
    """
    n = len(y)
    out = np.zeros(n, dtype=np.complex128)
    for i in range(1, n):
        if i % 2 == 0:
            out[i] = out[i - 2] + h * (y[i - 2] + 4.0 * y[i - 1] + y[i]) / 3.0
        elif i + 1 < n:
            out[i] = out[i - 1] + h * (5.0 * y[i - 1] + 8.0 * y[i] - y[i + 1]) / 12.0
        else:
            out[i] = out[i - 1] + h * (-y[i - 2] + 8.0 * y[i - 1] + 5.0 * y[i]) / 12.0
    return out


@dataclass(frozen=True)
class PicardReport:
    converged: bool
    iterations: int
    deltas: tuple
    contraction_factors: tuple
    delta1: float
    time_bound: float
    quad_nodes: int
    quad_error: float
    smallness_ok: bool
    horizon_ok: bool
    z_extension_used: bool
    N_max: int
    tail_bound: float

    def to_json(self):
        return {
            "converged": self.converged,
            "iterations": self.iterations,
            "deltas": [float(d) for d in self.deltas],
            "contraction_factors": [float(f) for f in self.contraction_factors],
            "delta1": self.delta1,
            "time_bound": self.time_bound,
            "quad_nodes": self.quad_nodes,
            "quad_error": self.quad_error,
            "smallness_ok": self.smallness_ok,
            "horizon_ok": self.horizon_ok,
            "z_extension_used": self.z_extension_used,
            "N_max": self.N_max,
            "tail_bound": self.tail_bound,
        }


def _picard_pass(phi_arr, K, ts, h, N_max, tol, max_iter):
    """Fixed-point iteration on one time grid; returns (V, deltas)."""
    V = np.tile(phi_arr, (len(ts), 1)).astype(np.complex128)
    boundary_phi = _nf_sum_fast(phi_arr, 0.0, N_max, K, K, n_from=2)
    deltas = []
    increases = 0
    for _ in range(max_iter):
        G = np.empty_like(V)
        integrand = np.empty_like(V)
        for i, t in enumerate(ts):
            series_all = _nf_sum_fast(V[i], t, N_max, K, K, n_from=1)
            series_2 = series_all + V[i]  # removes the n = 1 term (-v)
            k = np.arange(-K, K + 1, dtype=np.float64)
            u = np.exp(-1j * k * k * t) * V[i]
            M = np.sum(u * u[::-1])
            integrand[i] = -0.25j * M * series_all
            G[i] = phi_arr + series_2 - boundary_phi
        for m in range(2 * K + 1):
            G[:, m] += _cumulative_simpson(integrand[:, m], h)
        delta = float(np.max(np.sqrt(np.sum(np.abs(G - V) ** 2, axis=1))))
        deltas.append(delta)
        V = G
        if not np.isfinite(delta) or (deltas[0] > 0 and delta > 100.0 * max(deltas[0], 1.0)):
            raise NotContracting(
                f"iteration diverged (increment {delta:.3e} after {len(deltas)} sweeps)"
            )
        if len(deltas) >= 2 and delta > deltas[-2]:
            increases += 1
            if increases >= 3:
                raise NotContracting("increment grew for three consecutive sweeps")
        else:
            increases = 0
        if delta < tol:
            return V, deltas
    raise NotContracting(f"no convergence to {tol:.1e} within {max_iter} sweeps")


def picard_solve(
    phi,
    T,
    N_max=10,
    quad_nodes=256,
    tol=1e-10,
    max_iter=60,
    params=None,
    override_smallness=False,
    refine_quadrature=True,
    max_refinements=3,
):
    """Solve the reduced integral equation on [0, T] by fixed-point iteration.

    phi is physical initial data at time 0; the returned trajectory holds
    the interaction representation on the quadrature grid.  Preconditions:
    ||phi||_{FL} <= delta1 and T within the contraction horizon; violations
    raise SmallnessViolated unless override_smallness is set (then a warning
    is emitted and iteration proceeds, monitored for divergence).
    """
    params = params or FLParams(0.0, 2.0)
    if params.regime not in ("main", "l2"):
        raise DomainError(f"(s, p) = ({params.s}, {params.p}) outside the solver regimes")
    if quad_nodes < 2 or quad_nodes % 2 != 0:
        raise DomainError("quad_nodes must be a positive even number")
    phi_phys = phi.to_physical()
    if abs(phi_phys.time) > 1e-12:
        raise DomainError("initial data must sit at time 0")
    norm_phi = fl_norm(phi_phys, params)
    d1 = delta1(params)
    R = 2.0 * norm_phi
    t_bound = contraction_time_bound(params, R) if R > 0 else math.inf
    smallness_ok = norm_phi <= d1
    horizon_ok = T <= t_bound
    if not (smallness_ok and horizon_ok):
        msg = (
            f"||phi|| = {norm_phi:.4g} vs delta1 = {d1:.4g}; "
            f"T = {T:.4g} vs bound = {t_bound:.4g}"
        )
        if not override_smallness:
            raise SmallnessViolated(msg)
        warnings.warn("proceeding beyond the contraction guarantee: " + msg)

    K = phi_phys.K
    phi_arr = np.asarray(phi_phys.coeffs)
    nodes = quad_nodes
    V, deltas = None, None
    ts = None
    quad_error = math.inf
    for attempt in range(max_refinements + 1):
        ts_new = np.linspace(0.0, T, nodes + 1)
        h = ts_new[1] - ts_new[0]
        V_new, deltas_new = _picard_pass(phi_arr, K, ts_new, h, N_max, tol, max_iter)
        if V is not None:
            common = np.arange(0, len(ts_new), 2)
            quad_error = float(
                np.max(np.sqrt(np.sum(np.abs(V_new[common] - V) ** 2, axis=1)))
            )
        V, deltas, ts = V_new, deltas_new, ts_new
        if not refine_quadrature:
            quad_error = 0.0
            break
        if quad_error < tol / 10.0:
            break
        nodes *= 2
    if refine_quadrature and quad_error >= tol / 10.0 and max_refinements > 0:
        warnings.warn(
            f"quadrature refinement stalled at {quad_error:.3e} with {nodes} nodes"
        )

    states = tuple(
        SpectralState(K=K, coeffs=V[i], time=float(ts[i]), representation=INTERACTION)
        for i in range(len(ts))
    )
    traj = Trajectory(
        states=states, dt=float(ts[1] - ts[0]), t0=0.0, t1=float(T), scheme="picard"
    )
    factors = tuple(
        deltas[i + 1] / deltas[i] for i in range(len(deltas) - 1) if deltas[i] > 0
    )
    report = PicardReport(
        converged=True,
        iterations=len(deltas),
        deltas=tuple(deltas),
        contraction_factors=factors,
        delta1=d1,
        time_bound=t_bound,
        quad_nodes=len(ts) - 1,
        quad_error=quad_error if math.isfinite(quad_error) else 0.0,
        smallness_ok=smallness_ok,
        horizon_ok=horizon_ok,
        z_extension_used=z_is_extension(params),
        N_max=N_max,
        tail_bound=series_tail_bound(N_max, l2_norm(phi_phys)),
    )
    return traj, report
