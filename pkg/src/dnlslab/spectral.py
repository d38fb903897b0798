"""Truncated mean-zero Fourier states on the circle.

States live on frequencies 1 <= |k| <= K with the zero mode structurally
absent (the k = 0 slot of the coefficient array is pinned to zero).
Coefficients follow the convention f_k = (1/2pi) int f(x) e^{-ikx} dx, so
the l^2 norm of the coefficients equals the L^2 norm under the normalized
measure dx/2pi.  All reductions run in a fixed order (ascending |k|,
negative before positive) with numpy's pairwise accumulation, so repeated
runs are bit-identical.
"""

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import AliasingDetected, DomainError, IndexOutOfRange, MeanNotZero

PHYSICAL = "u"
INTERACTION = "v"

MEAN_TOL = 1e-10
ALIAS_TOL = 1e-9
OVERSAMPLING = 4


def next_pow2(n):
    m = 1
    while m < n:
        m *= 2
    return m


def default_grid_size(K):
    """Power-of-two grid with oversampling >= 4x the state bandwidth."""
    return next_pow2(OVERSAMPLING * (2 * K + 1))


def canonical_order(ks):
    """Indices sorting frequencies ascending in |k|, negative first at ties.

    The zero mode, when present, sorts first.
    """
    ks = np.asarray(ks)
    return np.lexsort((ks > 0, np.abs(ks)))


@dataclass(frozen=True)
class SpectralState:
    """Mean-zero truncated Fourier data of the solution or its interaction
    representation at one time.

    coeffs[i] is the coefficient of e^{ikx} with k = i - K; coeffs[K] = 0.
    """

    K: int
    coeffs: np.ndarray
    time: float = 0.0
    representation: str = PHYSICAL

    def __post_init__(self):
        if self.K < 1:
            raise DomainError(f"truncation radius must be positive, got {self.K}")
        if self.representation not in (PHYSICAL, INTERACTION):
            raise DomainError(f"unknown representation {self.representation!r}")
        c = np.ascontiguousarray(self.coeffs, dtype=np.complex128)
        if c.shape != (2 * self.K + 1,):
            raise DomainError(
                f"coefficient array must have length {2 * self.K + 1}, got {c.shape}"
            )
        if not np.all(np.isfinite(c.view(np.float64))):
            raise DomainError("coefficients must be finite")
        if c[self.K] != 0:
            raise MeanNotZero(f"zero mode must be absent, got {c[self.K]}")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    # -- indexing ---------------------------------------------------------
    @property
    def k_grid(self):
        return np.arange(-self.K, self.K + 1)

    def __getitem__(self, k):
        if not (1 <= abs(int(k)) <= self.K):
            raise IndexOutOfRange(f"|k| must lie in [1, {self.K}], got {k}")
        return complex(self.coeffs[int(k) + self.K])

    # -- representation ---------------------------------------------------
    def to_interaction(self):
        """v_k = e^{i k^2 t} u_k (identity if already interaction)."""
        if self.representation == INTERACTION:
            return self
        k = self.k_grid.astype(np.float64)
        return replace(
            self,
            coeffs=np.exp(1j * k * k * self.time) * self.coeffs,
            representation=INTERACTION,
        )

    def to_physical(self):
        if self.representation == PHYSICAL:
            return self
        k = self.k_grid.astype(np.float64)
        return replace(
            self,
            coeffs=np.exp(-1j * k * k * self.time) * self.coeffs,
            representation=PHYSICAL,
        )

    def with_time(self, time):
        return replace(self, time=float(time))

    # -- serialization ----------------------------------------------------
    def to_json(self):
        order = canonical_order(self.k_grid)
        rows = [
            [int(k), float(c.real), float(c.imag)]
            for k, c in zip(self.k_grid[order], self.coeffs[order])
            if k != 0
        ]
        return {
            "K": self.K,
            "time": self.time,
            "repr": self.representation,
            "coeffs": rows,
        }

    @classmethod
    def from_json(cls, obj):
        coeffs = {int(k): complex(re, im) for k, re, im in obj["coeffs"]}
        return make_state(
            coeffs, int(obj["K"]), time=float(obj["time"]), representation=obj["repr"]
        )


@dataclass(frozen=True)
class GridField:
    """Complex samples at x_j = 2 pi j / N, j = 0..N-1."""

    N: int
    samples: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        s = np.ascontiguousarray(self.samples, dtype=np.complex128)
        if s.shape != (self.N,):
            raise DomainError(f"need {self.N} samples, got {s.shape}")
        s = s.copy()
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def x(self):
        return 2.0 * np.pi * np.arange(self.N) / self.N

    def to_csv_rows(self):
        x = self.x
        for j in range(self.N):
            yield (j, x[j], self.samples[j].real, self.samples[j].imag)


def make_state(coeffs, K, time=0.0, representation=PHYSICAL):
    """Build a state from a {k: value} map; unspecified modes are zero.

    Raises IndexOutOfRange for k = 0 or |k| > K.
    """
    arr = np.zeros(2 * K + 1, dtype=np.complex128)
    for k, val in coeffs.items():
        k = int(k)
        if k == 0 or abs(k) > K:
            raise IndexOutOfRange(f"index {k} outside 1 <= |k| <= {K}")
        arr[k + K] = val
    return SpectralState(K=K, coeffs=arr, time=time, representation=representation)


def zero_state(K, time=0.0, representation=PHYSICAL):
    return make_state({}, K, time=time, representation=representation)


# ---------------------------------------------------------------------------
# grid transforms
# ---------------------------------------------------------------------------


def grid_transform(state, N=None):
    """Samples f(x_j) = sum_k c_k e^{i k x_j} on a uniform grid of size N."""
    if N is None:
        N = default_grid_size(state.K)
    if N < 2 * state.K + 2:
        raise DomainError(f"grid size {N} too small for K={state.K}")
    buf = np.zeros(N, dtype=np.complex128)
    buf[state.k_grid % N] = state.coeffs
    return GridField(N=N, samples=np.fft.ifft(buf) * N, time=state.time)


def grid_to_state(
    field,
    K,
    representation=PHYSICAL,
    mean_tol=MEAN_TOL,
    alias_tol=ALIAS_TOL,
    allow_truncation=False,
    strip_mean=False,
):
    """Extract c_k = (1/N) sum_j f(x_j) e^{-i k x_j} for 1 <= |k| <= K.

    The zero mode is discarded only when its magnitude is at most mean_tol
    (or strip_mean is set); energy in the resolved band above K counts as
    aliasing unless allow_truncation is set.  Content beyond the grid's
    Nyquist frequency is invisible here and must be certified by the caller.
    """
    N = field.N
    if N < 2 * K + 2:
        raise DomainError(f"grid size {N} too small for K={K}")
    c = np.fft.fft(field.samples) / N
    if not strip_mean and abs(c[0]) > mean_tol:
        raise MeanNotZero(f"zero mode magnitude {abs(c[0]):.3e} exceeds {mean_tol:.1e}")
    kk = np.fft.fftfreq(N, 1.0 / N).astype(int)
    total = math.sqrt(float(np.sum(np.abs(c[kk != 0]) ** 2)))
    tail = math.sqrt(float(np.sum(np.abs(c[np.abs(kk) > K]) ** 2)))
    if total > 0 and tail / total > alias_tol and not allow_truncation:
        raise AliasingDetected(
            f"relative tail energy {tail / total:.3e} above K={K} exceeds {alias_tol:.1e}"
        )
    ks = np.arange(-K, K + 1)
    arr = c[ks % N].copy()
    arr[K] = 0.0
    return SpectralState(K=K, coeffs=arr, time=field.time, representation=representation)


# ---------------------------------------------------------------------------
# Fourier-Lebesgue norms and constants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FLParams:
    """Regularity/integrability pair (s, p) selecting a Fourier-Lebesgue norm.

    regime: "main" (s > 1/2 - 1/p, p > 2), "l2" (s >= 0, p = 2),
    "constants-only" (s > -1/p, p > 1, or p = 1 with s >= -1), else "none".
    The well-posedness machinery accepts main and l2; the norm itself and
    the constant Z accept constants-only as well.
    """

    s: float
    p: float

    def __post_init__(self):
        if not (self.p >= 1.0):
            raise DomainError(f"p must lie in [1, inf], got {self.p}")
        if not np.isfinite(self.s):
            raise DomainError(f"s must be finite, got {self.s}")

    @property
    def regime(self):
        if self.p > 2 and self.s > 0.5 - 1.0 / self.p:
            return "main"
        if self.p == 2 and self.s >= 0:
            return "l2"
        if (self.p > 1 and self.s > -1.0 / self.p) or (self.p == 1 and self.s >= -1):
            return "constants-only"
        return "none"

    @property
    def conjugate_p(self):
        if self.p == 1:
            return math.inf
        if math.isinf(self.p):
            return 1.0
        return self.p / (self.p - 1.0)


def fl_norm(state, params):
    """|| |k|^s c_k ||_{l^p} over the truncated nonzero frequencies.

    Any regime is accepted.  Terms are accumulated pairwise in canonical
    order; p = inf takes the sup.
    """
    ks = state.k_grid
    order = canonical_order(ks)
    order = order[ks[order] != 0]
    k = np.abs(ks[order]).astype(np.float64)
    terms = k**params.s * np.abs(state.coeffs[order])
    if math.isinf(params.p):
        return float(np.max(terms)) if terms.size else 0.0
    return float(np.sum(terms**params.p) ** (1.0 / params.p))


def l2_norm(state):
    return fl_norm(state, FLParams(0.0, 2.0))


_BERNOULLI_TERMS = ((1.0 / 6.0, 2), (-1.0 / 30.0, 4), (1.0 / 42.0, 6))
_B8_OVER_8FACT = (1.0 / 30.0) / math.factorial(8)


def riemann_zeta(tau, abs_tol=1e-10):
    """zeta(tau) for tau > 1, certified to abs_tol absolute.

    Partial sum to an adaptive cutoff M plus the integral tail
    M^{1-tau}/(tau-1) sharpened by Euler-Maclaurin corrections; the
    remainder is bounded by the first omitted correction term, and M
    doubles until that bound is below abs_tol/10.  (A plain integral
    bracket would need M ~ 1e10 for tau near 1.)
    """
    tau = float(tau)
    if tau <= 1.0 + 1e-6:
        raise DomainError(f"tau must exceed 1 + 1e-6, got {tau}")
    M = 32
    while True:
        rising = 1.0
        for i in range(7):
            rising *= tau + i
        remainder = _B8_OVER_8FACT * rising * M ** (-(tau + 7.0))
        if remainder < abs_tol / 10.0 or M > 2**22:
            break
        M *= 2
    partial = math.fsum(k ** (-tau) for k in range(1, M + 1))
    value = partial + M ** (1.0 - tau) / (tau - 1.0) - 0.5 * M ** (-tau)
    for b2j, twoj in _BERNOULLI_TERMS:
        rising = 1.0
        for i in range(twoj - 1):
            rising *= tau + i
        value += (b2j / math.factorial(twoj)) * rising * M ** (-(tau + twoj - 1.0))
    return value


def Z_const(params):
    """|| |k|^{-(s+1)} ||_{l^{p'}} = [2 zeta((s+1) p')]^{1/p'}; equals 1 when p = 1.

    Defined for s > -1/p with p > 1, and for s >= -1 with p = 1.
    """
    s, p = params.s, params.p
    if p == 1:
        if s >= -1:
            return 1.0
        raise DomainError(f"Z undefined for p=1, s={s} < -1")
    if not s > -1.0 / p:
        raise DomainError(f"Z undefined for s={s} <= -1/p={-1.0 / p}")
    pp = params.conjugate_p
    return float((2.0 * riemann_zeta((s + 1.0) * pp)) ** (1.0 / pp))


def z_const(params):
    """Embedding constant with ||f||_{L^2} <= z ||f||_{FL^{s,p}} for mean-zero f.

    For p > 2 with s > 1/2 - 1/p this is Z at (s-1, 2p/(p+2)); for p = 2
    with s >= 0 the embedding is the identity on l^2 weights and z := 1.
    """
    s, p = params.s, params.p
    if p == 2 and s >= 0:
        return 1.0
    if p > 2 and s > 0.5 - 1.0 / p:
        return Z_const(FLParams(s - 1.0, 2.0 * p / (p + 2.0)))
    raise DomainError(f"z undefined for (s, p) = ({s}, {p})")


def z_is_extension(params):
    """True when z_const falls back to the identity-embedding value z = 1."""
    return params.p == 2 and params.s >= 0


# ---------------------------------------------------------------------------
# elementary spectral operations
# ---------------------------------------------------------------------------


def primitive_J(state):
    """Mean-zero primitive: coefficient-wise division by ik.

    The spectral derivative (multiplication by ik) inverts it exactly.
    """
    k = state.k_grid.astype(np.float64)
    k[state.K] = 1.0  # dummy; the zero slot stays zero
    c = state.coeffs / (1j * k)
    c[state.K] = 0.0
    return replace(state, coeffs=c)


def spectral_derivative(state):
    """Coefficient-wise multiplication by ik."""
    k = state.k_grid.astype(np.float64)
    return replace(state, coeffs=1j * k * state.coeffs)


def mean_square_M(state):
    """M(u) = P_0[u^2] = sum_m u_m u_{-m} (not the squared L^2 norm).

    Requires the physical representation; the interaction-side value
    sum_m e^{-2i m^2 t} v_m v_{-m} is obtained by converting first.
    """
    if state.representation != PHYSICAL:
        raise DomainError("mean_square_M expects the physical representation")
    ks = state.k_grid
    order = canonical_order(ks)
    order = order[ks[order] != 0]
    prod = state.coeffs * state.coeffs[::-1]  # index k pairs with -k
    return complex(np.sum(prod[order]))


def random_state(K, rng, decay=1.0, target_norm=None, params=None, time=0.0):
    """Seeded random mean-zero state with |c_k| ~ |k|^{-decay}.

    When target_norm is given the state is rescaled to that FL norm
    (params defaults to (0, 2)).
    """
    ks = np.arange(-K, K + 1)
    c = (rng.standard_normal(2 * K + 1) + 1j * rng.standard_normal(2 * K + 1)) / np.sqrt(2)
    kk = np.abs(ks).astype(np.float64)
    kk[K] = 1.0
    c = c * kk ** (-decay)
    c[K] = 0.0
    state = SpectralState(K=K, coeffs=c, time=time, representation=PHYSICAL)
    if target_norm is not None:
        params = params or FLParams(0.0, 2.0)
        norm = fl_norm(state, params)
        if norm == 0.0:
            raise DomainError("cannot normalize the zero state")
        state = replace(state, coeffs=state.coeffs * (target_norm / norm))
    return state


def state_to_json_str(state):
    return json.dumps(state.to_json(), sort_keys=True)
