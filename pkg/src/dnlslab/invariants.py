"""Dynamically invariant quantities built from the boundary series.

Q_k(t) = e^{-(i/4) int_0^t M(u) dt'} sum_{n>=1} N^n_k(v(t)) is constant
along solutions, and equals 2k times the k-th coefficient of the static
gauge of the initial data (the series is the Taylor expansion of the
gauge exponential).  Q_k is not a pointwise conservation law: its value
uses the solution on all of [0, t] through the integral prefactor.
"""

from dataclasses import dataclass

import numpy as np

from .cole_hopf import gauge0
from .errors import DomainError, TailTooLarge
from .normal_form import M_interaction, _cumulative_simpson, _nf_sum_fast, series_tail_bound
from .spectral import l2_norm

Q_TOL = 1e-10


@dataclass(frozen=True)
class InvariantTrace:
    """Q_k along one trajectory with its gauge-side reference value."""

    k: int
    times: np.ndarray
    values: np.ndarray
    reference: complex
    drift: float
    N_max: int
    quadrature: dict

    def to_csv_rows(self):
        for t, q in zip(self.times, self.values):
            yield (self.k, t, q.real, q.imag, abs(q - self.reference))

    def summary(self):
        return {
            "k": self.k,
            "drift": self.drift,
            "reference": [self.reference.real, self.reference.imag],
            "N_max": self.N_max,
            **self.quadrature,
        }


def Q_reference(phi, k):
    """2k times the k-th coefficient of the static gauge of phi.

    For data at a nonzero base time the interaction phase e^{i k^2 t0}
    aligns the gauge coefficient with the series value.
    """
    phi = phi.to_physical()
    W0 = gauge0(phi)
    return 2.0 * k * np.exp(1j * float(k) ** 2 * phi.time) * W0.coefficient(k)


def _prefactors(traj):
    """e^{-(i/4) int_{t0}^{t_i} M(u) dt'} by cumulative Simpson over samples,
    with a stride-halving error estimate."""
    phys = traj.as_physical()
    from .spectral import mean_square_M

    Ms = np.array([mean_square_M(s) for s in phys.states])
    IM = _cumulative_simpson(Ms, traj.dt)
    quad_err = 0.0
    if len(Ms) >= 5 and (len(Ms) - 1) % 2 == 0:
        IM_coarse = _cumulative_simpson(Ms[::2], 2.0 * traj.dt)
        quad_err = float(np.max(np.abs(IM[::2] - IM_coarse))) / 15.0
    return np.exp(-0.25j * IM), quad_err


def compute_Q_table(traj, ks, N_max=10, q_tol=Q_TOL):
    """InvariantTraces for several k sharing one series sweep per sample."""
    traj_v = traj.as_interaction()
    K = traj_v.K
    ks = [int(k) for k in ks]
    if any(k == 0 or abs(k) > K for k in ks):
        raise DomainError("requested frequencies must satisfy 1 <= |k| <= K")
    C0 = max(l2_norm(s) for s in traj_v.states)
    tail = series_tail_bound(N_max, C0)
    if tail > q_tol:
        raise TailTooLarge(
            f"series tail bound {tail:.3e} at N_max={N_max} exceeds q_tol={q_tol:.1e}"
        )
    pref, quad_err = _prefactors(traj)
    series = np.array(
        [
            _nf_sum_fast(s.coeffs, s.time, N_max, K, K, n_from=1)
            for s in traj_v.states
        ]
    )
    Q = pref[:, None] * series
    phi0 = traj.as_physical().states[0]
    W0 = gauge0(phi0)
    quadrature = {
        "quad_rule": "cumulative-simpson",
        "quad_error": quad_err,
        "tail_bound": tail,
        "n_samples": len(traj),
    }
    out = []
    for k in ks:
        values = Q[:, k + K]
        ref = complex(
            2.0 * k * np.exp(1j * float(k) ** 2 * phi0.time) * W0.coefficient(k)
        )
        out.append(
            InvariantTrace(
                k=k,
                times=traj_v.times,
                values=values,
                reference=ref,
                drift=float(np.max(np.abs(values - ref))),
                N_max=N_max,
                quadrature=quadrature,
            )
        )
    return out


def compute_Q(traj, k, N_max=10, q_tol=Q_TOL):
    """Q_k along a physical trajectory, with drift against the gauge value."""
    return compute_Q_table(traj, [k], N_max=N_max, q_tol=q_tol)[0]


def free_evolution_view(trace):
    """q_k(t) = e^{-i k^2 t} Q_k(t); constancy of Q makes q a free solution."""
    k2 = float(trace.k) ** 2
    return np.exp(-1j * k2 * trace.times) * trace.values
