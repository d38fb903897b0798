"""Right-hand sides, RK4 time integration, the exact linear propagator,
and the Galilean transform for the truncated flow.

The evolution is  du/dt_k = -i k^2 u_k + (ik/2) sum_{k=k1+k2} u_{k1} u_{k2}
on mean-zero truncated states; the interaction form carries the diagonal
phases into the quadratic term, which removes the stiff linear part and is
the default integration variable.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .errors import BlowupSuspected, DomainError
from .spectral import (
    INTERACTION,
    PHYSICAL,
    FLParams,
    SpectralState,
    fl_norm,
    l2_norm,
)

OVERFLOW_GUARD = 1e8
MAX_STORED_STATES = 4096


@dataclass(frozen=True)
class Trajectory:
    """Uniformly sampled sequence of states of one flow.

    dt is the sample spacing (integration may substep); scheme tags the
    producer.  mean_offset carries the additive constant introduced by a
    Galilean transform; the states themselves stay mean-zero.
    """

    states: tuple
    dt: float
    t0: float
    t1: float
    scheme: str
    mean_offset: float = 0.0

    def __post_init__(self):
        if len(self.states) < 1:
            raise DomainError("trajectory needs at least one state")
        times = np.array([s.time for s in self.states])
        if len(times) > 1:
            gaps = np.diff(times)
            if np.any(gaps <= 0):
                raise DomainError("sample times must increase strictly")
            if np.max(np.abs(gaps - self.dt)) > 1e-9 * max(1.0, abs(self.dt)):
                raise DomainError("sample times must be uniformly spaced by dt")
        reprs = {s.representation for s in self.states}
        if len(reprs) != 1:
            raise DomainError("mixed representations in one trajectory")
        Ks = {s.K for s in self.states}
        if len(Ks) != 1:
            raise DomainError("mixed truncations in one trajectory")
        object.__setattr__(self, "states", tuple(self.states))

    def __len__(self):
        return len(self.states)

    def __getitem__(self, i):
        return self.states[i]

    @property
    def times(self):
        return np.array([s.time for s in self.states])

    @property
    def K(self):
        return self.states[0].K

    @property
    def representation(self):
        return self.states[0].representation

    def values(self):
        """(n_samples, 2K+1) coefficient matrix."""
        return np.array([s.coeffs for s in self.states])

    def as_physical(self):
        if self.representation == PHYSICAL:
            return self
        return replace(self, states=tuple(s.to_physical() for s in self.states))

    def as_interaction(self):
        if self.representation == INTERACTION:
            return self
        return replace(self, states=tuple(s.to_interaction() for s in self.states))

    def to_csv_rows(self):
        """Long format (t, k, re, im) in canonical frequency order."""
        from .spectral import canonical_order

        for s in self.states:
            ks = s.k_grid
            order = canonical_order(ks)
            for i in order:
                if ks[i] == 0:
                    continue
                c = s.coeffs[i]
                yield (s.time, int(ks[i]), c.real, c.imag)

    def norm_summary(self, fl_params=()):
        """Per-sample norms: always l2, plus any requested FL params."""
        rows = []
        for s in self.states:
            entry = {"t": s.time, "l2": l2_norm(s)}
            for prm in fl_params:
                entry[f"fl_s{prm.s:g}_p{prm.p:g}"] = fl_norm(s, prm)
            rows.append(entry)
        return rows


# ---------------------------------------------------------------------------
# right-hand sides
# ---------------------------------------------------------------------------


def rhs_physical(u):
    """du/dt values: -i k^2 u_k + (ik/2)(u * u)_k, truncated to |k| <= K.

    The quadratic convolution is exact (padded FFT or direct sum depending
    on the kernel backend); the k = 0 output is structurally absent since
    the prefactor ik vanishes there.
    """
    if u.representation != PHYSICAL:
        raise DomainError("rhs_physical expects the physical representation")
    k = u.k_grid.astype(np.float64)
    w = kernels.quad_conv(u.coeffs)
    dv = -1j * k * k * u.coeffs + 0.5j * k * w
    dv[u.K] = 0.0
    return replace(u, coeffs=dv)


def quad_zero_mode(u):
    """Diagnostic: zero mode of u*u (equals mean_square_M(u))."""
    return complex(kernels.quad_conv(u.coeffs)[u.K])


def rhs_interaction(v, t=None):
    """dv/dt_k = (ik/2) sum e^{i(k^2-k1^2-k2^2) t} v_{k1} v_{k2}.

    Evaluated as the phase conjugation of the physical right-hand side,
    e^{ik^2 t} (rhs_physical(u)_k + i k^2 u_k) with u_k = e^{-ik^2 t} v_k,
    which is the same sum term by term.
    """
    if v.representation != INTERACTION:
        raise DomainError("rhs_interaction expects the interaction representation")
    if t is None:
        t = v.time
    k = v.k_grid.astype(np.float64)
    phase = np.exp(-1j * k * k * t)
    u = phase * v.coeffs
    w = kernels.quad_conv(u)
    dv = np.conj(phase) * (0.5j * k) * w
    dv[v.K] = 0.0
    return replace(v, coeffs=dv, time=t)


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------


def _pick_stride(nsteps, max_stored):
    stride = max(1, -(-nsteps // (max_stored - 1)))
    while nsteps % stride != 0:
        stride += 1
    return stride


def integrate_rk4(
    v0,
    T,
    dt,
    stride=None,
    overflow_guard=OVERFLOW_GUARD,
    max_stored=MAX_STORED_STATES,
):
    """Classical RK4 over [t0, t0+T]; the state's representation selects the
    stepped equation (interaction by default removes the stiff diagonal).

    Samples are stored every ``stride`` steps (default: the smallest stride
    dividing the step count with at most ``max_stored`` states).  Raises
    BlowupSuspected if any coefficient magnitude exceeds overflow_guard;
    the exception carries the partial trajectory.
    """
    if dt <= 0 or T <= 0:
        raise DomainError("T and dt must be positive")
    nsteps = int(round(T / dt))
    if abs(nsteps * dt - T) > 1e-9 * max(1.0, T):
        raise DomainError(f"T={T} is not an integer multiple of dt={dt}")
    if stride is None:
        stride = _pick_stride(nsteps, max_stored)
    elif nsteps % stride != 0:
        raise DomainError(f"stride {stride} does not divide step count {nsteps}")
    interaction = v0.representation == INTERACTION
    samples, status, done = kernels.rk4_run(
        v0.coeffs, v0.time, dt, nsteps, stride, overflow_guard, interaction
    )
    sample_dt = stride * dt
    states = tuple(
        SpectralState(
            K=v0.K,
            coeffs=samples[i],
            time=v0.time + i * sample_dt,
            representation=v0.representation,
        )
        for i in range(samples.shape[0])
    )
    if status != 0:
        partial = None
        if len(states) > 1:
            partial = Trajectory(
                states=states,
                dt=sample_dt,
                t0=v0.time,
                t1=states[-1].time,
                scheme="rk4",
            )
        raise BlowupSuspected(
            f"coefficient exceeded overflow guard {overflow_guard:g} "
            f"at step {done} (t ~ {v0.time + done * dt:.6g})",
            trajectory=partial,
            time=v0.time + done * dt,
        )
    return Trajectory(
        states=states, dt=sample_dt, t0=v0.time, t1=v0.time + T, scheme="rk4"
    )


def linear_propagate(state, dt):
    """Free Schroedinger flow on raw coefficients: c_k <- e^{-i k^2 dt} c_k.

    Unitary on every FL norm; composes additively in dt.
    """
    k = state.k_grid.astype(np.float64)
    return replace(
        state, coeffs=np.exp(-1j * k * k * dt) * state.coeffs, time=state.time + dt
    )


# ---------------------------------------------------------------------------
# symmetry and residual diagnostics
# ---------------------------------------------------------------------------


def galilean_transform(traj, c):
    """u_c(t, x) = u(t, x + c t) + c.

    Realized spectrally as u_k e^{i k c t}; the additive constant is kept in
    mean_offset so the states remain mean-zero.
    """
    traj = traj.as_physical()
    states = []
    for s in traj.states:
        k = s.k_grid.astype(np.float64)
        states.append(replace(s, coeffs=np.exp(1j * k * c * s.time) * s.coeffs))
    return replace(traj, states=tuple(states), mean_offset=traj.mean_offset + c)


def dnls_residual(traj):
    """Centered finite-difference residual of the flow along a trajectory.

    At interior samples: (u_{i+1} - u_{i-1})/(2 dt) - [i d_xx u + u d_x u],
    including the mean_offset constant via its extra transport term
    i k c u_k.  Returns (times, per-sample l2 residual norms).
    """
    traj = traj.as_physical()
    if len(traj) < 3:
        raise DomainError("need at least three samples for a centered residual")
    h = traj.dt
    c = traj.mean_offset
    times, norms = [], []
    for i in range(1, len(traj) - 1):
        s = traj.states[i]
        fd = (traj.states[i + 1].coeffs - traj.states[i - 1].coeffs) / (2.0 * h)
        rhs = rhs_physical(s).coeffs
        if c != 0.0:
            k = s.k_grid.astype(np.float64)
            rhs = rhs + 1j * k * c * s.coeffs
        times.append(s.time)
        norms.append(float(np.linalg.norm(fd - rhs)))
    return np.array(times), np.array(norms)


def sup_l2_distance(traj_a, traj_b):
    """max over common sample times of the l2 distance, physical side."""
    a = traj_a.as_physical()
    b = traj_b.as_physical()
    ta = {round(t, 12): i for i, t in enumerate(a.times)}
    common = [(i, j) for j, t in enumerate(b.times) if (i := ta.get(round(t, 12))) is not None]
    if not common:
        raise DomainError("trajectories share no sample times")
    return max(
        float(np.linalg.norm(a.states[i].coeffs - b.states[j].coeffs)) for i, j in common
    )


def fl_params_or_default(params):
    return params if params is not None else FLParams(0.0, 2.0)


def observed_order(errors):
    """log2 ratios of consecutive errors (step-halving Richardson orders)."""
    errors = [float(e) for e in errors]
    return [math.log2(errors[i] / errors[i + 1]) for i in range(len(errors) - 1)]
