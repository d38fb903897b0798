"""dnlslab: numerical laboratory for the quadratic derivative nonlinear
Schroedinger equation du/dt = i d_xx u + u d_x u on the circle, for
mean-zero truncated Fourier data.

Submodules: spectral (states, norms, constants), dynamics (RK4 and the
free propagator), normal_form (multilinear reduction operators and the
Picard solver), cole_hopf (gauge linearization and the exact solver),
invariants (the conserved sequence Q_k), blowup (the closed-form
large-data singularity), cli (the `dnls` driver).
"""

__version__ = "0.1.0"

from .spectral import (  # noqa: F401
    FLParams,
    GridField,
    SpectralState,
    Z_const,
    fl_norm,
    grid_to_state,
    grid_transform,
    l2_norm,
    make_state,
    mean_square_M,
    primitive_J,
    riemann_zeta,
    z_const,
    zero_state,
)
from .dynamics import (  # noqa: F401
    Trajectory,
    galilean_transform,
    integrate_rk4,
    linear_propagate,
    rhs_interaction,
    rhs_physical,
)
from .normal_form import (  # noqa: F401
    NFSeries,
    finite_nf_residual,
    modulation_phi,
    nf_I,
    nf_N,
    nf_R,
    nf_series,
    picard_solve,
)
from .cole_hopf import (  # noqa: F401
    ConditionReport,
    GaugeState,
    check_conditions,
    exact_solve,
    exact_trajectory,
    gauge0,
    gauge_full,
    inverse_gauge,
    winding_number,
)
from .invariants import InvariantTrace, Q_reference, compute_Q  # noqa: F401
from .blowup import (  # noqa: F401
    blowup_fields,
    blowup_norm_curve,
    blowup_residual,
)
