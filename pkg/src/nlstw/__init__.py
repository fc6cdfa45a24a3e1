"""Traveling waves of defocusing NLS equations on periodic rectangles.

Pseudospectral constrained minimization for subsonic traveling waves with
nonvanishing conditions at infinity, KP-I lump computation for the
transonic limit, explicit comparison families, and identity-based
diagnostics that certify computed solutions.
"""

from .ansatz import (
    ModulationParams,
    TransonicParams,
    default_bump,
    modulation_ansatz,
    transonic_ansatz,
)
from .diagnostics import (
    IdentityReport,
    MultiplierReport,
    coupling_g,
    curve_checks,
    madelung_identities,
    multiplier_relation,
    multiplier_symbol,
    pohozaev,
    pohozaev_transverse,
)
from .errors import (
    ConfigError,
    DegenerateDirection,
    IterationDiverged,
    KineticAboveKInfinity,
    ModulusTooSmall,
    MultiplierNonnegative,
    NlstwError,
    NonZeroXMean,
    NonzeroWinding,
    NotConverged,
    PotentialBarrierStuck,
    PotentialNonnegativeEverywhere,
    PotentialNotNonnegative,
    RhoNonpositive,
    ZeroModeContamination,
)
from .fieldio import read_field, write_field
from .grid import (
    ComplexField,
    Grid,
    ScalarField,
    Spectrum,
    antiderivative_x,
    derivative,
    dilate,
    from_spectrum,
    integrate,
    reflect,
    resample,
    spectrum,
)
from .kp1 import (
    KPGroundState,
    default_seed,
    identity_residuals,
    kp_action,
    kp_residual,
    solve_kp_ground_state,
)
from .minimize import (
    CurveResult,
    FixedKinetic,
    FixedMomentum,
    MinimizationProblem,
    Regularize,
    SharpLocal,
    StationaryBubble,
    WaveSolution,
    bubble_seed,
    kinetic_seed,
    minimize_bubble,
    minimize_fixed_kinetic,
    minimize_fixed_momentum,
    minimize_sharp,
    momentum_seed,
    regularize,
    trace_curve,
)
from .physics import (
    A,
    B_c,
    CutoffPhi,
    D,
    Lifting,
    Nonlinearity,
    P_c,
    action_Ec,
    energy,
    extract_speed,
    functional_I,
    gl_energy,
    grad_E,
    grad_Q,
    kinetic,
    laplacian,
    lift,
    momentum,
    phase_gradient,
    pohozaev_boundary_terms,
    potential_integral,
    tw_residual,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
