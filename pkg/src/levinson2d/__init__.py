"""Phase shifts, bound states and Levinson's theorem for 2D radial potentials.

Units: 2*mu/hbar^2 = 1, so E = k^2 above threshold and E = -kappa^2 below.
"""

from ._kernels import BACKEND
from .errors import (
    ConvergenceError,
    DomainError,
    PoleError,
    UnsupportedChannelError,
    UnwrapError,
)
from .potential import (
    PotentialModel,
    SquareWell,
    StepStack,
    TailPotential,
    TruncatedGaussian,
    core_plus_inverse_square,
    effective_order,
    inverse_power_tail,
    square_well,
    step_stack,
    tail_descriptor,
    truncated_gaussian,
)
from .radial import (
    ExpansionCoefficients,
    LogDerivativeSample,
    StepControl,
    expansion_at_zero,
    integrate_interior,
    zero_energy_nodes,
)
from .scattering import (
    PhaseCurve,
    asymptotic_tan_phase,
    exterior_log_derivative,
    phase_by_lambda_continuation,
    phase_curve,
    tan_phase,
    zero_momentum_limit,
    zero_momentum_phase,
)
from .spectrum import (
    BoundSpectrum,
    LevinsonReport,
    classify_threshold,
    count_via_nodes,
    find_bound_states,
    levinson_verdict,
)

__version__ = "0.1.0"
