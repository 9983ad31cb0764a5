"""Optimal hierarchical pilot reuse for multi-cell massive MIMO."""

__version__ = "0.1.0"

from .assignment import (  # noqa: E402
    BreakpointTable,
    PilotRealization,
    PilotVector,
    TransitionVector,
    breakpoints,
    brute_force_optimal,
    chi,
    closed_form_sum_opt,
    corollary_step,
    enumerate_valid,
    from_transition,
    is_valid,
    optimal_assignment,
    pilot_length,
    realize,
    to_transition,
    valid_lengths,
)
from .channel import (  # noqa: E402
    DepthRateTable,
    FadingParams,
    asymptotic_rate,
    estimate_depth_rates,
    linearity_residual,
)
from .exceptions import ConfigurationError, DomainError, ValidationError  # noqa: E402
from .lattice import AxialCoord, CosetId, TorusLattice, build_lattice  # noqa: E402
from .netrate import (  # noqa: E402
    NetRateCurve,
    build_curve,
    c_net,
    c_sum,
    crossover_threshold,
    net_rate_per_user,
    random_assignment_net_rate,
)
