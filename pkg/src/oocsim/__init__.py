"""Distributed optimal output consensus over weight-unbalanced digraphs.

Heterogeneous linear agents coupled through a strongly connected directed
graph drive their outputs to the minimizer of the summed local costs.  The
package provides the graph and plant machinery, the two distributed control
laws (state feedback and observer-based output feedback), a deterministic
closed-loop simulator with convergence metrics, built-in benchmark
scenarios, and a CLI.
"""

from .controller import (
    ControllerState,
    GainCheck,
    GlobalGains,
    check_gain_conditions,
    gain_condition_margins,
    init_controller_states,
    output_feedback_derivatives,
    state_feedback_derivatives,
    suggest_gains,
)
from .costexpr import CostExpr, parse_cost_expression
from .costmodel import (
    CostFunction,
    centralized_minimizer,
    estimate_convexity_constants,
    expression_cost,
    quadratic_cost,
)
from .errors import (
    BadIndex,
    ConfigOverridesV0,
    DomainError,
    DuplicateEdge,
    NoConvergence,
    NonConvexDetected,
    NotDetectable,
    NotHurwitz,
    NotPositiveDefinite,
    NotStabilizable,
    NotStronglyConnected,
    NullSpaceDegenerate,
    NumericalBlowup,
    OocError,
    ParseError,
    SelfLoop,
    Unsolvable,
    ValidationError,
    ZGuardViolated,
)
from .netgraph import (
    Digraph,
    SpectralInfo,
    build_digraph,
    is_strongly_connected,
    kron,
    laplacian,
    spectral_info,
    vec,
)
from .plantmodel import (
    AgentPlant,
    GainSet,
    SolutionTriplet,
    check_regulation_rank,
    solve_regulation_equations,
    synthesize_observer_gain,
    synthesize_stabilizing_gain,
    triplet_residual,
    validate_gains,
)
from .policy import DEFAULT, NumericPolicy
from .scenario_io import emit_scenario, load_scenario
from .scenarios import builtin_scenario, example1, example2
from .simulator import (
    AssembledOde,
    Metrics,
    Scenario,
    StateLayout,
    Trajectory,
    assemble,
    compute_metrics,
    fit_log_decay,
    integrate,
    output_error,
    run_scenario,
    scenario_constants,
    settling_time,
)

__version__ = "0.1.0"
