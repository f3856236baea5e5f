"""Built-in benchmark scenarios, generated from code constants.

Two catalogues ship with the library:

* ``example1`` -- four RLC circuit agents on a directed four-node loop with
  quadratic costs.
* ``example2`` -- six heterogeneous agents (double integrators, second-order
  plants, and third-order plants) on a weight-unbalanced six-node digraph
  with a mixed catalogue of nonquadratic costs, plus three coupling-gain
  presets for convergence comparisons.

Both carry a ``declared_minimizer``: the value stated in the original
benchmark definition.  For ``example2`` the oracle agrees with it; for
``example1`` the declared 1.5 is inconsistent with the stated quadratics
(their gradients sum to 4 y - 3, so the true minimizer is 0.75) and run
reports flag the mismatch.  The oracle value is authoritative throughout.
"""

import numpy as np

from .controller import GlobalGains
from .costmodel import expression_cost, quadratic_cost
from .errors import ValidationError
from .netgraph import build_digraph
from .plantmodel import AgentPlant
from .simulator import Scenario

# ---------------------------------------------------------------------------
# example1: RLC circuit agents
# ---------------------------------------------------------------------------

EXAMPLE1_EDGES = (
    (3, 1, 1.0),
    (1, 2, 1.0),
    (2, 3, 1.0),
    (3, 4, 1.0),
    (4, 2, 1.0),
)

# (R1, R2, L, C1, C2) per agent
EXAMPLE1_RLC_PARAMETERS = (
    (2.0, 1.0, 3.0, 1.0, 2.0),
    (1.0, 2.0, 2.0, 3.0, 1.0),
    (0.5, 2.0, 1.0, 0.5, 3.0),
    (3.0, 0.5, 2.0, 1.0, 0.5),
)

# quadratic costs a y^2 + b y + c
EXAMPLE1_COSTS = (
    (0.2, -2.0, 1.0),
    (0.4, 1.0, 2.0),
    (0.6, -3.0, -1.0),
    (0.8, 1.0, 1.0),
)

# Reference data shipped with the benchmark definition.  Both sets fail
# verification against the stated plants: K[0] leaves A - B K with an
# eigenvalue at +0.072, and the Upsilon of triplet[0] cannot satisfy
# B Upsilon = Psi in rows 2-3.  They are kept only as documented fixtures;
# the built-in scenario synthesizes its own gains and solves its own
# triplets instead.
EXAMPLE1_REFERENCE_K = (
    np.array([[1.0, 2.0, -2.0], [-1.0, 0.0, 1.0]]),
    np.array([[0.5, 2.0, -1.0], [-2.0, 0.0, 2.0]]),
    np.array([[2.0, -1.0, -2.0], [0.0, -3.0, 3.0]]),
    np.array([[-2.0, 1.0, 2.0], [0.0, -1.0, 2.0]]),
)

EXAMPLE1_REFERENCE_TRIPLETS = (
    (np.array([[8.0], [-1.0]]), np.array([[-1.0], [0.5]]),
     np.array([[1.0], [1.0], [-0.5]])),
    (np.array([[0.5], [1.5]]), np.array([[-1.0], [-1.5]]),
     np.array([[1.0], [-0.5], [1.5]])),
    (np.array([[0.8], [-0.6]]), np.array([[-1.0], [0.2]]),
     np.array([[1.0], [1.2], [-0.2]])),
    (np.array([[7.5], [-0.5]]), np.array([[-1.0], [1.0]]),
     np.array([[1.0], [0.5], [-1.0]])),
)

EXAMPLE1_DECLARED_MINIMIZER = 1.5


def rlc_plant(r1, r2, l, c1, c2):
    """State-space model of one RLC circuit agent.

    States: the two capacitor voltages and the inductor current; inputs: a
    voltage source and a current source; output: the first capacitor voltage.
    """
    A = np.array([
        [-1.0 / (c1 * r1), 0.0, -1.0 / c1],
        [0.0, 0.0, 1.0 / c2],
        [1.0 / l, -1.0 / l, -r2 / l],
    ])
    B = np.array([
        [1.0 / (c1 * r1), 1.0 / c1],
        [0.0, -1.0 / c2],
        [0.0, 1.0 / l],
    ])
    C = np.array([[1.0, 0.0, 0.0]])
    return AgentPlant(A=A, B=B, C=C)


def example1_plants():
    return [rlc_plant(*params) for params in EXAMPLE1_RLC_PARAMETERS]


def example1():
    """Four RLC agents with quadratic costs on a directed loop."""
    graph = build_digraph(EXAMPLE1_EDGES, n=4)
    costs = [quadratic_cost([[a]], [b], c) for a, b, c in EXAMPLE1_COSTS]
    box = (-10.0, 10.0)
    return Scenario(
        name="example1",
        graph=graph,
        plants=example1_plants(),
        costs=costs,
        coupling=GlobalGains(8.0, 8.0),
        mode="state",
        horizon=50.0,
        step=1e-3,
        stride=10,
        seed=1,
        tolerance=1e-2,
        domain_box=box,
        declared_minimizer=EXAMPLE1_DECLARED_MINIMIZER,
        cost_specs=[
            {"kind": "quadratic", "Q": np.array([[a]]), "b": np.array([b]),
             "c": c, "box": box}
            for a, b, c in EXAMPLE1_COSTS
        ],
    )


# ---------------------------------------------------------------------------
# example2: six heterogeneous agents on a weight-unbalanced digraph
# ---------------------------------------------------------------------------

EXAMPLE2_EDGES = (
    (1, 3, 1.0),
    (2, 1, 1.0),
    (2, 4, 1.0),
    (3, 2, 1.0),
    (4, 5, 1.0),
    (5, 6, 1.0),
    (6, 3, 1.0),
)

EXAMPLE2_COST_EXPRESSIONS = (
    "sin(0.2*y - (pi/2))",
    "0.2*cos(ln(y^2 + 4) - 0.2)",
    "0.1*(y + 0.3)^2 + 0.2*(y - 2)^2",
    "0.4*y^2*ln(5 + y^2)",
    "0.2*y^2*(ln(y^2 + 1) + 1)",
    "0.3*y^2/sqrt(y^2 + 5)",
)

EXAMPLE2_DECLARED_MINIMIZER = 0.286

EXAMPLE2_PRESETS = {
    "g8_1": (8.0, 1.0),
    "g8_8": (8.0, 8.0),
    "g20_8": (20.0, 8.0),
}

_A12 = np.array([[0.0, 1.0], [0.0, 0.0]])
_B12 = np.array([[0.0, 1.0], [1.0, -2.0]])
_C12 = np.array([[1.0, 1.0]])
_A34 = np.array([[0.0, -1.0], [1.0, -2.0]])
_B34 = np.array([[1.0, 0.0], [3.0, -1.0]])
_C34 = np.array([[-1.0, 1.0]])
_A56 = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.5, 1.0, -2.0]])
_B56 = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]])
_C56 = np.array([[1.0, -1.0, 1.0]])

EXAMPLE2_K = (
    np.array([[3.0, 5.0], [1.5, 1.0]]),
    np.array([[3.0, 5.0], [1.5, 1.0]]),
    np.array([[0.75, -1.0], [1.25, -4.0]]),
    np.array([[0.75, -1.0], [1.25, -4.0]]),
    np.array([[2.167, 1.0, 0.333], [0.0, 3.0, 1.0]]),
    np.array([[2.167, 1.0, 0.333], [0.0, 3.0, 1.0]]),
)

EXAMPLE2_H = (
    np.array([[1.0], [2.0]]),
    np.array([[1.0], [2.0]]),
    np.array([[-2.0], [-1.0]]),
    np.array([[-2.0], [-1.0]]),
    np.array([[4.0], [3.0], [2.0]]),
    np.array([[4.0], [3.0], [2.0]]),
)

# These triplets satisfy all three regulation equations exactly.
EXAMPLE2_REFERENCE_TRIPLETS = (
    (np.array([[1.5], [0.5]]), np.array([[1.0], [0.5]]), np.array([[0.5], [0.5]])),
    (np.array([[1.5], [0.5]]), np.array([[1.0], [0.5]]), np.array([[0.5], [0.5]])),
    (np.array([[-0.5], [-2.0]]), np.array([[-0.5], [0.0]]), np.array([[-0.5], [0.5]])),
    (np.array([[-0.5], [-2.0]]), np.array([[-0.5], [0.0]]), np.array([[-0.5], [0.5]])),
    (np.array([[0.0], [-1.0]]), np.array([[-1.0], [0.0]]), np.array([[0.0], [-1.0], [0.0]])),
    (np.array([[0.0], [-1.0]]), np.array([[-1.0], [0.0]]), np.array([[0.0], [-1.0], [0.0]])),
)


def example2_plants():
    return [
        AgentPlant(A=_A12, B=_B12, C=_C12),
        AgentPlant(A=_A12, B=_B12, C=_C12),
        AgentPlant(A=_A34, B=_B34, C=_C34),
        AgentPlant(A=_A34, B=_B34, C=_C34),
        AgentPlant(A=_A56, B=_B56, C=_C56),
        AgentPlant(A=_A56, B=_B56, C=_C56),
    ]


def example2(preset="g8_1", mode="state"):
    """Six heterogeneous agents with nonquadratic costs and gain presets."""
    if preset not in EXAMPLE2_PRESETS:
        raise ValidationError(
            f"unknown gain preset {preset!r}; have {sorted(EXAMPLE2_PRESETS)}"
        )
    graph = build_digraph(EXAMPLE2_EDGES, n=6)
    box = (-10.0, 10.0)
    costs = [expression_cost(text, box=box) for text in EXAMPLE2_COST_EXPRESSIONS]
    g1, g2 = EXAMPLE2_PRESETS[preset]
    return Scenario(
        name="example2",
        graph=graph,
        plants=example2_plants(),
        costs=costs,
        coupling=GlobalGains(g1, g2),
        mode=mode,
        triplets=list(EXAMPLE2_REFERENCE_TRIPLETS),
        K=list(EXAMPLE2_K),
        H=list(EXAMPLE2_H),
        horizon=40.0,
        step=1e-3,
        stride=10,
        seed=2,
        tolerance=5e-3,
        domain_box=box,
        declared_minimizer=EXAMPLE2_DECLARED_MINIMIZER,
        gain_presets=dict(EXAMPLE2_PRESETS),
        cost_specs=[
            {"kind": "expr", "expr": text, "box": box}
            for text in EXAMPLE2_COST_EXPRESSIONS
        ],
    )


BUILTIN = {
    "example1": example1,
    "example2": example2,
}


def builtin_scenario(name, **kwargs):
    """Look up a built-in scenario by name."""
    if name not in BUILTIN:
        raise ValidationError(f"unknown builtin scenario {name!r}; have {sorted(BUILTIN)}")
    return BUILTIN[name](**kwargs)
