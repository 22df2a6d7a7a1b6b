"""Discrete martingale optimal transport on the real line.

Convex order and irreducible decomposition (:mod:`.measures`), an exact
simplex solver (:mod:`.lp`), the transport LP in pointwise, quasi-sure and
componentwise form (:mod:`.mot`), generalized concave integrals
(:mod:`.integrals`) and discretized counterexamples (:mod:`.harness`).
"""

from .errors import *  # noqa: F401,F403
from .integrals import (
    ConcaveFunction,
    concave_integral_i2,
    concave_integral_i3,
    endpoint_atom_estimate,
    extract_moderator,
    moderator_condition,
    pair_integral,
)
from .lp import LinearProgram, solve_lp, verify_solution
from .measures import (
    DiscreteMeasure,
    check_convex_order,
    decompose,
    dirac,
    endpoint_slope_gap,
    make_measure,
    potential,
    uniform,
)
from .mot import (
    Coupling,
    DualCertificate,
    RewardSpec,
    build_mot_lp,
    charging_witness,
    chargeable_pairs,
    check_optimality_via_gamma,
    constraint_pairs,
    is_polar,
    monotonicity_set,
    relax_lower_bound,
    solve_primal_dual,
)

__version__ = "0.1.0"
