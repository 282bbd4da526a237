"""Ellipsotopes: a convex set family closed under affine maps, Minkowski sums,
and intersections, unifying ellipsoids and zonotopes.

The package is organized as:

- core: the Ellipsotope value type, validation, classical-set constructors
- ops: the closed set-operation algebra
- solve: convex feasibility (emptiness, membership, ray tracing)
- reduce: order reduction, enclosing ellipsoids, component merging
- viz: boundary sampling and polygon emission
- apps: fault detection, path verification, and benchmark drivers
- cli: the ``etope`` command-line entry point
"""

from .core import (
    INF,
    EllipsoidParams,
    Ellipsotope,
    Halfspace,
    Hyperplane,
    IndexSet,
    ball_product_membership,
    capsule,
    check_invariants,
    from_constrained_zonotope,
    from_ellipsoid,
    from_zonotope,
    validate,
)
from .ops import (
    CpzExport,
    affine_map,
    cartesian_product,
    convex_hull_overapprox,
    drop_zero_generators,
    intersect,
    intersect_generalized,
    intersect_halfspace,
    intersect_hyperplane,
    lift,
    minkowski_sum,
    to_cpz,
)
from .solve import (
    FeasibilityResult,
    MembershipSolver,
    SolverConfig,
    Verdict,
    contains_point,
    default_config,
    is_empty,
    project_ball_product,
    project_pball,
    ray_trace,
    sample_feasible,
)
from .reduce import (
    Component,
    ComponentDecomposition,
    MvoeResult,
    constrained_to_basic,
    eliminate_constraint,
    identify_components,
    lift_then_reduce,
    mvoe_pair,
    pair_volume_heuristic,
    pop_generator,
    reduce_2etope,
    reduce_basic_2,
    reduce_pop_box,
    relax_constraints,
    select_pair_heuristic,
    to_ellipsoid,
    zonotope_mvoe,
)

__version__ = "0.1.0"

__all__ = [
    "INF",
    "EllipsoidParams",
    "Ellipsotope",
    "Halfspace",
    "Hyperplane",
    "IndexSet",
    "ball_product_membership",
    "capsule",
    "check_invariants",
    "from_constrained_zonotope",
    "from_ellipsoid",
    "from_zonotope",
    "validate",
    "CpzExport",
    "affine_map",
    "cartesian_product",
    "convex_hull_overapprox",
    "drop_zero_generators",
    "intersect",
    "intersect_generalized",
    "intersect_halfspace",
    "intersect_hyperplane",
    "lift",
    "minkowski_sum",
    "to_cpz",
    "FeasibilityResult",
    "MembershipSolver",
    "SolverConfig",
    "Verdict",
    "contains_point",
    "default_config",
    "is_empty",
    "project_ball_product",
    "project_pball",
    "ray_trace",
    "sample_feasible",
    "Component",
    "ComponentDecomposition",
    "MvoeResult",
    "constrained_to_basic",
    "eliminate_constraint",
    "identify_components",
    "lift_then_reduce",
    "mvoe_pair",
    "pair_volume_heuristic",
    "pop_generator",
    "reduce_2etope",
    "reduce_basic_2",
    "reduce_pop_box",
    "relax_constraints",
    "select_pair_heuristic",
    "to_ellipsoid",
    "zonotope_mvoe",
]
