"""Exact rational linear algebra, LP, and polyhedral cone kernel."""

from .linalg import (  # noqa: F401
    Mat,
    Q,
    Vec,
    frac,
    in_span,
    is_zero_vec,
    mat,
    mat_t_vec,
    mat_vec,
    nullspace,
    outer_quad,
    primitive,
    primitive_signed,
    rank,
    rref,
    solve_linear,
    span_basis,
    transpose,
    vadd,
    vdot,
    vec,
    vneg,
    vscale,
    vsub,
    vunit,
    vzero,
)
from .lp import INFEASIBLE, OPTIMAL, UNBOUNDED, LPResult, lp_solve  # noqa: F401
from .sets import (  # noqa: F401
    CellBudgetExceeded,
    PolyCone,
    Polyhedron,
    cone_subset,
    poly_subset_convex,
    strict_witness,
    union_covers_point,
    union_equal,
    union_subset,
)
