"""Maslov indices, the Z4 Maslov line bundle and the Z2 Maslov gerbe, computed on sampled data."""

from .bundles import (
    BranchConvention,
    build_cp1_cover,
    build_cp1_maslov_cover,
    maslov_gerbe_class,
    maslov_holonomy,
    maslov_holonomy_general,
)
from .cech import (
    CechCocycle,
    CoverNerve,
    LogLift,
    TransitionData,
    check_transition_cocycle,
    chern_cocycle,
    evaluate_fundamental,
    inverse,
    lift_logs,
    perturb_by_coboundary,
    square,
    tensor,
    unitarize,
)
from .charts import det_squared, maslov_index, maslov_section, slope_coords, transversality_defect
from .gerbe import (
    GerbeIsomorphism,
    GerbeObject,
    equator_holonomy,
    giraud_cocycle,
    sqrt_gerbe_isos,
    verify_equator_theorem,
)
from .symplectic import (
    LagrangianFrame,
    LagrangianLoop,
    SymplecticSpace,
    direct_sum_loop,
    is_lagrangian,
    rotation_line_loop,
    sp_graph_loop,
    standard_space,
)

__version__ = "0.1.0"
