"""Choquet integrals of Hermitian PSD operators over finite Weyl-Heisenberg coherent states."""
from .hilbert import (
    CoherentFamily,
    FiducialVector,
    GenericityReport,
    HilbertContext,
    PhasePoint,
    check_generic,
    coherent_family,
    default_fiducial,
    displacement,
    make_context,
)
from .phase_space import (
    HermitianPSDOperator,
    PFunction,
    QFunction,
    dominance_ratio,
    p_function,
    q_function,
    wehrl_entropy,
)
from .capacity import (
    Capacity,
    MobiusCoefficients,
    choquet_classical,
    choquet_via_mobius,
    comonotonic_functions,
    inverse_mobius,
    mobius_transform,
)
from .choquet import (
    ChoquetResult,
    MobiusOperatorTable,
    ProjectorChain,
    choquet_integral,
    choquet_via_mobius_ops,
    mobius_operators,
    projector_chain,
    trace_choquet,
    weak_resolution_residual,
)
from .comonotone import (
    OperatorPath,
    ScanReport,
    bounded_family_check,
    class_count,
    comonotonic_additivity_check,
    comonotonic_operators,
    preorder_compare,
    scan_intervals,
)
from .bounds import (
    BoundReport,
    expectation_bound,
    operator_exp_bound,
    partition_bounds,
    product_bound,
    subadditivity_convexity,
    trace_bounds,
)
from .tolerances import Tolerances, default_tolerances

__version__ = "0.1.0"
