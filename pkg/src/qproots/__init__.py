"""Characteristic quasi-polynomials of delay systems and their roots."""

from ._kernels import active_backend
from .quasipoly import (
    GrowthEstimate,
    Polynomial,
    QuasiPolynomial,
    Term,
    ZeroQuasiPolynomialError,
    estimate_growth_order,
    normalize,
)
from .charbuild import (
    DelaySpec,
    DelaySystem,
    ExpansionReport,
    IndependenceVerdict,
    TraceVerdict,
    build_characteristic_multi,
    build_characteristic_single,
    check_delay_independence,
    check_trace_condition,
    verify_expansion_structure,
)
from .distributed import (
    DistributedSystem,
    QuadratureConfig,
    QuadratureConvergenceError,
    as_target,
    derivative_distributed,
    evaluate_distributed,
    kernel_nonzero_check,
    kernel_transform,
    tabulated_kernel,
)
from .rootfinder import (
    AnalyticTarget,
    BoundaryProximityError,
    BoxBudgetError,
    GrowthScan,
    NewtonConvergenceError,
    NewtonDivergenceError,
    Region,
    Root,
    RootFindingError,
    SubdivisionLimitError,
    WindingResult,
    count_roots,
    isolate_roots,
    refine_in_box,
    refine_root,
    scan_growth,
    winding_number,
    winding_profile,
)
from .cli import (
    SchemaError,
    SystemDocument,
    analyze_report,
    load_document,
    parse_document,
    roots_report,
    scan_report,
    serialize_document,
)

__version__ = "0.1.0"
