"""Uniformity analysis of binary composites described by frame fields.

The package quantifies how far a two-component material body is from
uniform. Each component carries a field of implanted frames; comparing
the two local responses yields pointwise non-uniformity measures, a
foliation of the body by leaves of constant symmetry, a finite double
groupoid of material isomorphisms between sampled points, and
infinitesimal residuals that classify the body near a point.
"""
from .errors import (
    ConfigError,
    EvaluationDomainError,
    ExpressionSyntaxError,
    InconsistentCornersError,
    MissingDirectorError,
    NonFiniteError,
    NotAGroupError,
    NotComposableError,
    NotOneCompatibleError,
    NotTransitiveError,
    NotTriclinicError,
    OutOfDomainError,
    PreconditionViolatedError,
    ScanFailedError,
    SingularFrameError,
    SingularJacobianError,
    SingularMatrixError,
    SizeLimitError,
    UnilabError,
    UnknownIdentifierError,
)
from .expressions import compile_expr, diff, evaluate, parse
from .fields import (
    AnalyticFrameField,
    AnalyticVectorField,
    BodyDomain,
    SampledFrameField,
    SampledVectorField,
)
from .geometry import (
    christoffel,
    christoffel_first_form,
    covariant_derivative,
    curvature_residual,
    metric,
    torsion,
)
from .measures import (
    CompositeSpec,
    FiniteMatrixGroup,
    MeasureResult,
    SymmetryCase,
    evaluate_measure,
    intersect_groups,
)
from .foliation import (
    FoliationClass,
    FoliationReport,
    involutivity_residual,
    lie_bracket,
    null_space_at,
    report_to_csv,
    report_to_dict,
    scan_domain,
)
from .groupoid import (
    Arrow,
    FiniteGroupoid,
    PointSet,
    from_frame_field,
    from_point_frames,
    groupoid_from_dict,
    groupoid_to_dict,
    is_transitive,
    pair_groupoid,
    vertex_group,
)
from .double_groupoid import (
    MaterialDoubleGroupoid,
    Square,
    apply_config_change,
    coarse_enumerate,
    commutation_defect,
    complementary_square,
    core,
    filling_check,
    h_unit,
    hcompose,
    interchange_check,
    is_commutative,
    is_compatible,
    is_uniform,
    misalignment,
    normalizer_criterion,
    square_from_dict,
    square_to_dict,
    transpose,
    v_unit,
    vcompose,
)
from .infinitesimal import (
    InfinitesimalClassification,
    InfinitesimalKind,
    arrow_differential,
    arrow_map,
    commutation_residual,
    infinitesimal_classification,
)
from .linalg3 import KernelResult, kernel_of_flattened

__version__ = "0.1.0"

__all__ = [
    "Arrow",
    "AnalyticFrameField",
    "AnalyticVectorField",
    "BodyDomain",
    "CompositeSpec",
    "ConfigError",
    "EvaluationDomainError",
    "ExpressionSyntaxError",
    "FiniteGroupoid",
    "FiniteMatrixGroup",
    "FoliationClass",
    "FoliationReport",
    "InconsistentCornersError",
    "InfinitesimalClassification",
    "InfinitesimalKind",
    "KernelResult",
    "MaterialDoubleGroupoid",
    "MeasureResult",
    "MissingDirectorError",
    "NonFiniteError",
    "NotAGroupError",
    "NotComposableError",
    "NotOneCompatibleError",
    "NotTransitiveError",
    "NotTriclinicError",
    "OutOfDomainError",
    "PointSet",
    "PreconditionViolatedError",
    "SampledFrameField",
    "SampledVectorField",
    "ScanFailedError",
    "SingularFrameError",
    "SingularJacobianError",
    "SingularMatrixError",
    "SizeLimitError",
    "Square",
    "SymmetryCase",
    "UnilabError",
    "UnknownIdentifierError",
    "apply_config_change",
    "arrow_differential",
    "arrow_map",
    "christoffel",
    "christoffel_first_form",
    "coarse_enumerate",
    "commutation_defect",
    "commutation_residual",
    "compile_expr",
    "complementary_square",
    "core",
    "covariant_derivative",
    "curvature_residual",
    "diff",
    "evaluate",
    "evaluate_measure",
    "filling_check",
    "from_frame_field",
    "from_point_frames",
    "groupoid_from_dict",
    "groupoid_to_dict",
    "h_unit",
    "hcompose",
    "infinitesimal_classification",
    "interchange_check",
    "intersect_groups",
    "involutivity_residual",
    "is_commutative",
    "is_compatible",
    "is_transitive",
    "is_uniform",
    "kernel_of_flattened",
    "lie_bracket",
    "metric",
    "misalignment",
    "normalizer_criterion",
    "null_space_at",
    "pair_groupoid",
    "parse",
    "report_to_csv",
    "report_to_dict",
    "scan_domain",
    "square_from_dict",
    "square_to_dict",
    "torsion",
    "transpose",
    "v_unit",
    "vcompose",
    "vertex_group",
]
