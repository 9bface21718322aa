"""Conformal causal surgery on product Lorentzian metrics over flat tori.

Construct globally hyperbolic deformations of -lapse dt^2 + g_t by spatial
conformal stretching, build asymptotic joins of two such metrics, and verify
the resulting causal-cone certificates numerically.
"""
from .causality import (
    CausalCurve,
    ConeContainmentReport,
    ConstantDirection,
    DiamondReport,
    EigenDirection,
    GhCertificate,
    HoldAtMaxDirection,
    PiecewiseRandomDirection,
    causal_diamond_extent,
    check_isometry_window,
    check_ultrastatic,
    integrate_causal_curve,
    max_coordinate_speed,
    verify_cone_containment,
    verify_global_hyperbolicity,
)
from .config import (
    MetricSpec,
    ScenarioConfig,
    VerificationSpec,
    build_metric,
    load_config,
    parse_config,
)
from .domain import SpatialDomain, validate_spd
from .errors import (
    CausalSurgeryError,
    CertificateError,
    ConfigError,
    ConstraintError,
    DataError,
    DomainError,
    ExprEvalError,
    ExprSyntaxError,
    FormatError,
    OrderError,
    ShapeError,
    SpliceError,
)
from .eigen import spd_generalized_max_eigenvalue
from .expr import (
    eval_expression,
    free_variables,
    parse_expression,
    serialize_expression,
)
from .fields import (
    MetricField,
    ScalarField,
    SpdField,
    conformal_metric,
    grid_metric,
    metric_eval,
    product_metric,
    time_reverse,
    time_shift,
    ultrastatic_metric,
    warped_product,
)
from .profiles import SmoothStepProfile, smooth_step_eval
from .runner import RunReport, export_fields, read_metric_dump, run_build, run_verify
from .surgery import (
    JoinArtifact,
    StretchResult,
    asymptotic_join,
    completeness_factor,
    cone_bound_factor,
    freeze_past,
    interpolate_ultrastatic,
    join_ultrastatic,
    make_globally_hyperbolic,
    normalize_conformal,
    smooth_majorant,
    splice,
    stretch_metric,
    ultrastatic_tail,
)

__version__ = "1.0.0"

__all__ = [
    "CausalCurve",
    "CausalSurgeryError",
    "CertificateError",
    "ConeContainmentReport",
    "ConfigError",
    "ConstantDirection",
    "ConstraintError",
    "DataError",
    "DiamondReport",
    "DomainError",
    "EigenDirection",
    "ExprEvalError",
    "ExprSyntaxError",
    "FormatError",
    "GhCertificate",
    "HoldAtMaxDirection",
    "JoinArtifact",
    "MetricField",
    "MetricSpec",
    "OrderError",
    "PiecewiseRandomDirection",
    "RunReport",
    "ScalarField",
    "ScenarioConfig",
    "ShapeError",
    "SmoothStepProfile",
    "SpatialDomain",
    "SpdField",
    "SpliceError",
    "StretchResult",
    "VerificationSpec",
    "asymptotic_join",
    "build_metric",
    "causal_diamond_extent",
    "check_isometry_window",
    "check_ultrastatic",
    "completeness_factor",
    "cone_bound_factor",
    "conformal_metric",
    "eval_expression",
    "export_fields",
    "free_variables",
    "freeze_past",
    "grid_metric",
    "integrate_causal_curve",
    "interpolate_ultrastatic",
    "join_ultrastatic",
    "load_config",
    "make_globally_hyperbolic",
    "max_coordinate_speed",
    "metric_eval",
    "normalize_conformal",
    "parse_config",
    "parse_expression",
    "product_metric",
    "read_metric_dump",
    "run_build",
    "run_verify",
    "serialize_expression",
    "smooth_majorant",
    "smooth_step_eval",
    "spd_generalized_max_eigenvalue",
    "splice",
    "stretch_metric",
    "time_reverse",
    "time_shift",
    "ultrastatic_metric",
    "ultrastatic_tail",
    "validate_spd",
    "warped_product",
]
