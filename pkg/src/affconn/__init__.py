"""Metric deformations of the Levi-Civita connection, checked numerically.

The central object is a connection nabla~ = nabla + H built from two scalar
fields f1, f2, three one-forms u, u1, u2 and an endomorphism phi over a
Riemannian metric.  The package evaluates its torsion, non-metricity and
curvature with exact jets (no finite differences), compares a closed-form
curvature expression against a direct oracle, and ships the classical named
reductions (quarter-symmetric, semi-symmetric, Weyl, and friends) as
executable presets.
"""

from .cases import (
    CaseCheckResult,
    CasePreset,
    RicciOperatorEndoField,
    SkewPartEndoField,
    SymmetricPartEndoField,
    build_case,
    case_ids,
    get_case,
    list_cases,
    verify_case,
)
from .connection import (
    H_TERMS,
    ConnectionSpec,
    Corruption,
    PhiSplit,
    PointFrame,
    deformation_h,
    evaluate_spec,
    max_abs,
    nonmetricity_direct,
    nonmetricity_predicted,
    norm_residual,
    random_spec,
    sharp,
    split_phi,
    torsion_direct,
    torsion_predicted,
    transpose_torsion_closed,
    transpose_torsion_from_metric,
)
from .curvature import (
    BINDING_NAMES,
    CORRUPTIBLE_TERMS,
    GROUPS,
    CurvatureReport,
    compare_curvature,
    curvature_direct,
    curvature_formula,
    diagnose,
    eta_helpers,
    exterior_2du,
    mu_tensor,
    needed_order,
    r0,
)
from .errors import (
    AffconnError,
    BadParams,
    CaseUnknown,
    DimensionMismatch,
    ExtraBinding,
    JetOrderUnsupported,
    MetricNotPositiveDefinite,
    MissingBinding,
    PointOutsideDomain,
    SchemaError,
    UnknownCase,
    UnknownPreset,
)
from .fields import (
    Chart,
    ConstantMetricField,
    HalfPlaneMetricField,
    IdentityEndoField,
    Manifold,
    PolynomialEndoField,
    PolynomialExpr,
    PolynomialMetricField,
    PolynomialOneFormField,
    PolynomialScalarField,
    Sphere2MetricField,
    evaluate_jets,
    monomials_up_to,
    poly_from_json,
    preset_manifold,
    random_polynomial,
)
from .levi_civita import (
    PointGeometry,
    christoffel,
    cov_deriv,
    cov_deriv_endo,
    cov_deriv_oneform,
    cov_deriv_vector,
    inverse_metric,
    ricci_data,
    riemann,
    riemann_d1,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # errors
    "AffconnError",
    "BadParams",
    "CaseUnknown",
    "DimensionMismatch",
    "ExtraBinding",
    "JetOrderUnsupported",
    "MetricNotPositiveDefinite",
    "MissingBinding",
    "PointOutsideDomain",
    "SchemaError",
    "UnknownCase",
    "UnknownPreset",
    # fields
    "Chart",
    "ConstantMetricField",
    "HalfPlaneMetricField",
    "IdentityEndoField",
    "Manifold",
    "PolynomialEndoField",
    "PolynomialExpr",
    "PolynomialMetricField",
    "PolynomialOneFormField",
    "PolynomialScalarField",
    "Sphere2MetricField",
    "evaluate_jets",
    "monomials_up_to",
    "poly_from_json",
    "preset_manifold",
    "random_polynomial",
    # levi_civita
    "PointGeometry",
    "christoffel",
    "cov_deriv",
    "cov_deriv_endo",
    "cov_deriv_oneform",
    "cov_deriv_vector",
    "inverse_metric",
    "ricci_data",
    "riemann",
    "riemann_d1",
    # connection
    "H_TERMS",
    "ConnectionSpec",
    "Corruption",
    "PhiSplit",
    "PointFrame",
    "deformation_h",
    "evaluate_spec",
    "max_abs",
    "nonmetricity_direct",
    "nonmetricity_predicted",
    "norm_residual",
    "random_spec",
    "sharp",
    "split_phi",
    "torsion_direct",
    "torsion_predicted",
    "transpose_torsion_closed",
    "transpose_torsion_from_metric",
    # curvature
    "BINDING_NAMES",
    "CORRUPTIBLE_TERMS",
    "GROUPS",
    "CurvatureReport",
    "compare_curvature",
    "curvature_direct",
    "curvature_formula",
    "diagnose",
    "eta_helpers",
    "exterior_2du",
    "mu_tensor",
    "needed_order",
    "r0",
    # cases
    "CaseCheckResult",
    "CasePreset",
    "RicciOperatorEndoField",
    "SkewPartEndoField",
    "SymmetricPartEndoField",
    "build_case",
    "case_ids",
    "get_case",
    "list_cases",
    "verify_case",
]
