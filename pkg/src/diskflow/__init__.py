"""Parabolic-type semigroups of holomorphic self-maps of the unit disk.

Construct power-form generators, integrate their flows in disk or half-plane
coordinates, compute Koenigs linearizing maps, and measure the boundary
asymptotics (expansions, slopes, asymptotes, contact orders, curvature,
rigidity) that the parabolic theory predicts.
"""

from ._kernel import BACKEND
from .errors import (
    AdmissibilityError,
    DiskflowError,
    IntegrationError,
    QuadratureError,
    ValidationError,
)
from .generators import (
    GeneratorSpec,
    Remainder,
    cayley,
    cayley_inverse,
    gap_from_halfplane,
    generator_from_dict,
    generator_from_json,
    generator_to_dict,
    generator_to_json,
    make_generator,
    validate_admissibility,
)
from .flow import (
    ExplicitGrid,
    GeometricGrid,
    IntegratorConfig,
    Trajectory,
    check_semigroup_property,
    conjugate_series,
    direction_field,
    flow_at,
    integrate_trajectory,
    paired_conjugate_series,
)
from .koenigs import KoenigsEvaluator, evaluator_for
from .asymptotics import (
    LimitEstimate,
    Regime,
    appendix_limit,
    classify_regime,
    constant_C_estimate,
    estimate_limit,
    koenigs_difference_limit,
    predict_disk,
    predict_halfplane,
    refined_expansion,
    remainder_decay,
)
from .geometry import (
    AsymptoteReport,
    ContactOrderReport,
    MutualPosition,
    OmegaRegion,
    asymptote_report,
    classify_omega,
    contact_order_estimate,
    contact_order_for,
    contact_order_theory,
    curvature,
    curvature_tail,
    curvature_value,
    empirical_slope,
    limit_curvature_class,
    limit_slope,
    mutual_position,
    parallel_ratio_spread,
    resolved_im_dichotomy,
    special_trajectory_locator,
    tangent_direction,
    tangent_distance,
    tangent_distance_formula,
)
from .rigidity import (
    PairOrderReport,
    StrongRigidityReport,
    WeakRigidityResult,
    order_exceeds,
    pair_order_estimate,
    same_trajectory_order,
    strong_rigidity_check,
    weak_rigidity_experiment,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "__version__",
    "AdmissibilityError",
    "DiskflowError",
    "IntegrationError",
    "QuadratureError",
    "ValidationError",
    "GeneratorSpec",
    "Remainder",
    "cayley",
    "cayley_inverse",
    "gap_from_halfplane",
    "generator_from_dict",
    "generator_from_json",
    "generator_to_dict",
    "generator_to_json",
    "make_generator",
    "validate_admissibility",
    "ExplicitGrid",
    "GeometricGrid",
    "IntegratorConfig",
    "Trajectory",
    "check_semigroup_property",
    "conjugate_series",
    "direction_field",
    "flow_at",
    "integrate_trajectory",
    "paired_conjugate_series",
    "KoenigsEvaluator",
    "evaluator_for",
    "LimitEstimate",
    "Regime",
    "appendix_limit",
    "classify_regime",
    "constant_C_estimate",
    "estimate_limit",
    "koenigs_difference_limit",
    "predict_disk",
    "predict_halfplane",
    "refined_expansion",
    "remainder_decay",
    "AsymptoteReport",
    "ContactOrderReport",
    "MutualPosition",
    "OmegaRegion",
    "asymptote_report",
    "classify_omega",
    "contact_order_estimate",
    "contact_order_for",
    "contact_order_theory",
    "curvature",
    "curvature_tail",
    "curvature_value",
    "empirical_slope",
    "limit_curvature_class",
    "limit_slope",
    "mutual_position",
    "parallel_ratio_spread",
    "resolved_im_dichotomy",
    "special_trajectory_locator",
    "tangent_direction",
    "tangent_distance",
    "tangent_distance_formula",
    "PairOrderReport",
    "StrongRigidityReport",
    "WeakRigidityResult",
    "order_exceeds",
    "pair_order_estimate",
    "same_trajectory_order",
    "strong_rigidity_check",
    "weak_rigidity_experiment",
]
