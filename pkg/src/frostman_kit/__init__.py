"""Covering lemmas, generalized Frostman criteria and gauge machinery on point clouds and atomic measures."""
from .errors import (
    AbsoluteContinuityError,
    BoundViolation,
    BudgetError,
    DegenerateGaugeError,
    DiniViolationError,
    DisjointnessError,
    DivergenceError,
    EmptyInputError,
    FrostmanError,
    HypothesisError,
    InvalidRingError,
    NonIntegrableError,
    PreconditionError,
    ResolutionError,
)
from .geometry import (
    Ball,
    BallFamily,
    PointCloud,
    Ring,
    bounded_multiplicity_cover,
    is_supercovering,
    max_separated_net,
    packing_count,
    ring_volume,
    split_into_disjoint,
    vitali_select,
)
from .gauge import (
    DiniTransform,
    GaugeFunction,
    check_d_falling,
    check_regular,
    dini_transform,
    premeasure_estimate,
    premeasure_profile,
)
from .covering import (
    CoveringReport,
    RingDecomposition,
    cover_from_hausdorff,
    near_optimal_cover,
    supercover_bounded,
    supercover_geometric,
    verify_covering,
)
from .measures import (
    DiscreteSignedMeasure,
    RadialProfile,
    ball_mass,
    energy_integral,
    generate_example,
    hahn_split,
    monotone_rearrangement,
    noc_inequality_check,
    positive_dominant_region,
    smoothed_mass,
)
from .frostman import (
    Certificate,
    FrostmanHypothesis,
    adversarial_search,
    certify_teor1,
    certify_teor2,
    certify_teor3,
    frostman_sum,
    tail_class_check,
)

__version__ = "0.1.0"

__all__ = [
    "AbsoluteContinuityError",
    "BoundViolation",
    "BudgetError",
    "DegenerateGaugeError",
    "DiniViolationError",
    "DisjointnessError",
    "DivergenceError",
    "EmptyInputError",
    "FrostmanError",
    "HypothesisError",
    "InvalidRingError",
    "NonIntegrableError",
    "PreconditionError",
    "ResolutionError",
    "Ball",
    "BallFamily",
    "PointCloud",
    "Ring",
    "bounded_multiplicity_cover",
    "is_supercovering",
    "max_separated_net",
    "packing_count",
    "ring_volume",
    "split_into_disjoint",
    "vitali_select",
    "DiniTransform",
    "GaugeFunction",
    "check_d_falling",
    "check_regular",
    "dini_transform",
    "premeasure_estimate",
    "premeasure_profile",
    "CoveringReport",
    "RingDecomposition",
    "cover_from_hausdorff",
    "near_optimal_cover",
    "supercover_bounded",
    "supercover_geometric",
    "verify_covering",
    "DiscreteSignedMeasure",
    "RadialProfile",
    "ball_mass",
    "energy_integral",
    "generate_example",
    "hahn_split",
    "monotone_rearrangement",
    "noc_inequality_check",
    "positive_dominant_region",
    "smoothed_mass",
    "Certificate",
    "FrostmanHypothesis",
    "adversarial_search",
    "certify_teor1",
    "certify_teor2",
    "certify_teor3",
    "frostman_sum",
    "tail_class_check",
]
