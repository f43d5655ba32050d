"""Operator trigonometry on finite-dimensional l_p spaces.

Semi-inner-product angles of matrices, Krein and generalized amplitudes,
the range-kernel complementarity oracle, continuation certificates for
invertibility and convergence of matrix powers.
"""

from .amplitude import (
    AmplitudeReport,
    Classification,
    PencilMembership,
    generalized_amplitude_upper,
    krein_amplitude,
    pencil_membership,
)
from .angle import AngleReport, OptimizerConfig, angle, cosine_ratio, ray_angle
from .continuation import (
    ContinuationCertificate,
    certify_invertible_by_continuation,
    injectivity_modulus,
    pencil_lower_bound_check,
)
from .decomposition import DecompositionResult, complementarity_oracle, sum_closedness_constant
from .iteration import (
    IterationReport,
    check_asymptotic_regularity,
    is_primitive_contraction,
    iterate_to_limit,
    projection_product,
)
from .space import (
    OperatorOnSpace,
    RankProfile,
    SpaceSpec,
    SubspaceBasis,
    Vector,
    kernel_basis,
    lp_norm,
    range_basis,
    rank_profile,
    sip,
    solve,
    spectrum,
)

__version__ = "0.1.0"
