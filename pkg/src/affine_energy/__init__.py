"""Numerical convex geometry and affine functional-inequality toolkit."""

from .spherequad import SphereGrid, build_sphere_grid, integrate_sphere, unit_ball_volume
from .bodies import (
    Ball,
    Ellipsoid,
    LqBall,
    Polytope,
    SampledRadial,
    SampledSupport,
    banach_mazur_estimate,
    body_volume,
    busemann_petty_deficit,
    centroid_body,
    dual_mixed_volume,
    firey_combination,
    improved_dual_gap,
    lp_mixed_volume,
    petty_product,
    polar,
    polar_volume,
    projection_body,
    symmetric_difference_ratio,
)
from .funcspace import (
    BVCharacteristic,
    GridFunction,
    convex_symmetrization,
    decreasing_rearrangement,
    distribution_function,
    entropy,
    gradient,
    lp_norm,
    sobolev_grad_norm,
    symmetric_rearrangement,
)
from .energy import (
    EnergyContext,
    affine_energy,
    body_norm,
    bv_energy,
    bv_energy_value,
    crucial_bound_gap,
    energy_body,
    energy_constant,
    energy_identity_check,
    energy_profile,
    polya_szego_gap,
)
from .inequalities import (
    VerificationReport,
    affine_sobolev_deficit,
    centroid_stability_check,
    distance_to_extremals,
    extremal,
    logsob_deficit_bv,
    sharp_constant,
    stability_check,
    verify,
)
from .kernels import backend as kernel_backend

__version__ = "0.1.0"
