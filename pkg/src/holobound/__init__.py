"""Reproducing kernels of weighted holomorphic L2 spaces on the plane.

The toolkit computes truncated kernel diagonals from monomial Gram matrices,
builds the potential-theory objects behind the pointwise bounds (smooth
cutoffs, fundamental-solution convolutions, the geometric constant B),
constructs holomorphic equivalences between weight densities, and certifies
the pointwise bounds

    |f(z)|^2 <= (c / 4pi) e^{phi(z)} ||f||^2         (lap(phi) = c constant)
    |f(z)|^2 <= e^{(B + 1/4) M} / pi * e^{phi(z)} ||f||^2
                                                     (0 <= lap(phi) <= M)

against independently computed kernel data.
"""

from .bounds import (
    BoundCertificate,
    NonConstantLaplacianError,
    certificate_constant,
    constant_case_certificate,
    global_certificate,
    local_bound_certificate,
    mean_value_check,
    translated_pointwise_check,
)
from .equivalence import (
    EquivalenceError,
    EquivalenceMap,
    WeightDensity,
    build_equivalence_map,
    harmonic_conjugate_poly,
    log_laplacian_equal,
    matching_normalized_gaussian,
    verify_kernel_invariance,
    verify_unitary,
)
from .kernel import (
    KernelEstimate,
    PositiveDefinitenessError,
    SampleFunction,
    build_kernel_estimate,
    extremal_ratio,
    gram_matrix,
    kernel_diag,
    sb_kernel,
)
from .potential import (
    B_BRACKET,
    PotentialField,
    compute_B,
    convolve_fundamental,
    cutoff_g,
    gamma,
    make_psi,
    verify_potential_bounds,
)
from .quadrature import (
    NonFiniteIntegrandError,
    QuadratureRule,
    disk_lattice,
    disk_rule,
    integrate,
    integrate_with_error,
    masked_disk_rule,
    random_disk_points,
    recenter,
    sunflower_points,
    truncated_plane_rule,
)
from .weights import (
    ScalarField,
    ValidationReport,
    WeightError,
    WeightFunction,
    eval_laplacian,
    eval_weight,
    fd_laplacian,
    normalized_gaussian,
    translate_weight,
    truncation_radius,
    validate_laplacian_bounds,
)

__version__ = "0.1.0"
