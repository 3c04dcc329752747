"""Truncated reversible-KAM machinery for derivative wave equations on the circle."""

__version__ = "0.1.0"

from .algebra import (  # noqa: F401
    Monomial,
    NormContext,
    Point,
    SiteSet,
    Truncation,
    VectorField,
    apply_involution,
    check_involution_equivariant,
    check_real_coefficients,
    check_reversible,
    evaluate,
    lie_bracket,
    majorant_norm,
    momentum,
    momentum_field,
    monomial,
    project_momentum,
    symmetrize,
)
from .model import (  # noqa: F401
    FieldState,
    GTerm,
    ModelParams,
    NonlinearitySpec,
    action_angle_embed,
    check_g_symmetries,
    fourier_g,
    from_complex,
    lambda_j,
    linear_solution,
    to_complex,
)
from .normal_form import (  # noqa: F401
    NormalForm,
    ad_eigenvalue,
    asymptotic_fit,
    birkhoff_third_order,
    frequency_correction,
    melnikov_check,
    melnikov_density,
    solve_homological,
    toeplitz_decompose,
)
from .qp import (  # noqa: F401
    ContinuationResult,
    NewtonDivergenceError,
    QPSolution,
    continuation,
    lyapunov_exponent,
    newton_qp,
    qp_residual,
)
from .simulate import (  # noqa: F401
    Trajectory,
    blow_up_certificate,
    dH_dt_identity,
    dM_dt_identity,
    integrate,
    lyapunov_H,
    lyapunov_M,
    mean_average_diagnostic,
)
