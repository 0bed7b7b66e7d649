"""Linear and invariant flows on compact semisimple matrix Lie groups.

The package classifies the dynamics of phi_t(g) = exp(tX) g exp(-tX) from
the spectrum of D = ad(X), checks the geometric facts that hold for the
bi-invariant metric given by minus the Killing form, and exposes both through
the ``lieflow`` command-line tool.
"""

__version__ = "0.1.0"

from .algebra import (  # noqa: E402
    AlgebraElement,
    LieAlgebra,
    ad_matrix,
    adjoint_rep,
    bracket,
    certify_compact_semisimple,
    get_algebra,
    killing_form,
    registered_algebras,
)
from .errors import *  # noqa: E402,F401,F403
from .flows import flow_matrices, invariant_flow, linear_flow, sample_trajectory  # noqa: E402
from .geometry import (  # noqa: E402
    detect_period,
    estimate_omega_limit,
    metric_context,
    riemannian_distance,
    verify_isometry,
    verify_orbit_tube,
    verify_sphere_invariance,
)
from .groups import GroupElement, get_group, identity, random_element  # noqa: E402
from .linalg import eigen_decompose, eigvals_qr, mat_exp, mat_log_principal  # noqa: E402
from .rng import XorShift64Star  # noqa: E402
from .spectral import analyze_derivation, check_hyperbolic, lyapunov_exponent  # noqa: E402
