"""Critical exponents for -div(a grad u) = u^p on cone-like domains."""
from .certificates import (critical_case_certificate, gb_norm_estimate, nonexistence_certificate,
                           power_lift, verify_supersolution_strong, verify_supersolution_weak)
from .cone import (Identity, RadialAngular, annular_eigenvalue, build_cone_mesh, harnack_exponent,
                   maximum_principle_check, scaling_curve)
from .errors import *  # noqa: F401,F403
from .exponents import characteristic_roots, critical_exponent, critical_exponent_from_alpha
from .geometry import AngularDomain, ConeSection, inner_domain, shrink
from .minimal import build_series, evaluate
from .radial import Constant, LogCorrected, Oscillating, Tabulated, integrate_radial
from .solver import BvpProblem, build_problem, exhaustion_solve, monotone_solve
from .spectral import assemble, eigen_basis, extrapolated_principal, principal_eigenpair

__version__ = "0.1.0"
