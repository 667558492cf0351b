"""Numerical laboratory for radial conformal metrics on R^n (n = 4, 6)
with finite total curvature integral.

Modules
-------
profiles     radial conformal factors u(r) and curvature densities
kernels      angular averages of log and power kernels over spheres
calculus     iterated Laplacians, Q-curvature, scalar curvature
potential    the log-potential operator and the fixed-point solver
functionals  alpha0, sphere-mean limits, volume entropy, conformal mass
endmodel     exterior-domain ends and the isoperimetric invariant
harness      config-driven verification suite and report emission

Hot quadrature loops run through numba by default; set
``QCONFORMAL_BACKEND=numpy`` for the pure-numpy fallback.
"""

from .accel import backend_name
from .calculus import (operator_stack, polyharmonic, q_curvature,
                       radial_laplacian, scalar_curvature)
from .endmodel import EndProfile, end_limits, end_nu, isoperimetric_ratio
from .functionals import (LimitEstimate, alpha0, conformal_mass,
                          exp_mean_ratio, limit_at_infinity, pohozaev_mass,
                          sphere_mean_limits, volume_entropy)
from .harness import CheckReport, SuiteConfig, emit_report, run_suite
from .kernels import angular_log_avg, angular_pow_avg, offcenter_radial_avg
from .potential import (PicardResult, PotentialConfig, PotentialProfile,
                        picard_solve, potential_from_density)
from .profiles import (CounterexampleProfile, CurvatureDensity,
                       QuadraticProfile, RadialProfile, SampledProfile,
                       SphereProfile, bump_density, density_from_profile)

__version__ = "0.1.0"

__all__ = [
    "CheckReport", "CounterexampleProfile", "CurvatureDensity", "EndProfile",
    "LimitEstimate", "PicardResult", "PotentialConfig", "PotentialProfile",
    "QuadraticProfile", "RadialProfile", "SampledProfile", "SphereProfile",
    "SuiteConfig", "alpha0", "angular_log_avg", "angular_pow_avg",
    "backend_name", "bump_density", "conformal_mass", "density_from_profile",
    "emit_report", "end_limits", "end_nu", "exp_mean_ratio",
    "isoperimetric_ratio", "limit_at_infinity", "offcenter_radial_avg",
    "operator_stack", "picard_solve", "pohozaev_mass", "polyharmonic",
    "potential_from_density", "q_curvature", "radial_laplacian", "run_suite",
    "scalar_curvature", "sphere_mean_limits", "volume_entropy",
]
