"""Planar piecewise-smooth vector fields split by the line y=0.

Tools for fields whose two smooth pieces share the origin as a
non-degenerate equilibrium: pointwise switching-line classification,
local portrait classification, event-driven integration, Poincare return
maps, and crossing-limit-cycle scenarios with closed-form oracles.
"""
from .fields import (PiecewiseField, PlanarField, make_counterexample_zstar,
                     make_linear, make_normal_form, make_omega3_perturbation,
                     make_prop52, make_prop53, make_pseudo_hopf_shift,
                     make_theorem13_perturbation, make_z0, planar_field)
from .filippov import (classify_sigma_point, crossing_split_report,
                       fold_fold_classify, tangency_classify)
from .integrate import (IntegratorConfig, NoReturn, OrbitTrace,
                        first_return_to_sigma, integrate_piecewise)
from .poincare import (LimitCycle, ell_from_map, find_fixed_points, full_map,
                       map_derivative, scan_fixed_points)
from .spectral import (classify_local, jacobian_at_origin, lyapunov_ell,
                       normal_form_of, omega0_test)

__version__ = "1.0.0"

__all__ = [
    "PiecewiseField", "PlanarField", "planar_field", "make_linear",
    "make_normal_form", "make_z0", "make_prop52", "make_prop53",
    "make_pseudo_hopf_shift", "make_theorem13_perturbation",
    "make_omega3_perturbation", "make_counterexample_zstar",
    "classify_sigma_point", "tangency_classify", "fold_fold_classify",
    "crossing_split_report", "classify_local", "omega0_test", "lyapunov_ell",
    "jacobian_at_origin", "normal_form_of", "IntegratorConfig", "OrbitTrace",
    "NoReturn", "integrate_piecewise", "first_return_to_sigma", "full_map",
    "map_derivative", "find_fixed_points", "scan_fixed_points",
    "ell_from_map", "LimitCycle",
]
