"""Randers navigation metrics, geodesic normal flows and Heintze-Karcher checks
for capillary hypersurfaces in the half-ball and the half-space."""

from .exceptions import (
    ConvergenceError,
    DomainError,
    DomainExitError,
    FlowExhaustedError,
    HypothesisError,
    StepUnderflowError,
    ZeroVectorError,
)
from .metrics import (
    GaugeValue,
    MetricSpec,
    NavigationData,
    dual_gauge,
    finsler_normal,
    fundamental_tensor,
    legendre,
    legendre_dual,
    metric_eval,
    randers_eval,
    randers_norm,
)
from .geodesics import (
    christoffel,
    exp_F,
    exp_F_path,
    hyperbolic_geodesic,
    hyperbolic_semicircle,
    integrate_alpha_geodesic,
    polyline_hausdorff,
    randers_spray_geodesic,
    sectional_curvature,
    sphere_convexity,
)
from .surfaces import (
    DiscreteHypersurface,
    cap_generator,
    enclosed_integral,
    geometry,
    perturb,
    read_surface,
    sphere_surface,
    spheroid_cap,
    surface_integral,
    write_surface,
)
from .flows import coverage_check, flow_step, init_flow, run_flow, track_evolution
from .verify import (
    HKReport,
    convergence_sweep,
    hk_ball,
    hk_free_boundary,
    hk_halfspace,
    minkowski_check,
    perturbed_family,
)

__version__ = "0.1.0"
