"""Curves with a prescribed number of inscribed squares, and a square finder."""

from .constructions import (
    ConstructionParams,
    build_n_square,
    build_nonsmooth_two_square,
    build_smooth_two_square,
    critical_c,
    graph_locus_intersections,
    locus,
    max_convex_c,
)
from .curve import Curve, CurveSpec, Point, closest_point, is_convex, signed_curvature, unit_circle_spec
from .oracle import oracle_enumerate
from .solver import (
    SolveConfig,
    SolveReport,
    Square,
    enumerate_squares,
    residual_jacobian,
    square_residual,
)

__version__ = "0.1.0"
