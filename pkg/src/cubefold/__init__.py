"""Measure-preserving folding of the unit cube onto the unit segment."""

from .curve import (
    CellAddress,
    OrientationState,
    SegmentInterval,
    address_to_interval,
    address_to_rect,
    child_order,
    compose_n_to_m,
    forward_map,
    interval_to_address,
    inverse_map,
    point_to_address,
)
from .dyadic import (
    CubePoint,
    DyadicRect,
    PrecisionError,
    RangeError,
    UnitScalar,
    is_on_grid,
    make_scalar,
    refine,
)
from .measure import (
    CellUnion,
    VerificationReport,
    monte_carlo_uniformity,
    pushforward,
    rect_measure_check,
)
from .sampling import (
    DistributionSpec,
    SampleBatch,
    cdf_eval,
    quantile,
    sample_independent,
    split_uniform,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
