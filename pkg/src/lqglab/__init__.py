"""Grid laboratory for exponentiated-field first-passage metrics.

Samples lattice Gaussian fields, turns them into vertex-weighted
shortest-path metrics, hunts for nearly equidistant point sets with the
star-polygon construction, and ships a finite-metric toolkit (cliques,
covering numbers, dimension estimates, snowflaking, distortion profiles)
for certifying non-doubling behavior at desk scale.
"""

from .analysis import (
    AssouadEstimate,
    CliqueReport,
    DistortionProfile,
    FiniteMetric,
    assouad_estimate,
    clique_ratio,
    covering_number,
    doubling_constant,
    find_clique,
    nondoubling_witness,
    qs_distortion_profile,
    ramsey_refine,
    snowflake,
)
from .errors import FormatError, GeometryError, ParameterError, ResolutionError
from .field import (
    BumpField,
    FieldGrid,
    FieldKind,
    add_function,
    circle_average,
    make_bump,
    sample_whole_plane_proxy,
    sample_zero_boundary,
)
from .geometry import DiscRegion, RegionDifference, StarPolygon, StarRegion
from .lqgf import read_lqgf, write_lqgf
from .metric import (
    GridPath,
    WeightedGrid,
    build_metric,
    diameter,
    distance,
    geodesic,
    metric_ball,
    set_distance,
)
from .params import LqgParams, make_params
from .rng import derive_seed
from .star import (
    MonteCarloResult,
    ScanResult,
    StarConfig,
    TrialResult,
    annulus_scan,
    build_star,
    calibrate,
    default_config,
    evaluate_events,
    locate_star_points,
    monte_carlo,
    star_trial,
    zeta_of_epsilon,
)

__version__ = "0.1.0"
