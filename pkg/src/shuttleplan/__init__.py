"""Shuttle-route planning engine for overtime commute demand.

Pipeline: trip ingestion -> destination unification -> directional clustering
(bearing K-means with silhouette guidance) -> regional clustering (walkable
pairwise sets) -> stop metrics and recommendation -> route stringing with
time-dependent driving legs -> comparison and export. A session API wraps
the loop for interactive use.
"""

from .directions import angle_stats, cluster_directions, silhouette, silhouette_curve
from .errors import ConflictError, NotFoundError, PlanningError, ValidationError
from .geo import GeoPoint, bearing_deg, haversine_m
from .network import WalkMatrix, walk_shortest
from .profiles import DriveLeg, ProfileSet, drive_leg
from .regions import RegionalCluster, greedy_regions
from .routes import (
    ShuttleRoute,
    check_criteria,
    compare_routes,
    departure_histogram,
    diff_routes,
    route_metrics,
    string_route,
    timetable,
)
from .stops import StopMetrics, rank_stops, recommend_stop, stop_metrics
from .synthetic import SyntheticSpec, generate_synthetic
from .trips import DropOffSpot, TripRecord, parse_trips, unify_locations
from .voronoi import VoronoiGrid, build_voronoi

__version__ = "0.1.0"

__all__ = [
    "GeoPoint",
    "haversine_m",
    "bearing_deg",
    "TripRecord",
    "DropOffSpot",
    "parse_trips",
    "unify_locations",
    "WalkMatrix",
    "walk_shortest",
    "ProfileSet",
    "DriveLeg",
    "drive_leg",
    "cluster_directions",
    "silhouette",
    "silhouette_curve",
    "angle_stats",
    "RegionalCluster",
    "greedy_regions",
    "VoronoiGrid",
    "build_voronoi",
    "StopMetrics",
    "stop_metrics",
    "recommend_stop",
    "rank_stops",
    "ShuttleRoute",
    "string_route",
    "timetable",
    "route_metrics",
    "departure_histogram",
    "check_criteria",
    "compare_routes",
    "diff_routes",
    "SyntheticSpec",
    "generate_synthetic",
    "PlanningError",
    "ValidationError",
    "NotFoundError",
    "ConflictError",
    "__version__",
]
