"""poimine: stay points, frequent places, community POIs, and user
similarity from raw GPS trajectory logs."""

from .clustering import NOISE, ClusterAssignment, DbscanParams, dbscan, k_dist_curve, suggest_eps
from .geo import EARTH_RADIUS_M, GeoPoint, GpsFix, Trajectory, centroid, haversine_distance, speed_between
from .ingest import RawUserLog, discover_users, load_user, parse_plt, segment_trajectories
from .pipeline import PipelineConfig, PipelineSummary, run_pipeline
from .places import LocationPoint, Poi, extract_location_points, extract_pois, user_poi_sets
from .preprocess import CleaningReport, clean_trajectories, clean_trajectory, drop_invalid, remove_spikes
from .similarity import SimilarityRecord, jaccard, rank_pairs
from .staypoint import StayPoint, StayPointParams, detect_stay_points

__version__ = "0.1.0"

__all__ = [
    "EARTH_RADIUS_M",
    "NOISE",
    "ClusterAssignment",
    "CleaningReport",
    "DbscanParams",
    "GeoPoint",
    "GpsFix",
    "LocationPoint",
    "PipelineConfig",
    "PipelineSummary",
    "Poi",
    "RawUserLog",
    "SimilarityRecord",
    "StayPoint",
    "StayPointParams",
    "Trajectory",
    "centroid",
    "clean_trajectories",
    "clean_trajectory",
    "dbscan",
    "detect_stay_points",
    "discover_users",
    "drop_invalid",
    "extract_location_points",
    "extract_pois",
    "haversine_distance",
    "jaccard",
    "k_dist_curve",
    "load_user",
    "parse_plt",
    "rank_pairs",
    "remove_spikes",
    "run_pipeline",
    "segment_trajectories",
    "speed_between",
    "suggest_eps",
    "user_poi_sets",
]
