"""Day-scale traffic assignment with time- and fuel-oriented objectives,
street typology, and city indicator scoring."""
from .charts import ComparisonRow, ComparisonTable, emit_chart, load_comparison, write_comparison
from .costs import (
    DEFAULT_BPR,
    DEFAULT_FUEL,
    DEFAULT_SPF,
    BprParams,
    FuelParams,
    SpfParams,
    bpr_integral,
    bpr_speed,
    bpr_time,
    eco_assignment_cost,
    fuel_per_mile,
    link_fuel,
    marginal_fuel_cost,
    marginal_time_cost,
    spf_accidents,
)
from .geo import SpatialIndex, Tract, build_link_index, links_within_radius, load_tracts
from .indicators import (
    INDICATOR_META,
    INDICATOR_NAMES,
    ExposureLevel,
    IndicatorReport,
    School,
    SchoolExposure,
    build_report,
    daily_stats,
    load_schools,
    school_exposure,
)
from .network import LoadError, Link, Network, Node, load_network, save_network
from .qdta import (
    AssignmentResult,
    FlowState,
    Objective,
    SolverConfig,
    TripRecord,
    TripRequest,
    all_or_nothing,
    assign_interval,
    assignment_cost,
    bucket_demand,
    load_trips,
    run_day,
)
from .typology import (
    LandUse,
    Parcel,
    StreetType,
    TransportContext,
    classify_network,
    classify_street,
    dominant_land_use,
    load_parcels,
    transport_context,
)

__version__ = "0.1.0"

__all__ = [
    "AssignmentResult",
    "BprParams",
    "ComparisonRow",
    "ComparisonTable",
    "DEFAULT_BPR",
    "DEFAULT_FUEL",
    "DEFAULT_SPF",
    "ExposureLevel",
    "FlowState",
    "FuelParams",
    "INDICATOR_META",
    "INDICATOR_NAMES",
    "IndicatorReport",
    "LandUse",
    "Link",
    "LoadError",
    "Network",
    "Node",
    "Objective",
    "Parcel",
    "School",
    "SchoolExposure",
    "SolverConfig",
    "SpatialIndex",
    "SpfParams",
    "StreetType",
    "Tract",
    "TransportContext",
    "TripRecord",
    "TripRequest",
    "all_or_nothing",
    "assign_interval",
    "assignment_cost",
    "bpr_integral",
    "bpr_speed",
    "bpr_time",
    "bucket_demand",
    "build_link_index",
    "build_report",
    "classify_network",
    "classify_street",
    "daily_stats",
    "dominant_land_use",
    "eco_assignment_cost",
    "emit_chart",
    "fuel_per_mile",
    "link_fuel",
    "links_within_radius",
    "load_comparison",
    "load_network",
    "load_parcels",
    "load_schools",
    "load_tracts",
    "load_trips",
    "marginal_fuel_cost",
    "marginal_time_cost",
    "run_day",
    "save_network",
    "school_exposure",
    "spf_accidents",
    "transport_context",
    "write_comparison",
    "__version__",
]
