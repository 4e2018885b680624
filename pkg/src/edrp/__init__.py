"""Electric-vehicle delivery route planning.

A library and CLI for the joint routing-and-charging problem: time-windowed
deliveries served by a battery-limited fleet from a single depot, with
en-route recharging at priced charging points. Ships an exact mixed-integer
model (build, export, check), a desk-scale enumeration oracle, a
cluster-sort-assign planner with earliest-window and nearest-delivery
baselines, and a benchmark harness.
"""

from .errors import (
    ConfigError,
    EdrpError,
    EnumerationLimitError,
    MissingVariableError,
    ParseError,
    PlanStructureError,
    UnknownNodeError,
    ValidationError,
)
from .heuristics import (
    ClusteringParams,
    FleetPlan,
    SimulationReport,
    Stop,
    csa_plan,
    edf_plan,
    load_plan,
    ndf_plan,
    report_objective,
    save_plan,
    simulate_plan,
)
from .instance import (
    DEPOT_ID,
    ChargingPoint,
    Delivery,
    Depot,
    ElectricVehicle,
    GeneratorConfig,
    Instance,
    Location,
    TravelMetric,
    charge_minutes,
    effective_charge_rate,
    energy_required,
    generate_synthetic,
    load_instance,
    save_instance,
    travel_time,
    validate_instance,
)
from .milp import (
    Assignment,
    CheckReport,
    EnumerationLimits,
    MilpModel,
    OracleResult,
    build_model,
    check_solution,
    default_alphas,
    default_l_max,
    enumerate_optimal,
    export_model,
    oracle_search,
    plan_to_assignment,
    read_solution,
    write_solution,
)
from .spatial import DeliveryCluster, NormalizedKdTree, build_kdtree, nearest_cp, st_dbscan

__version__ = "0.1.0"
