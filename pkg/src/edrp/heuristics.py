"""Fleet plans, the route simulator, and the three planners.

All planners share one set of movement semantics, identical to the
simulator's replay rules:

* arrival = previous departure + travel time;
* at a delivery, departure = max(arrival, window start) + unload time and the
  departure must not exceed the window end;
* at a charging stop, the battery refills to capacity; the dwell is the
  deficit divided by the effective rate (min of station output and vehicle
  acceptance) plus the station's average wait, and the cost is deficit times
  the station's unit price;
* battery level must never go negative on any leg, including the final
  return to the depot.

Safety rule used by every planner: a vehicle only commits to a delivery if,
after serving it, the battery still covers both the hop to the delivery's
precomputed fallback charging point and a direct return to the depot. That
guarantee makes every emitted plan replay feasibly and keeps routes
expressible in the optimization model (no charging stop ever needs to be
appended after the last delivery).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping, Sequence

from .errors import ConfigError, ParseError, UnknownNodeError
from .instance import (
    DEPOT_ID,
    ChargingPoint,
    Delivery,
    ElectricVehicle,
    Instance,
    charge_minutes,
    effective_charge_rate,
    energy_required,
    travel_time,
)
from .spatial import DeliveryCluster, NormalizedKdTree, build_kdtree, nearest_cp, st_dbscan

_EPS = 1e-9


@dataclass(frozen=True)
class Stop:
    kind: str  # "depot" | "delivery" | "charge"
    node: str
    arrival: float
    departure: float
    energy_at_departure: float
    charge_cost: float = 0.0


@dataclass(frozen=True)
class FleetPlan:
    """Per-vehicle routes plus the departure-time schedule.

    ``routes`` maps every vehicle id to its stop sequence; vehicles that never
    leave the depot get an empty tuple. ``total_charging_cost`` covers
    en-route charging stops only (end-of-day depot replenishment is a
    reporting concern of the simulator).
    """

    routes: Mapping[str, tuple[Stop, ...]]
    schedule: Mapping[str, tuple[float, ...]]
    served: frozenset[str]
    total_charging_cost: float


@dataclass(frozen=True)
class SimViolation:
    stop: Stop | None
    reason: str  # "window" | "energy" | "ordering"
    detail: str


@dataclass(frozen=True)
class SimulationReport:
    feasible: bool
    served_count: int
    cost_per_served: float
    violations: tuple[SimViolation, ...]
    makespan: float
    total_cost: float  # includes end-of-day depot replenishment when billed
    charging_cost: float  # en-route charging stops only


def report_objective(report: SimulationReport, alphas: tuple[float, float]) -> float:
    """Score a simulated plan: alpha1 * served - alpha2 * total cost."""
    return alphas[0] * report.served_count - alphas[1] * report.total_cost


# ---------------------------------------------------------------------------
# Simulation


def _charging_point_for(instance: Instance, node: str) -> ChargingPoint:
    if node == DEPOT_ID:
        return instance.depot_as_charging_point()
    cp = instance.cps_by_id.get(node)
    if cp is None:
        raise UnknownNodeError(node)
    return cp


def simulate_plan(
    instance: Instance, plan: FleetPlan, bill_depot_return: bool = True
) -> SimulationReport:
    """Replay a plan against the movement semantics and report violations.

    ``bill_depot_return`` charges the end-of-day battery deficit at the depot
    rate for every vehicle that traveled, mirroring the optimization
    objective's cost term for the final leg back to the depot.
    """
    battery = instance.battery_capacity
    violations: list[SimViolation] = []
    served: list[str] = []
    seen_deliveries: set[str] = set()
    charging_cost = 0.0
    depot_refill_cost = 0.0
    makespan = 0.0

    for ev_id in plan.routes:
        if ev_id not in instance.evs_by_id:
            raise UnknownNodeError(ev_id)

    for ev in instance.evs:
        route = tuple(plan.routes.get(ev.id, ()))
        if not route:
            continue
        if route[0].kind != "depot" or route[0].node != DEPOT_ID:
            violations.append(
                SimViolation(route[0], "ordering", f"{ev.id}: route must start at the depot")
            )
            continue
        if route[-1].kind != "depot" or route[-1].node != DEPOT_ID:
            violations.append(
                SimViolation(route[-1], "ordering", f"{ev.id}: route must end at the depot")
            )
            continue
        time = route[0].departure
        residual = battery
        pos = DEPOT_ID
        prev_kind = "depot"
        for idx, stop in enumerate(route[1:], start=1):
            if stop.kind == "depot" and idx != len(route) - 1:
                violations.append(
                    SimViolation(stop, "ordering", f"{ev.id}: depot revisited mid-route")
                )
                break
            if stop.kind == "charge" and prev_kind == "charge":
                violations.append(
                    SimViolation(
                        stop, "ordering", f"{ev.id}: consecutive charging stops at {stop.node}"
                    )
                )
            leg_time = travel_time(instance, ev, pos, stop.node)
            leg_energy = energy_required(instance, ev, pos, stop.node)
            arrival = time + leg_time
            residual -= leg_energy
            if residual < -_EPS:
                violations.append(
                    SimViolation(
                        stop,
                        "energy",
                        f"{ev.id}: battery at {residual:.6f} kWh on arrival at {stop.node}",
                    )
                )
            if stop.kind == "delivery":
                d = instance.deliveries_by_id.get(stop.node)
                if d is None:
                    raise UnknownNodeError(stop.node)
                if stop.node in seen_deliveries:
                    violations.append(
                        SimViolation(stop, "ordering", f"delivery {stop.node} served twice")
                    )
                else:
                    seen_deliveries.add(stop.node)
                    served.append(stop.node)
                departure = max(arrival, d.window_start) + instance.unload_time
                if departure > d.window_end + _EPS:
                    violations.append(
                        SimViolation(
                            stop,
                            "window",
                            f"{ev.id}: departs {stop.node} at {departure:.3f} after window end "
                            f"{d.window_end:.3f}",
                        )
                    )
            elif stop.kind == "charge":
                cp = _charging_point_for(instance, stop.node)
                deficit = max(battery - residual, 0.0)
                departure = arrival + charge_minutes(deficit, ev, cp) + cp.avg_wait
                charging_cost += deficit * cp.unit_cost
                residual = battery
            elif stop.kind == "depot":
                departure = arrival
                makespan = max(makespan, arrival)
            else:
                raise ConfigError(f"unknown stop kind {stop.kind!r}")
            time = departure
            pos = stop.node
            prev_kind = stop.kind
        if pos == DEPOT_ID and len(route) > 1:
            deficit = max(battery - residual, 0.0)
            depot_refill_cost += deficit * instance.depot.unit_cost

    total_cost = charging_cost + (depot_refill_cost if bill_depot_return else 0.0)
    served_count = len(served)
    return SimulationReport(
        feasible=not violations,
        served_count=served_count,
        cost_per_served=(total_cost / served_count) if served_count else 0.0,
        violations=tuple(violations),
        makespan=makespan,
        total_cost=total_cost,
        charging_cost=charging_cost,
    )


# ---------------------------------------------------------------------------
# Planner machinery


class _Walk:
    """Mutable route-building state for one vehicle."""

    __slots__ = ("ev", "pos", "time", "residual", "stops", "charge_cost")

    def __init__(self, ev: ElectricVehicle):
        self.ev = ev
        self.pos = DEPOT_ID
        self.time = 0.0
        self.residual = ev.battery_capacity
        self.stops: list[Stop] = [Stop("depot", DEPOT_ID, 0.0, 0.0, ev.battery_capacity)]
        self.charge_cost = 0.0

    @property
    def departed(self) -> bool:
        return len(self.stops) > 1

    def last_kind(self) -> str:
        return self.stops[-1].kind


@dataclass(frozen=True)
class _ServeOutcome:
    battery_ok: bool
    window_ok: bool
    arrival: float
    departure: float
    leg_energy: float


class _Planner:
    """Shared feasibility checks and committing logic for all planners."""

    def __init__(self, instance: Instance, refuge: Mapping[str, ChargingPoint | None]):
        self.instance = instance
        self.refuge = refuge  # delivery id -> fallback charging point (None: depot only)

    def margin_energy(self, ev: ElectricVehicle, delivery: Delivery) -> float:
        """Battery the vehicle must keep after serving: reach the fallback
        charging point and, independently, be able to run home directly."""
        home = energy_required(self.instance, ev, delivery.id, DEPOT_ID)
        cp = self.refuge.get(delivery.id)
        if cp is None:
            return home
        return max(home, energy_required(self.instance, ev, delivery.id, cp.id))

    def assess_serve(self, walk: _Walk, delivery: Delivery) -> _ServeOutcome:
        inst = self.instance
        leg_energy = energy_required(inst, walk.ev, walk.pos, delivery.id)
        need = leg_energy + self.margin_energy(walk.ev, delivery)
        battery_ok = walk.residual + _EPS >= need
        arrival = walk.time + travel_time(inst, walk.ev, walk.pos, delivery.id)
        departure = max(arrival, delivery.window_start) + inst.unload_time
        window_ok = departure <= delivery.window_end + _EPS
        return _ServeOutcome(battery_ok, window_ok, arrival, departure, leg_energy)

    def commit_serve(self, walk: _Walk, delivery: Delivery, outcome: _ServeOutcome) -> None:
        walk.residual -= outcome.leg_energy
        walk.stops.append(
            Stop(
                "delivery",
                delivery.id,
                outcome.arrival,
                outcome.departure,
                walk.residual,
            )
        )
        walk.time = outcome.departure
        walk.pos = delivery.id

    def charge_allowed(self, walk: _Walk) -> bool:
        # A charging stop may only follow a delivery: back-to-back charging
        # sessions (including the depot's overnight charge) are disallowed.
        return walk.last_kind() == "delivery"

    def reachable_charge_target(
        self, walk: _Walk, preferred: ChargingPoint | None
    ) -> ChargingPoint | None:
        inst = self.instance
        if preferred is not None:
            if energy_required(inst, walk.ev, walk.pos, preferred.id) <= walk.residual + _EPS:
                return preferred
        candidates = sorted(
            inst.charging_points,
            key=lambda c: (energy_required(inst, walk.ev, walk.pos, c.id), c.id),
        )
        for cp in candidates:
            if energy_required(inst, walk.ev, walk.pos, cp.id) <= walk.residual + _EPS:
                return cp
        return None

    def commit_charge(self, walk: _Walk, cp: ChargingPoint) -> None:
        inst = self.instance
        leg_energy = energy_required(inst, walk.ev, walk.pos, cp.id)
        arrival = walk.time + travel_time(inst, walk.ev, walk.pos, cp.id)
        residual_on_arrival = walk.residual - leg_energy
        deficit = walk.ev.battery_capacity - residual_on_arrival
        departure = arrival + charge_minutes(deficit, walk.ev, cp) + cp.avg_wait
        cost = deficit * cp.unit_cost
        walk.stops.append(
            Stop("charge", cp.id, arrival, departure, walk.ev.battery_capacity, cost)
        )
        walk.charge_cost += cost
        walk.residual = walk.ev.battery_capacity
        walk.time = departure
        walk.pos = cp.id

    def try_charge_then_serve(
        self, walk: _Walk, delivery: Delivery, target: ChargingPoint | None
    ) -> bool:
        """Baseline move: recharge, then serve, committed only if both work."""
        if not self.charge_allowed(walk):
            return False
        inst = self.instance
        cp = self.reachable_charge_target(walk, target)
        if cp is None:
            return False
        leg_to_cp = energy_required(inst, walk.ev, walk.pos, cp.id)
        arrive_cp = walk.time + travel_time(inst, walk.ev, walk.pos, cp.id)
        deficit = walk.ev.battery_capacity - (walk.residual - leg_to_cp)
        depart_cp = arrive_cp + charge_minutes(deficit, walk.ev, cp) + cp.avg_wait
        leg_energy = energy_required(inst, walk.ev, cp.id, delivery.id)
        need = leg_energy + self.margin_energy(walk.ev, delivery)
        if walk.ev.battery_capacity + _EPS < need:
            return False
        arrival = depart_cp + travel_time(inst, walk.ev, cp.id, delivery.id)
        departure = max(arrival, delivery.window_start) + inst.unload_time
        if departure > delivery.window_end + _EPS:
            return False
        self.commit_charge(walk, cp)
        self.commit_serve(
            walk, delivery, _ServeOutcome(True, True, arrival, departure, leg_energy)
        )
        return True

    def finalize(self, walk: _Walk) -> tuple[Stop, ...]:
        """Drop idle trailing charging stops and append the depot return."""
        inst = self.instance
        while len(walk.stops) >= 2 and walk.stops[-1].kind == "charge":
            prev = walk.stops[-2]
            home = energy_required(inst, walk.ev, prev.node, DEPOT_ID)
            if prev.energy_at_departure + _EPS < home:
                break  # the stop is load-bearing for the return leg
            dropped = walk.stops.pop()
            walk.charge_cost -= dropped.charge_cost
            walk.pos = prev.node
            walk.time = prev.departure
            walk.residual = prev.energy_at_departure
        if not walk.departed:
            return ()
        home = energy_required(inst, walk.ev, walk.pos, DEPOT_ID)
        if walk.residual + _EPS < home:
            # Defensive rescue; unreachable when the margin rule held throughout.
            cp = self.reachable_charge_target(walk, None)
            if cp is not None and self.charge_allowed(walk):
                self.commit_charge(walk, cp)
                home = energy_required(inst, walk.ev, walk.pos, DEPOT_ID)
        arrival = walk.time + travel_time(inst, walk.ev, walk.pos, DEPOT_ID)
        walk.residual -= home
        walk.stops.append(Stop("depot", DEPOT_ID, arrival, arrival, walk.residual))
        return tuple(walk.stops)


def _assemble_plan(instance: Instance, planner: _Planner, walks: Sequence[_Walk]) -> FleetPlan:
    routes: dict[str, tuple[Stop, ...]] = {}
    schedule: dict[str, tuple[float, ...]] = {}
    served: set[str] = set()
    total_cost = 0.0
    for walk in walks:
        route = planner.finalize(walk)
        routes[walk.ev.id] = route
        schedule[walk.ev.id] = tuple(stop.departure for stop in route)
        served.update(stop.node for stop in route if stop.kind == "delivery")
        total_cost += walk.charge_cost
    return FleetPlan(
        routes=routes,
        schedule=schedule,
        served=frozenset(served),
        total_charging_cost=total_cost,
    )


def _distance_nearest_cp(instance: Instance, node: str) -> ChargingPoint | None:
    if not instance.charging_points:
        return None
    return min(
        instance.charging_points,
        key=lambda c: (instance.distance(node, c.id), c.id),
    )


# ---------------------------------------------------------------------------
# Cluster-Sort-Assign planner


@dataclass(frozen=True)
class ClusteringParams:
    """Spatio-temporal clustering knobs; None picks scale-free defaults
    (10% of the coordinate bounding-box diagonal, 10% of the horizon)."""

    eps_spatial: float | None = None
    eps_temporal: float | None = None
    min_pts: int = 2

    def resolve(self, instance: Instance) -> tuple[float, float, int]:
        eps_s = self.eps_spatial
        if eps_s is None:
            eps_s = max(instance.bounding_diagonal() * 0.1, _EPS)
        eps_t = self.eps_temporal
        if eps_t is None:
            eps_t = max(instance.horizon * 0.1, _EPS)
        return eps_s, eps_t, self.min_pts


def csa_plan(
    instance: Instance,
    params: ClusteringParams | None = None,
    tree: NormalizedKdTree | None = None,
    include_depot_charging: bool = False,
) -> FleetPlan:
    """Cluster-Sort-Assign planner.

    Preprocess: build the normalized charging-option tree and store each
    delivery's nearest cost-effective charging point. Group: cluster the
    deliveries by location and window end, sort members by window end and
    groups by earliest deadline. Assign: for each delivery in that order,
    pick the vehicle that reaches it with the least energy among those that
    arrive in time and keep the safety margin; a candidate vehicle that is
    short on battery is sent to its nearest cost-effective charging point
    instead and skipped for this delivery. Finally all vehicles return to
    the depot.
    """
    params = params or ClusteringParams()
    if tree is None:
        depot_cp = instance.depot_as_charging_point() if include_depot_charging else None
        if instance.charging_points or depot_cp is not None:
            tree = build_kdtree(instance.charging_points, depot_cp)
    refuge: dict[str, ChargingPoint | None] = {}
    for d in instance.deliveries:
        refuge[d.id] = nearest_cp(tree, d.location) if tree is not None else None
    planner = _Planner(instance, refuge)

    eps_s, eps_t, min_pts = params.resolve(instance)
    clusters: list[DeliveryCluster] = st_dbscan(
        instance.deliveries, eps_s, eps_t, min_pts
    )

    walks = {ev.id: _Walk(ev) for ev in instance.evs}
    order = [ev.id for ev in instance.evs]
    for cluster in clusters:
        for d_id in cluster.members:
            delivery = instance.deliveries_by_id[d_id]
            assigned: str | None = None
            assigned_outcome: _ServeOutcome | None = None
            best_energy = math.inf
            for ev_id in order:
                walk = walks[ev_id]
                outcome = planner.assess_serve(walk, delivery)
                if outcome.leg_energy < best_energy:
                    if not outcome.battery_ok:
                        if planner.charge_allowed(walk) and tree is not None:
                            target = nearest_cp(tree, instance.location_of(walk.pos))
                            cp = planner.reachable_charge_target(walk, target)
                            if cp is not None:
                                planner.commit_charge(walk, cp)
                        continue
                    if outcome.window_ok:
                        assigned = ev_id
                        assigned_outcome = outcome
                        best_energy = outcome.leg_energy
            if assigned is not None and assigned_outcome is not None:
                planner.commit_serve(walks[assigned], delivery, assigned_outcome)
    return _assemble_plan(instance, planner, [walks[ev_id] for ev_id in order])


# ---------------------------------------------------------------------------
# Baselines


def _baseline_refuge(instance: Instance) -> dict[str, ChargingPoint | None]:
    return {d.id: _distance_nearest_cp(instance, d.id) for d in instance.deliveries}


def edf_plan(instance: Instance, order: str = "start") -> FleetPlan:
    """Earliest-window-first baseline.

    Deliveries are processed in ascending window order (``order="start"``
    keys on window start with window end as tie-break; ``order="deadline"``
    swaps the keys). Each delivery goes to the first vehicle, in fleet
    order, that can serve it now, inserting a distance-nearest charging stop
    when the battery is short.
    """
    if order == "start":
        ranked = sorted(
            instance.deliveries, key=lambda d: (d.window_start, d.window_end, d.id)
        )
    elif order == "deadline":
        ranked = sorted(
            instance.deliveries, key=lambda d: (d.window_end, d.window_start, d.id)
        )
    else:
        raise ConfigError(f"unknown EDF ordering {order!r}")
    planner = _Planner(instance, _baseline_refuge(instance))
    walks = [_Walk(ev) for ev in instance.evs]
    for delivery in ranked:
        for walk in walks:
            outcome = planner.assess_serve(walk, delivery)
            if outcome.battery_ok and outcome.window_ok:
                planner.commit_serve(walk, delivery, outcome)
                break
            if not outcome.battery_ok:
                target = _distance_nearest_cp(instance, walk.pos)
                if planner.try_charge_then_serve(walk, delivery, target):
                    break
    return _assemble_plan(instance, planner, walks)


def ndf_plan(instance: Instance) -> FleetPlan:
    """Nearest-delivery-first baseline.

    Vehicles take turns; on its turn a vehicle serves the nearest unserved
    delivery (from its current location, ties by id) it can feasibly reach,
    charging first when needed. A vehicle that cannot serve anything drops
    out. Initially all vehicles sit at the depot, so the first picks are the
    deliveries closest to the depot.
    """
    planner = _Planner(instance, _baseline_refuge(instance))
    walks = [_Walk(ev) for ev in instance.evs]
    unserved = {d.id for d in instance.deliveries}
    rotation = list(walks)
    while rotation and unserved:
        walk = rotation.pop(0)
        candidates = sorted(
            unserved, key=lambda d_id: (instance.distance(walk.pos, d_id), d_id)
        )
        progressed = False
        for d_id in candidates:
            delivery = instance.deliveries_by_id[d_id]
            outcome = planner.assess_serve(walk, delivery)
            if outcome.battery_ok and outcome.window_ok:
                planner.commit_serve(walk, delivery, outcome)
                progressed = True
            elif not outcome.battery_ok:
                target = _distance_nearest_cp(instance, walk.pos)
                progressed = planner.try_charge_then_serve(walk, delivery, target)
            if progressed:
                unserved.discard(d_id)
                rotation.append(walk)
                break
        # a vehicle with no feasible move is retired from the rotation
    return _assemble_plan(instance, planner, walks)


# ---------------------------------------------------------------------------
# Plan files


def plan_to_dict(plan: FleetPlan) -> dict:
    return {
        "routes": {
            ev_id: [
                {
                    "kind": s.kind,
                    "node": s.node,
                    "arrival_min": s.arrival,
                    "departure_min": s.departure,
                    "energy_at_departure_kwh": s.energy_at_departure,
                    "charge_cost": s.charge_cost,
                }
                for s in route
            ]
            for ev_id, route in sorted(plan.routes.items())
        },
        "schedule": {ev_id: list(times) for ev_id, times in sorted(plan.schedule.items())},
        "served": sorted(plan.served),
        "total_charging_cost": plan.total_charging_cost,
    }


def plan_from_dict(data: Mapping) -> FleetPlan:
    try:
        routes = {
            ev_id: tuple(
                Stop(
                    kind=s["kind"],
                    node=s["node"],
                    arrival=float(s["arrival_min"]),
                    departure=float(s["departure_min"]),
                    energy_at_departure=float(s["energy_at_departure_kwh"]),
                    charge_cost=float(s.get("charge_cost", 0.0)),
                )
                for s in route
            )
            for ev_id, route in data["routes"].items()
        }
        schedule = {
            ev_id: tuple(float(t) for t in times)
            for ev_id, times in data["schedule"].items()
        }
        served = frozenset(data["served"])
        total = float(data["total_charging_cost"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed plan document ({exc})") from None
    return FleetPlan(routes=routes, schedule=schedule, served=served, total_charging_cost=total)


def save_plan(plan: FleetPlan, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(plan_to_dict(plan), indent=2) + "\n", encoding="utf-8")
    return path


def load_plan(path: str | Path) -> FleetPlan:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from None
    return plan_from_dict(data)
