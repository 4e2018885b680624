"""Problem instances: domain types, validation, file formats, synthetic generation.

Unit conventions used everywhere in this package:

* time in minutes, distance in miles, energy in kWh, power in kW;
* charging durations convert kW to kWh/min with a factor of 1/60.

The depot always carries the node id ``d0`` and doubles as the cheapest
charging location (vehicles start their day fully charged there).
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ConfigError, ParseError, UnknownNodeError, ValidationError

DEPOT_ID = "d0"

EARTH_RADIUS_MILES = 3958.8

# Node/EV ids end up inside exported variable names, so they must stay
# identifier-like.
_ID_RE = re.compile(r"^[A-Za-z][A-Za-z0-9_]*$")


@dataclass(frozen=True)
class Location:
    """A planar or geographic coordinate pair.

    ``x``/``y`` are abstract miles for planar instances and
    longitude/latitude degrees for geographic ones.
    """

    x: float
    y: float


@dataclass(frozen=True)
class Delivery:
    id: str
    location: Location
    window_start: float  # earliest completion time [min]
    window_end: float  # latest completion time [min]


@dataclass(frozen=True)
class ChargingPoint:
    id: str
    location: Location
    unit_cost: float  # $/kWh
    charge_rate: float  # kW
    avg_wait: float  # queueing time before charging starts [min]


@dataclass(frozen=True)
class ElectricVehicle:
    id: str
    battery_capacity: float  # kWh, uniform across the fleet
    acceptance_rate: float  # max charging power the vehicle accepts [kW]
    mileage: float  # miles/kWh
    avg_speed: float  # miles/min


@dataclass(frozen=True)
class Depot:
    """The single distribution center; also the cheapest charging location."""

    location: Location
    unit_cost: float  # $/kWh


@dataclass(frozen=True)
class TravelMetric:
    """Pairwise travel distances (and optionally times) between nodes.

    ``mode`` is one of ``explicit-matrix``, ``euclidean`` or ``haversine``.
    Explicit matrices may be asymmetric and may violate the triangle
    inequality; they are preserved verbatim. When an explicit time matrix is
    present it takes precedence over distance/speed derived travel times.
    """

    mode: str
    distances: Mapping[tuple[str, str], float] | None = None
    times: Mapping[tuple[str, str], float] | None = None


@dataclass(frozen=True)
class Instance:
    depot: Depot
    deliveries: tuple[Delivery, ...]
    charging_points: tuple[ChargingPoint, ...]
    evs: tuple[ElectricVehicle, ...]
    metric: TravelMetric
    unload_time: float  # minutes spent at every delivery
    horizon: float  # latest event time; sizes the time-side big-M

    @cached_property
    def deliveries_by_id(self) -> dict[str, Delivery]:
        return {d.id: d for d in self.deliveries}

    @cached_property
    def cps_by_id(self) -> dict[str, ChargingPoint]:
        return {c.id: c for c in self.charging_points}

    @cached_property
    def evs_by_id(self) -> dict[str, ElectricVehicle]:
        return {e.id: e for e in self.evs}

    @cached_property
    def node_ids(self) -> tuple[str, ...]:
        return (DEPOT_ID,) + tuple(d.id for d in self.deliveries) + tuple(
            c.id for c in self.charging_points
        )

    @property
    def battery_capacity(self) -> float:
        """Fleet-wide battery capacity (validated uniform)."""
        return self.evs[0].battery_capacity

    def location_of(self, node_id: str) -> Location:
        if node_id == DEPOT_ID:
            return self.depot.location
        d = self.deliveries_by_id.get(node_id)
        if d is not None:
            return d.location
        c = self.cps_by_id.get(node_id)
        if c is not None:
            return c.location
        raise UnknownNodeError(node_id)

    def unit_cost_of(self, node_id: str) -> float:
        """Charging price at a charging location (depot or CP)."""
        if node_id == DEPOT_ID:
            return self.depot.unit_cost
        c = self.cps_by_id.get(node_id)
        if c is None:
            raise UnknownNodeError(node_id)
        return c.unit_cost

    def distance(self, from_id: str, to_id: str) -> float:
        if from_id == to_id:
            self.location_of(from_id)  # still validate the id
            return 0.0
        if self.metric.mode == "explicit-matrix":
            assert self.metric.distances is not None
            try:
                return self.metric.distances[(from_id, to_id)]
            except KeyError:
                # Ids may be valid but missing from a sparse matrix; surface
                # which one is unknown vs. which pair is absent.
                self.location_of(from_id)
                self.location_of(to_id)
                raise UnknownNodeError(f"{from_id}->{to_id}") from None
        a = self.location_of(from_id)
        b = self.location_of(to_id)
        if self.metric.mode == "haversine":
            return _haversine_miles(a, b)
        return math.hypot(a.x - b.x, a.y - b.y)

    def explicit_time(self, from_id: str, to_id: str) -> float | None:
        if self.metric.times is None:
            return None
        if from_id == to_id:
            return 0.0
        return self.metric.times.get((from_id, to_id))

    def bounding_box(self) -> tuple[float, float, float, float]:
        """(min_x, min_y, max_x, max_y) over all node coordinates."""
        locs = [self.location_of(n) for n in self.node_ids]
        xs = [p.x for p in locs]
        ys = [p.y for p in locs]
        return min(xs), min(ys), max(xs), max(ys)

    def bounding_diagonal(self) -> float:
        x0, y0, x1, y1 = self.bounding_box()
        return math.hypot(x1 - x0, y1 - y0)

    def depot_as_charging_point(self) -> ChargingPoint:
        """The depot viewed as a charging candidate.

        The depot has no published charger hardware, so its rate is treated as
        vehicle-limited (infinite station power) with no queueing.
        """
        return ChargingPoint(
            id=DEPOT_ID,
            location=self.depot.location,
            unit_cost=self.depot.unit_cost,
            charge_rate=math.inf,
            avg_wait=0.0,
        )


def _haversine_miles(a: Location, b: Location) -> float:
    lon1, lat1, lon2, lat2 = map(math.radians, (a.x, a.y, b.x, b.y))
    dlat = lat2 - lat1
    dlon = lon2 - lon1
    h = math.sin(dlat / 2) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2) ** 2
    return 2 * EARTH_RADIUS_MILES * math.asin(math.sqrt(h))


def travel_time(instance: Instance, ev: ElectricVehicle, from_id: str, to_id: str) -> float:
    """Minutes to traverse ``from_id -> to_id``.

    An explicit time matrix entry always wins; otherwise distance divided by
    the vehicle's average speed.
    """
    explicit = instance.explicit_time(from_id, to_id)
    if explicit is not None:
        instance.location_of(from_id)
        instance.location_of(to_id)
        return explicit
    return instance.distance(from_id, to_id) / ev.avg_speed


def energy_required(instance: Instance, ev: ElectricVehicle, from_id: str, to_id: str) -> float:
    """kWh consumed traversing ``from_id -> to_id`` (distance / mileage)."""
    return instance.distance(from_id, to_id) / ev.mileage


def effective_charge_rate(ev: ElectricVehicle, cp: ChargingPoint) -> float:
    """Power actually delivered: the slower of station output and vehicle acceptance."""
    return min(ev.acceptance_rate, cp.charge_rate)


def charge_minutes(deficit_kwh: float, ev: ElectricVehicle, cp: ChargingPoint) -> float:
    """Minutes to refill ``deficit_kwh`` at ``cp``, excluding the queue wait."""
    rate = effective_charge_rate(ev, cp)
    if deficit_kwh <= 0.0:
        return 0.0
    return deficit_kwh * 60.0 / rate


# ---------------------------------------------------------------------------
# Validation


def _check_id(kind: str, value: str) -> None:
    if not isinstance(value, str) or not _ID_RE.match(value):
        raise ValidationError(
            f"{kind} id {value!r}: ids must match [A-Za-z][A-Za-z0-9_]* "
            "(they are embedded in exported variable names)"
        )


def _check_finite(name: str, value: float) -> None:
    if not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ValidationError(f"{name}: must be a finite number, got {value!r}")


def validate_instance(instance: Instance) -> Instance:
    """Check every instance invariant; raises ValidationError naming the first offender."""
    _check_finite("depot.x", instance.depot.location.x)
    _check_finite("depot.y", instance.depot.location.y)
    _check_finite("depot.unit_cost", instance.depot.unit_cost)
    if instance.depot.unit_cost <= 0:
        raise ValidationError("depot.unit_cost: must be > 0")
    _check_finite("unload_time", instance.unload_time)
    if instance.unload_time < 0:
        raise ValidationError("unload_time: must be >= 0")
    _check_finite("horizon", instance.horizon)
    if instance.horizon <= 0:
        raise ValidationError("horizon: must be > 0")
    if not instance.evs:
        raise ValidationError("evs: at least one vehicle is required")
    if not instance.deliveries:
        raise ValidationError("deliveries: at least one delivery is required")

    seen: set[str] = set()
    for node_id in (DEPOT_ID,) + tuple(d.id for d in instance.deliveries) + tuple(
        c.id for c in instance.charging_points
    ) + tuple(e.id for e in instance.evs):
        if node_id in seen:
            raise ValidationError(f"id {node_id!r}: duplicated")
        seen.add(node_id)

    for d in instance.deliveries:
        _check_id("delivery", d.id)
        _check_finite(f"delivery {d.id}: x", d.location.x)
        _check_finite(f"delivery {d.id}: y", d.location.y)
        _check_finite(f"delivery {d.id}: window_start", d.window_start)
        _check_finite(f"delivery {d.id}: window_end", d.window_end)
        if d.window_start < 0:
            raise ValidationError(f"delivery {d.id}: window_start must be >= 0")
        if d.window_end < d.window_start + instance.unload_time:
            raise ValidationError(
                f"delivery {d.id}: window_end must be >= window_start + unload_time "
                f"({d.window_end} < {d.window_start} + {instance.unload_time})"
            )
        if d.window_end > instance.horizon:
            raise ValidationError(
                f"delivery {d.id}: window_end {d.window_end} exceeds horizon {instance.horizon}"
            )

    for c in instance.charging_points:
        _check_id("charging_point", c.id)
        _check_finite(f"charging_point {c.id}: x", c.location.x)
        _check_finite(f"charging_point {c.id}: y", c.location.y)
        _check_finite(f"charging_point {c.id}: unit_cost", c.unit_cost)
        _check_finite(f"charging_point {c.id}: charge_rate", c.charge_rate)
        _check_finite(f"charging_point {c.id}: avg_wait", c.avg_wait)
        if c.unit_cost <= 0:
            raise ValidationError(f"charging_point {c.id}: unit_cost must be > 0")
        if c.charge_rate <= 0:
            raise ValidationError(f"charging_point {c.id}: charge_rate must be > 0")
        if c.avg_wait < 0:
            raise ValidationError(f"charging_point {c.id}: avg_wait must be >= 0")
        if instance.depot.unit_cost > c.unit_cost:
            raise ValidationError(
                f"depot.unit_cost: must not exceed charging_point {c.id} unit_cost "
                f"({instance.depot.unit_cost} > {c.unit_cost})"
            )

    battery = instance.evs[0].battery_capacity
    for e in instance.evs:
        _check_id("ev", e.id)
        for fname, value in (
            ("battery_capacity", e.battery_capacity),
            ("acceptance_rate", e.acceptance_rate),
            ("mileage", e.mileage),
            ("avg_speed", e.avg_speed),
        ):
            _check_finite(f"ev {e.id}: {fname}", value)
            if value <= 0:
                raise ValidationError(f"ev {e.id}: {fname} must be > 0")
        if e.battery_capacity != battery:
            raise ValidationError(
                f"ev {e.id}: battery_capacity {e.battery_capacity} differs from fleet "
                f"capacity {battery} (the fleet battery is uniform)"
            )

    _validate_metric(instance)
    return instance


def _validate_metric(instance: Instance) -> None:
    metric = instance.metric
    if metric.mode not in ("explicit-matrix", "euclidean", "haversine"):
        raise ValidationError(f"metric.mode: unknown mode {metric.mode!r}")
    if metric.mode == "explicit-matrix":
        if metric.distances is None:
            raise ValidationError("metric.distances: required for explicit-matrix mode")
        nodes = instance.node_ids
        for a in nodes:
            for b in nodes:
                if a == b:
                    diag = metric.distances.get((a, b))
                    if diag is not None and diag != 0.0:
                        raise ValidationError(
                            f"metric.distances[{a},{b}]: self-distance must be 0"
                        )
                    continue
                v = metric.distances.get((a, b))
                if v is None:
                    raise ValidationError(f"metric.distances[{a},{b}]: missing entry")
                _check_finite(f"metric.distances[{a},{b}]", v)
                if v < 0:
                    raise ValidationError(f"metric.distances[{a},{b}]: must be >= 0")
    elif metric.distances is not None:
        raise ValidationError("metric.distances: only allowed in explicit-matrix mode")
    if metric.times is not None:
        nodes = set(instance.node_ids)
        for (a, b), v in metric.times.items():
            if a not in nodes or b not in nodes:
                raise ValidationError(f"metric.times[{a},{b}]: unknown node id")
            _check_finite(f"metric.times[{a},{b}]", v)
            if v < 0:
                raise ValidationError(f"metric.times[{a},{b}]: must be >= 0")
            if a == b and v != 0.0:
                raise ValidationError(f"metric.times[{a},{b}]: self-time must be 0")


def default_horizon(
    depot: Depot,
    deliveries: Sequence[Delivery],
    charging_points: Sequence[ChargingPoint],
    evs: Sequence[ElectricVehicle],
    metric: TravelMetric,
) -> float:
    """Smallest constant that dominates every feasible event time.

    Latest window end, plus the longest possible leg at the slowest speed,
    plus the slowest possible full recharge and the worst queue wait. Big-M
    constants derived from the horizon then cover charging-point departure
    times as well as delivery times.
    """
    latest_end = max(d.window_end for d in deliveries)
    probe = Instance(
        depot=depot,
        deliveries=tuple(deliveries),
        charging_points=tuple(charging_points),
        evs=tuple(evs),
        metric=metric,
        unload_time=0.0,
        horizon=1.0,
    )
    nodes = probe.node_ids
    longest_leg = 0.0
    for a in nodes:
        for b in nodes:
            if a != b:
                longest_leg = max(longest_leg, probe.distance(a, b))
    slowest_speed = min(e.avg_speed for e in evs)
    battery = evs[0].battery_capacity
    slowest_rate = min(e.acceptance_rate for e in evs)
    if charging_points:
        slowest_rate = min(slowest_rate, min(c.charge_rate for c in charging_points))
        max_wait = max(c.avg_wait for c in charging_points)
    else:
        max_wait = 0.0
    return (
        latest_end
        + longest_leg / slowest_speed
        + battery * 60.0 / slowest_rate
        + max_wait
    )


# ---------------------------------------------------------------------------
# Native file format


def _location_fields(obj: Mapping, what: str) -> Location:
    try:
        return Location(x=float(obj["x"]), y=float(obj["y"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{what}: malformed coordinates ({exc})") from None


def _matrix_from_json(obj: Mapping, what: str) -> dict[tuple[str, str], float]:
    out: dict[tuple[str, str], float] = {}
    for frm, row in obj.items():
        if not isinstance(row, Mapping):
            raise ParseError(f"{what}[{frm}]: expected an object of node -> value")
        for to, v in row.items():
            try:
                out[(str(frm), str(to))] = float(v)
            except (TypeError, ValueError):
                raise ParseError(f"{what}[{frm}][{to}]: not a number") from None
    return out


def _matrix_to_json(matrix: Mapping[tuple[str, str], float]) -> dict:
    nested: dict[str, dict[str, float]] = {}
    for (frm, to) in sorted(matrix.keys()):
        nested.setdefault(frm, {})[to] = matrix[(frm, to)]
    return nested


def instance_to_dict(instance: Instance) -> dict:
    """Canonical JSON-ready representation (fixed key order)."""
    metric: dict = {"mode": instance.metric.mode}
    if instance.metric.distances is not None:
        metric["distances_miles"] = _matrix_to_json(instance.metric.distances)
    if instance.metric.times is not None:
        metric["times_min"] = _matrix_to_json(instance.metric.times)
    return {
        "depot": {
            "x": instance.depot.location.x,
            "y": instance.depot.location.y,
            "unit_cost_per_kwh": instance.depot.unit_cost,
        },
        "deliveries": [
            {
                "id": d.id,
                "x": d.location.x,
                "y": d.location.y,
                "window_start_min": d.window_start,
                "window_end_min": d.window_end,
            }
            for d in instance.deliveries
        ],
        "charging_points": [
            {
                "id": c.id,
                "x": c.location.x,
                "y": c.location.y,
                "unit_cost_per_kwh": c.unit_cost,
                "charge_rate_kw": c.charge_rate,
                "avg_wait_min": c.avg_wait,
            }
            for c in instance.charging_points
        ],
        "evs": [
            {
                "id": e.id,
                "battery_capacity_kwh": e.battery_capacity,
                "acceptance_rate_kw": e.acceptance_rate,
                "mileage_miles_per_kwh": e.mileage,
                "avg_speed_miles_per_min": e.avg_speed,
            }
            for e in instance.evs
        ],
        "metric": metric,
        "params": {
            "unload_time_min": instance.unload_time,
            "horizon_min": instance.horizon,
        },
    }


def instance_from_dict(data: Mapping) -> Instance:
    for key in ("depot", "deliveries", "charging_points", "evs", "metric", "params"):
        if key not in data:
            raise ParseError(f"missing top-level key {key!r}")
    depot_obj = data["depot"]
    try:
        depot = Depot(
            location=_location_fields(depot_obj, "depot"),
            unit_cost=float(depot_obj["unit_cost_per_kwh"]),
        )
    except (KeyError, TypeError, ValueError):
        raise ParseError("depot: missing or malformed unit_cost_per_kwh") from None

    deliveries = []
    for i, obj in enumerate(data["deliveries"]):
        try:
            deliveries.append(
                Delivery(
                    id=str(obj["id"]),
                    location=_location_fields(obj, f"deliveries[{i}]"),
                    window_start=float(obj["window_start_min"]),
                    window_end=float(obj["window_end_min"]),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"deliveries[{i}]: malformed record ({exc})") from None

    cps = []
    for i, obj in enumerate(data["charging_points"]):
        try:
            cps.append(
                ChargingPoint(
                    id=str(obj["id"]),
                    location=_location_fields(obj, f"charging_points[{i}]"),
                    unit_cost=float(obj["unit_cost_per_kwh"]),
                    charge_rate=float(obj["charge_rate_kw"]),
                    avg_wait=float(obj["avg_wait_min"]),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"charging_points[{i}]: malformed record ({exc})") from None

    evs = []
    for i, obj in enumerate(data["evs"]):
        try:
            evs.append(
                ElectricVehicle(
                    id=str(obj["id"]),
                    battery_capacity=float(obj["battery_capacity_kwh"]),
                    acceptance_rate=float(obj["acceptance_rate_kw"]),
                    mileage=float(obj["mileage_miles_per_kwh"]),
                    avg_speed=float(obj["avg_speed_miles_per_min"]),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"evs[{i}]: malformed record ({exc})") from None

    metric_obj = data["metric"]
    mode = metric_obj.get("mode")
    if mode not in ("explicit-matrix", "euclidean", "haversine"):
        raise ParseError(f"metric.mode: unknown mode {mode!r}")
    distances = None
    times = None
    if "distances_miles" in metric_obj:
        distances = _matrix_from_json(metric_obj["distances_miles"], "metric.distances_miles")
    if "times_min" in metric_obj:
        times = _matrix_from_json(metric_obj["times_min"], "metric.times_min")
    if mode == "explicit-matrix" and distances is None:
        raise ParseError("metric: explicit-matrix mode requires distances_miles")
    metric = TravelMetric(mode=mode, distances=distances, times=times)

    params = data["params"]
    try:
        unload = float(params["unload_time_min"])
    except (KeyError, TypeError, ValueError):
        raise ParseError("params.unload_time_min: missing or not a number") from None
    horizon_raw = params.get("horizon_min")
    if horizon_raw is None:
        horizon = default_horizon(depot, deliveries, cps, evs, metric)
    else:
        try:
            horizon = float(horizon_raw)
        except (TypeError, ValueError):
            raise ParseError("params.horizon_min: not a number") from None

    return Instance(
        depot=depot,
        deliveries=tuple(deliveries),
        charging_points=tuple(cps),
        evs=tuple(evs),
        metric=metric,
        unload_time=unload,
        horizon=horizon,
    )


def save_instance(instance: Instance, path: str | Path) -> Path:
    """Write the canonical native JSON document (stable byte-for-byte)."""
    path = Path(path)
    text = json.dumps(instance_to_dict(instance), indent=2) + "\n"
    path.write_text(text, encoding="utf-8")
    return path


def load_instance(path: str | Path, fmt: str = "native-json") -> Instance:
    """Load and validate an instance file.

    ``fmt`` is ``native-json`` (the canonical JSON document) or ``jd-style``
    (sectioned node/edge records, see the README for the exact layout).
    """
    path = Path(path)
    if fmt == "native-json":
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: invalid JSON ({exc})") from None
        if not isinstance(data, Mapping):
            raise ParseError(f"{path}: top level must be an object")
        instance = instance_from_dict(data)
    elif fmt == "jd-style":
        instance = _parse_jd_style(path.read_text(encoding="utf-8"))
    else:
        raise ConfigError(f"unknown instance format {fmt!r}")
    return validate_instance(instance)


# ---------------------------------------------------------------------------
# JD-style ingestion (sectioned node/edge records)

_JD_DEFAULTS = {
    "AVG_SPEED": 0.5,
    "WAIT_TIME": 0.0,
    "UNLOAD_TIME": None,  # falls back to max customer service time
    "ACCEPTANCE_RATE": None,  # falls back to RECHARGING_RATE
}

_JD_REQUIRED = ("VEHICLES", "ELECTRIC_POWER", "CONSUMPTION_RATE", "RECHARGING_RATE",
                "CHARGE_COST", "DEPOT_CHARGE_COST")


def _parse_jd_style(text: str) -> Instance:
    header: dict[str, float] = {}
    nodes: list[dict] = []
    edges: list[tuple[str, str, float, float]] = []
    depot_raw_ids: list[str] = []
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line == "NODE_SECTION":
            section = "nodes"
            continue
        if line == "DISTANCETIME_SECTION":
            section = "edges"
            continue
        if line == "DEPOT_SECTION":
            section = "depot"
            continue
        if line == "EOF":
            break
        if section is None:
            if ":" not in line:
                raise ParseError(f"line {lineno}: expected 'KEY : value' header, got {line!r}")
            key, _, value = line.partition(":")
            try:
                header[key.strip().upper()] = float(value.strip())
            except ValueError:
                raise ParseError(f"line {lineno}: header value for {key.strip()!r} is not a number") from None
        elif section == "nodes":
            parts = [p.strip() for p in line.split(",")]
            if parts[0].upper() == "ID":
                continue  # column header
            if len(parts) < 9:
                raise ParseError(f"line {lineno}: node record needs 9 columns, got {len(parts)}")
            try:
                nodes.append(
                    {
                        "raw_id": parts[0],
                        "type": parts[1].lower(),
                        "x": float(parts[2]),
                        "y": float(parts[3]),
                        "ready": float(parts[6]),
                        "due": float(parts[7]),
                        "service": float(parts[8]),
                    }
                )
            except ValueError:
                raise ParseError(f"line {lineno}: malformed node record") from None
        elif section == "edges":
            parts = [p.strip() for p in line.split(",")]
            if parts[0].upper() == "ID":
                continue
            if len(parts) < 5:
                raise ParseError(f"line {lineno}: edge record needs 5 columns, got {len(parts)}")
            try:
                edges.append((parts[1], parts[2], float(parts[3]), float(parts[4])))
            except ValueError:
                raise ParseError(f"line {lineno}: malformed edge record") from None
        elif section == "depot":
            depot_raw_ids.append(line)

    for key in _JD_REQUIRED:
        if key not in header:
            raise ParseError(f"missing required header key {key!r}")

    depot_node = None
    if depot_raw_ids:
        wanted = depot_raw_ids[0]
        depot_node = next((n for n in nodes if n["raw_id"] == wanted), None)
        if depot_node is None:
            raise ParseError(f"DEPOT_SECTION names unknown node {wanted!r}")
    else:
        depot_node = next((n for n in nodes if n["type"] == "d"), None)
    if depot_node is None:
        raise ParseError("no depot node (type 'd' or DEPOT_SECTION entry) found")

    id_map: dict[str, str] = {depot_node["raw_id"]: DEPOT_ID}
    deliveries: list[Delivery] = []
    cps: list[ChargingPoint] = []
    service_times: list[float] = []
    for n in nodes:
        if n is depot_node:
            continue
        if n["type"] == "c":
            new_id = f"d{len(deliveries) + 1}"
            id_map[n["raw_id"]] = new_id
            deliveries.append(
                Delivery(
                    id=new_id,
                    location=Location(n["x"], n["y"]),
                    window_start=n["ready"],
                    window_end=n["due"],
                )
            )
            service_times.append(n["service"])
        elif n["type"] == "f":
            new_id = f"c{len(cps) + 1}"
            id_map[n["raw_id"]] = new_id
            cps.append(
                ChargingPoint(
                    id=new_id,
                    location=Location(n["x"], n["y"]),
                    unit_cost=header["CHARGE_COST"],
                    charge_rate=header["RECHARGING_RATE"],
                    avg_wait=header.get("WAIT_TIME", _JD_DEFAULTS["WAIT_TIME"]),
                )
            )
        # pickup-style or other node types are outside the model; skipped

    if not deliveries:
        raise ParseError("no delivery nodes (type 'c') found")

    unload = header.get("UNLOAD_TIME")
    if unload is None:
        unload = max(service_times) if service_times else 0.0

    acceptance = header.get("ACCEPTANCE_RATE")
    if acceptance is None:
        acceptance = header["RECHARGING_RATE"]
    n_evs = int(header["VEHICLES"])
    if n_evs < 1:
        raise ParseError("VEHICLES: must be >= 1")
    consumption = header["CONSUMPTION_RATE"]
    if consumption <= 0:
        raise ParseError("CONSUMPTION_RATE: must be > 0")
    evs = tuple(
        ElectricVehicle(
            id=f"e{j + 1}",
            battery_capacity=header["ELECTRIC_POWER"],
            acceptance_rate=acceptance,
            mileage=1.0 / consumption,
            avg_speed=header.get("AVG_SPEED", _JD_DEFAULTS["AVG_SPEED"]),
        )
        for j in range(n_evs)
    )

    depot = Depot(
        location=Location(depot_node["x"], depot_node["y"]),
        unit_cost=header["DEPOT_CHARGE_COST"],
    )

    if edges:
        distances: dict[tuple[str, str], float] = {}
        times: dict[tuple[str, str], float] = {}
        for frm, to, dist, minutes in edges:
            if frm not in id_map or to not in id_map:
                # edges touching skipped node types are dropped
                continue
            distances[(id_map[frm], id_map[to])] = dist
            times[(id_map[frm], id_map[to])] = minutes
        metric = TravelMetric(mode="explicit-matrix", distances=distances, times=times or None)
    else:
        xs = [n["x"] for n in nodes]
        ys = [n["y"] for n in nodes]
        geographic = all(-180.0 <= x <= 180.0 for x in xs) and all(
            -90.0 <= y <= 90.0 for y in ys
        ) and (max(xs) - min(xs) <= 5.0) and (max(ys) - min(ys) <= 5.0)
        metric = TravelMetric(mode="haversine" if geographic else "euclidean")

    horizon = default_horizon(depot, deliveries, cps, evs, metric)
    return Instance(
        depot=depot,
        deliveries=tuple(deliveries),
        charging_points=tuple(cps),
        evs=evs,
        metric=metric,
        unload_time=unload,
        horizon=horizon,
    )


# ---------------------------------------------------------------------------
# Synthetic generation


@dataclass(frozen=True)
class GeneratorConfig:
    """Parameter ranges for synthetic instances.

    Defaults give a 20x20 mile service area with level-3 public chargers
    (50-350 kW at $0.4-0.6/kWh), cheaper depot charging, and batteries small
    enough that multi-delivery routes occasionally need an en-route recharge.
    """

    area: tuple[float, float] = (20.0, 20.0)
    battery_range: tuple[float, float] = (12.0, 20.0)
    mileage_range: tuple[float, float] = (2.0, 5.0)
    speed_range: tuple[float, float] = (0.4, 0.8)
    acceptance_rate_range: tuple[float, float] = (50.0, 250.0)
    cp_cost_range: tuple[float, float] = (0.4, 0.6)
    cp_rate_range: tuple[float, float] = (50.0, 350.0)
    cp_wait_range: tuple[float, float] = (2.0, 10.0)
    depot_cost_range: tuple[float, float] = (0.25, 0.35)
    window_width_range: tuple[float, float] = (60.0, 180.0)
    day_length: float = 600.0
    unload_time: float = 5.0


def _check_range(name: str, rng: tuple[float, float], positive: bool = True) -> None:
    if len(rng) != 2 or not all(math.isfinite(v) for v in rng):
        raise ConfigError(f"{name}: expected a finite (min, max) pair, got {rng!r}")
    lo, hi = rng
    if lo > hi:
        raise ConfigError(f"{name}: min {lo} exceeds max {hi}")
    if positive and lo <= 0:
        raise ConfigError(f"{name}: values must be > 0")


def validate_generator_config(config: GeneratorConfig) -> GeneratorConfig:
    _check_range("area", config.area)
    _check_range("battery_range", config.battery_range)
    _check_range("mileage_range", config.mileage_range)
    _check_range("speed_range", config.speed_range)
    _check_range("acceptance_rate_range", config.acceptance_rate_range)
    _check_range("cp_cost_range", config.cp_cost_range)
    _check_range("cp_rate_range", config.cp_rate_range)
    _check_range("cp_wait_range", config.cp_wait_range, positive=False)
    if config.cp_wait_range[0] < 0:
        raise ConfigError("cp_wait_range: values must be >= 0")
    _check_range("depot_cost_range", config.depot_cost_range)
    if config.depot_cost_range[1] > config.cp_cost_range[0]:
        raise ConfigError(
            "depot_cost_range: depot charging must stay at or below the cheapest "
            f"public rate ({config.depot_cost_range[1]} > {config.cp_cost_range[0]})"
        )
    _check_range("window_width_range", config.window_width_range)
    if config.day_length <= 0 or not math.isfinite(config.day_length):
        raise ConfigError("day_length: must be > 0")
    if config.unload_time < 0 or not math.isfinite(config.unload_time):
        raise ConfigError("unload_time: must be >= 0")
    if config.window_width_range[0] < config.unload_time:
        raise ConfigError(
            "window_width_range: narrowest window must be at least the unload time"
        )
    if config.window_width_range[1] > config.day_length:
        raise ConfigError("window_width_range: widest window exceeds day_length")
    return config


def generate_synthetic(
    seed: int,
    n_deliveries: int,
    n_cps: int,
    n_evs: int,
    params: GeneratorConfig | None = None,
) -> Instance:
    """Deterministically generate a validated instance.

    Pure in (seed, counts, params): repeated calls return identical
    instances. Charging points come from their own seed substream, so
    sweeping the charging-point count leaves the depot, fleet and deliveries
    of a given seed untouched (paired comparisons across availability
    levels). Within each stream the draw order is fixed.
    """
    if n_deliveries < 1 or n_cps < 1 or n_evs < 1:
        raise ConfigError("n_deliveries, n_cps and n_evs must all be >= 1")
    config = validate_generator_config(params or GeneratorConfig())
    rng = np.random.default_rng(seed)
    rng_cp = np.random.default_rng([seed, 1])
    width, height = config.area
    depot = Depot(
        location=Location(width / 2.0, height / 2.0),
        unit_cost=float(rng.uniform(*config.depot_cost_range)),
    )
    battery = float(rng.uniform(*config.battery_range))
    evs = tuple(
        ElectricVehicle(
            id=f"e{j + 1}",
            battery_capacity=battery,
            acceptance_rate=float(rng.uniform(*config.acceptance_rate_range)),
            mileage=float(rng.uniform(*config.mileage_range)),
            avg_speed=float(rng.uniform(*config.speed_range)),
        )
        for j in range(n_evs)
    )
    cps = tuple(
        ChargingPoint(
            id=f"c{q + 1}",
            location=Location(
                float(rng_cp.uniform(0, width)), float(rng_cp.uniform(0, height))
            ),
            unit_cost=float(rng_cp.uniform(*config.cp_cost_range)),
            charge_rate=float(rng_cp.uniform(*config.cp_rate_range)),
            avg_wait=float(rng_cp.uniform(*config.cp_wait_range)),
        )
        for q in range(n_cps)
    )
    deliveries = []
    for i in range(n_deliveries):
        # rejection-sample until some vehicle can round-trip the point on one
        # battery; its window is then shifted so that same vehicle also fits
        # the time side, making every delivery individually serviceable
        for _ in range(1000):
            loc = Location(float(rng.uniform(0, width)), float(rng.uniform(0, height)))
            dist = math.hypot(loc.x - depot.location.x, loc.y - depot.location.y)
            capable = [e for e in evs if 2.0 * dist / e.mileage <= battery]
            if capable:
                break
        else:
            raise ConfigError(
                "battery_range too small: no vehicle can round-trip sampled "
                "deliveries; enlarge battery_range or shrink area"
            )
        width_min = float(rng.uniform(*config.window_width_range))
        start = float(rng.uniform(0.0, max(config.day_length - width_min, 0.0)))
        end = start + width_min
        reach = dist / max(e.avg_speed for e in capable)
        earliest_done = reach + config.unload_time
        if end < earliest_done:
            shift = earliest_done - end
            start += shift
            end += shift
        deliveries.append(
            Delivery(id=f"d{i + 1}", location=loc, window_start=start, window_end=end)
        )
    metric = TravelMetric(mode="euclidean")
    horizon = default_horizon(depot, deliveries, cps, evs, metric)
    instance = Instance(
        depot=depot,
        deliveries=tuple(deliveries),
        charging_points=cps,
        evs=evs,
        metric=metric,
        unload_time=config.unload_time,
        horizon=horizon,
    )
    return validate_instance(instance)
