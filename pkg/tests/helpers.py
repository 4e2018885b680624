"""Shared construction helpers for the test suite."""

from __future__ import annotations

from edrp import (
    ChargingPoint,
    Delivery,
    Depot,
    ElectricVehicle,
    Instance,
    Location,
    TravelMetric,
)
from edrp.instance import default_horizon


def make_instance(
    deliveries,
    cps,
    evs,
    depot_xy=(0.0, 0.0),
    depot_cost=0.3,
    unload=5.0,
    metric=None,
    horizon=None,
) -> Instance:
    depot = Depot(location=Location(*depot_xy), unit_cost=depot_cost)
    metric = metric or TravelMetric(mode="euclidean")
    if horizon is None:
        horizon = default_horizon(depot, deliveries, cps, evs, metric)
    return Instance(
        depot=depot,
        deliveries=tuple(deliveries),
        charging_points=tuple(cps),
        evs=tuple(evs),
        metric=metric,
        unload_time=unload,
        horizon=horizon,
    )


def delivery(did, x, y, start, end) -> Delivery:
    return Delivery(id=did, location=Location(x, y), window_start=start, window_end=end)


def cp(cid, x, y, cost=0.5, rate=100.0, wait=0.0) -> ChargingPoint:
    return ChargingPoint(id=cid, location=Location(x, y), unit_cost=cost, charge_rate=rate, avg_wait=wait)


def ev(eid, battery=100.0, acceptance=100.0, mileage=2.0, speed=0.5) -> ElectricVehicle:
    return ElectricVehicle(
        id=eid,
        battery_capacity=battery,
        acceptance_rate=acceptance,
        mileage=mileage,
        avg_speed=speed,
    )


def matrix(entries: dict[tuple[str, str], float]) -> dict[tuple[str, str], float]:
    """Symmetric completion helper: fills (b, a) with (a, b) unless present."""
    out = dict(entries)
    for (a, b), v in entries.items():
        out.setdefault((b, a), v)
    return out
