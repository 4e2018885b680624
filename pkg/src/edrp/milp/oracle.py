"""Provably optimal plans for desk-scale instances by exhaustive search.

The search space covers every split of the deliveries across vehicles
(including leaving deliveries unserved), every visit order, and every way of
inserting full-recharge stops between deliveries (any charging point, never
two in a row, within the subtrip budget). Each candidate is replayed with
the simulator's movement semantics; the feasible candidate with the best
objective wins, ties broken by lower charging cost and then by
lexicographically smallest route signature.

Guarded by explicit size limits: enumeration refuses oversized instances
rather than silently truncating.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations, product

from ..errors import EnumerationLimitError
from ..heuristics import FleetPlan, Stop
from ..instance import (
    DEPOT_ID,
    ElectricVehicle,
    Instance,
    charge_minutes,
    energy_required,
    travel_time,
)
from .model import Assignment, CheckReport, build_model, check_solution, default_alphas, default_l_max
from .translate import plan_to_assignment

_EPS = 1e-9


@dataclass(frozen=True)
class EnumerationLimits:
    """Size guards plus the model parameters the optimum is defined against."""

    max_deliveries: int = 6
    max_evs: int = 2
    max_cps: int = 3
    l_max: int | None = None
    alphas: tuple[float, float] | None = None
    bill_depot_return: bool = True


@dataclass(frozen=True)
class OracleResult:
    plan: FleetPlan
    objective: float
    served: int
    total_cost: float
    max_feasible_served: int  # best delivery count over all feasible candidates


class _EvSearch:
    """Best (cost, route) per delivery subset for one vehicle, memoized."""

    def __init__(self, instance: Instance, ev: ElectricVehicle, max_charges: int, bill: bool):
        self.instance = instance
        self.ev = ev
        self.max_charges = max_charges
        self.bill = bill
        self.battery = ev.battery_capacity
        self.deliveries = instance.deliveries
        self.cps = instance.charging_points
        nodes = [DEPOT_ID] + [d.id for d in self.deliveries] + [c.id for c in self.cps]
        self.gamma = {
            (a, b): travel_time(instance, ev, a, b) for a in nodes for b in nodes
        }
        self.psi = {
            (a, b): energy_required(instance, ev, a, b) for a in nodes for b in nodes
        }

    def best_per_mask(self) -> list[tuple[float, tuple[str, ...]] | None]:
        k = len(self.deliveries)
        out: list[tuple[float, tuple[str, ...]] | None] = [None] * (1 << k)
        out[0] = (0.0, ())
        for mask in range(1, 1 << k):
            members = [i for i in range(k) if mask & (1 << i)]
            best: tuple[float, tuple[str, ...]] | None = None
            for perm in permutations(members):
                best = self._explore(perm, best)
            out[mask] = best
        return out

    def _explore(
        self,
        perm: tuple[int, ...],
        best: tuple[float, tuple[str, ...]] | None,
    ) -> tuple[float, tuple[str, ...]] | None:
        inst = self.instance
        battery = self.battery
        unload = inst.unload_time
        theta_depot = inst.depot.unit_cost if self.bill else 0.0

        def recurse(
            i: int,
            pos: str,
            time: float,
            residual: float,
            cost: float,
            charges: int,
            seq: tuple[str, ...],
        ) -> None:
            nonlocal best
            if best is not None and cost > best[0] + _EPS:
                return  # costs only grow from here
            if i == len(perm):
                need = self.psi[(pos, DEPOT_ID)]
                if residual + _EPS < need:
                    return
                total = cost + (battery - (residual - need)) * theta_depot
                candidate = (total, seq)
                if best is None or (total, seq) < best:
                    best = candidate
                return
            d = self.deliveries[perm[i]]
            # serve directly
            leg = self.psi[(pos, d.id)]
            if residual + _EPS >= leg:
                arrival = time + self.gamma[(pos, d.id)]
                departure = max(arrival, d.window_start) + unload
                if departure <= d.window_end + _EPS:
                    recurse(
                        i + 1, d.id, departure, residual - leg, cost, charges, seq + (d.id,)
                    )
            # recharge first (never right after the depot or another charge)
            if charges < self.max_charges and pos != DEPOT_ID and pos not in inst.cps_by_id:
                for cp in self.cps:
                    hop = self.psi[(pos, cp.id)]
                    if residual + _EPS < hop:
                        continue
                    arrive_cp = time + self.gamma[(pos, cp.id)]
                    deficit = battery - (residual - hop)
                    depart_cp = arrive_cp + charge_minutes(deficit, self.ev, cp) + cp.avg_wait
                    leg2 = self.psi[(cp.id, d.id)]
                    if battery + _EPS < leg2:
                        continue
                    arrival = depart_cp + self.gamma[(cp.id, d.id)]
                    departure = max(arrival, d.window_start) + unload
                    if departure > d.window_end + _EPS:
                        continue
                    recurse(
                        i + 1,
                        d.id,
                        departure,
                        battery - leg2,
                        cost + deficit * cp.unit_cost,
                        charges + 1,
                        seq + (cp.id, d.id),
                    )

        recurse(0, DEPOT_ID, 0.0, battery, 0.0, 0, ())
        return best


def _sequence_to_stops(instance: Instance, ev: ElectricVehicle, seq: tuple[str, ...]) -> tuple[Stop, ...]:
    battery = ev.battery_capacity
    stops = [Stop("depot", DEPOT_ID, 0.0, 0.0, battery)]
    pos, time, residual = DEPOT_ID, 0.0, battery
    for node in seq:
        arrival = time + travel_time(instance, ev, pos, node)
        residual -= energy_required(instance, ev, pos, node)
        if node in instance.deliveries_by_id:
            d = instance.deliveries_by_id[node]
            departure = max(arrival, d.window_start) + instance.unload_time
            stops.append(Stop("delivery", node, arrival, departure, residual))
        else:
            cp = instance.cps_by_id[node]
            deficit = battery - residual
            departure = arrival + charge_minutes(deficit, ev, cp) + cp.avg_wait
            stops.append(
                Stop("charge", node, arrival, departure, battery, deficit * cp.unit_cost)
            )
            residual = battery
        time = departure
        pos = node
    arrival = time + travel_time(instance, ev, pos, DEPOT_ID)
    residual -= energy_required(instance, ev, pos, DEPOT_ID)
    stops.append(Stop("depot", DEPOT_ID, arrival, arrival, residual))
    return tuple(stops)


def _routes_to_plan(instance: Instance, sequences: dict[str, tuple[str, ...]]) -> FleetPlan:
    routes: dict[str, tuple[Stop, ...]] = {}
    schedule: dict[str, tuple[float, ...]] = {}
    served: set[str] = set()
    charge_cost = 0.0
    for ev in instance.evs:
        seq = sequences.get(ev.id, ())
        if not seq:
            routes[ev.id] = ()
            schedule[ev.id] = ()
            continue
        stops = _sequence_to_stops(instance, ev, seq)
        routes[ev.id] = stops
        schedule[ev.id] = tuple(s.departure for s in stops)
        served.update(s.node for s in stops if s.kind == "delivery")
        charge_cost += sum(s.charge_cost for s in stops)
    return FleetPlan(
        routes=routes,
        schedule=schedule,
        served=frozenset(served),
        total_charging_cost=charge_cost,
    )


def check_limits(instance: Instance, limits: EnumerationLimits) -> None:
    if len(instance.deliveries) > limits.max_deliveries:
        raise EnumerationLimitError(
            f"{len(instance.deliveries)} deliveries exceed the enumeration guard "
            f"({limits.max_deliveries}); refusing rather than truncating"
        )
    if len(instance.evs) > limits.max_evs:
        raise EnumerationLimitError(
            f"{len(instance.evs)} vehicles exceed the enumeration guard ({limits.max_evs})"
        )
    if len(instance.charging_points) > limits.max_cps:
        raise EnumerationLimitError(
            f"{len(instance.charging_points)} charging points exceed the enumeration "
            f"guard ({limits.max_cps})"
        )


def oracle_search(instance: Instance, limits: EnumerationLimits | None = None) -> OracleResult:
    """Exhaustive optimum as a plan; see module docstring for the space."""
    limits = limits or EnumerationLimits()
    check_limits(instance, limits)
    l_eff = limits.l_max if limits.l_max is not None else default_l_max(instance)
    a1, a2 = limits.alphas if limits.alphas is not None else default_alphas(instance, l_eff)
    max_charges = max(l_eff - 1, 0)

    per_ev = [
        _EvSearch(instance, ev, max_charges, limits.bill_depot_return).best_per_mask()
        for ev in instance.evs
    ]
    k = len(instance.deliveries)
    n_e = len(instance.evs)
    assignees: tuple[int | None, ...] = tuple(range(n_e)) + (None,)

    best_key: tuple[float, float, tuple] | None = None
    best_vector: tuple[int | None, ...] | None = None
    best_cost = 0.0
    best_served = 0
    max_feasible_served = 0
    for vector in product(assignees, repeat=k):
        masks = [0] * n_e
        for d_idx, assignee in enumerate(vector):
            if assignee is not None:
                masks[assignee] |= 1 << d_idx
        routes = []
        feasible = True
        cost = 0.0
        for e_idx in range(n_e):
            entry = per_ev[e_idx][masks[e_idx]]
            if entry is None:
                feasible = False
                break
            cost += entry[0]
            routes.append(entry[1])
        if not feasible:
            continue
        served = sum(1 for a in vector if a is not None)
        max_feasible_served = max(max_feasible_served, served)
        objective = a1 * served - a2 * cost
        key = (-objective, cost, tuple(routes))
        if best_key is None or key < best_key:
            best_key = key
            best_vector = vector
            best_cost = cost
            best_served = served

    assert best_key is not None and best_vector is not None  # empty set is always feasible
    sequences = {}
    for e_idx, ev in enumerate(instance.evs):
        mask = 0
        for d_idx, assignee in enumerate(best_vector):
            if assignee == e_idx:
                mask |= 1 << d_idx
        entry = per_ev[e_idx][mask]
        assert entry is not None
        sequences[ev.id] = entry[1]
    plan = _routes_to_plan(instance, sequences)
    return OracleResult(
        plan=plan,
        objective=a1 * best_served - a2 * best_cost,
        served=best_served,
        total_cost=best_cost,
        max_feasible_served=max_feasible_served,
    )


def enumerate_optimal(
    instance: Instance, limits: EnumerationLimits | None = None
) -> tuple[Assignment, CheckReport]:
    """Exhaustive optimum as a (variable assignment, check report) pair.

    The report comes from evaluating the translated optimum against the full
    constraint catalog, so ``report.feasible`` doubles as an internal
    consistency check between the search and the model.
    """
    limits = limits or EnumerationLimits()
    result = oracle_search(instance, limits)
    l_eff = limits.l_max if limits.l_max is not None else default_l_max(instance)
    alphas = limits.alphas if limits.alphas is not None else default_alphas(instance, l_eff)
    model = build_model(
        instance, l_eff, alphas, bill_depot_return=limits.bill_depot_return
    )
    assignment = plan_to_assignment(instance, result.plan, l_eff)
    report = check_solution(model, assignment)
    return assignment, report
