"""Bridge from fleet plans to full variable assignments.

A plan's routes are segmented into subtrips at charging stops; arc
indicators, subtrip energies, order variables, time variables and the
linearization products are all set to the values the plan realizes.
Variables untouched by the plan get feasible defaults (order variables sit
at their lower bound, unvisited charging-point departures satisfy the dwell
constraint with equality).
"""

from __future__ import annotations

from ..errors import PlanStructureError
from ..heuristics import FleetPlan
from ..instance import DEPOT_ID, Instance
from .model import (
    Assignment,
    ModelIndex,
    vn_beta,
    vn_chi,
    vn_lam,
    vn_omega,
    vn_omhat,
    vn_tarr,
    vn_tdep,
    vn_that_arr,
    vn_that_dep,
    vn_u,
    vn_z,
)


def plan_to_assignment(instance: Instance, plan: FleetPlan, l_max: int) -> Assignment:
    """Translate a plan into a valuation of every model variable.

    Raises PlanStructureError when the plan cannot be expressed with
    ``l_max`` subtrips, revisits a delivery, or contains a charging stop in a
    position the model has no arc for (adjacent to the depot endpoints, at
    the depot itself, or twice in a row).
    """
    idx = ModelIndex(instance, l_max)
    values: dict[str, float] = {}

    for j in idx.E:
        for l in idx.L:
            for (x, y) in idx.arcs:
                values[vn_chi(x, y, j, l)] = 0.0
            values[vn_z(j, l)] = 0.0
            values[vn_beta(j, l)] = 0.0
            for x in idx.D:
                values[vn_u(x, j, l)] = 2.0
            for (x, y) in idx.omega_pairs:
                values[vn_omega(x, y, j, l)] = 0.0
            for (x, y) in idx.omhat_pairs:
                values[vn_omhat(x, y, j, l)] = 0.0
            for (x, y) in idx.lam_pairs:
                values[vn_lam(x, y, j, l)] = 0.0
    for y_id in idx.D:
        d = instance.deliveries_by_id[y_id]
        values[vn_tarr(y_id)] = 0.0
        values[vn_tdep(y_id)] = d.window_start + instance.unload_time
    for y in idx.C:
        for j in idx.E:
            for l in idx.L:
                values[vn_that_arr(y, j, l)] = 0.0
                # departures get dwell-consistent defaults in the second pass
    for j in idx.E:
        values[vn_that_dep(DEPOT_ID, j, 1)] = 0.0

    seen_deliveries: set[str] = set()
    visited_boundary_dep: set[str] = set()

    for j in idx.E:
        route = tuple(plan.routes.get(j, ()))
        if len(route) <= 1:
            continue
        if len(route) == 2 and route[0].kind == "depot" and route[1].kind == "depot":
            continue  # a vehicle that idles at the depot uses no arcs
        if route[0].kind != "depot" or route[-1].kind != "depot":
            raise PlanStructureError(f"{j}: route must start and end at the depot")
        values[vn_that_dep(DEPOT_ID, j, 1)] = route[0].departure

        subtrip = 1
        pos = DEPOT_ID
        prev_kind = "depot"
        order_in_subtrip = 2
        for i, stop in enumerate(route[1:], start=1):
            last = i == len(route) - 1
            if stop.kind == "delivery":
                if stop.node in seen_deliveries:
                    raise PlanStructureError(f"delivery {stop.node} visited twice")
                seen_deliveries.add(stop.node)
                if subtrip > l_max:
                    raise PlanStructureError(
                        f"{j}: plan needs more than l_max={l_max} subtrips"
                    )
                values[vn_chi(pos, stop.node, j, subtrip)] = 1.0
                values[vn_z(j, subtrip)] = 1.0
                values[vn_u(stop.node, j, subtrip)] = float(order_in_subtrip)
                order_in_subtrip += 1
                values[vn_tarr(stop.node)] = stop.arrival
                values[vn_tdep(stop.node)] = stop.departure
            elif stop.kind == "charge":
                if stop.node == DEPOT_ID:
                    raise PlanStructureError(
                        f"{j}: the model has no arc for a mid-route depot recharge"
                    )
                if prev_kind != "delivery":
                    raise PlanStructureError(
                        f"{j}: charging stop at {stop.node} must follow a delivery"
                    )
                if subtrip + 1 > l_max:
                    raise PlanStructureError(
                        f"{j}: plan needs more than l_max={l_max} subtrips"
                    )
                values[vn_chi(pos, stop.node, j, subtrip)] = 1.0
                values[vn_that_arr(stop.node, j, subtrip)] = stop.arrival
                subtrip += 1
                values[vn_that_dep(stop.node, j, subtrip)] = stop.departure
                visited_boundary_dep.add(vn_that_dep(stop.node, j, subtrip))
                order_in_subtrip = 2
            elif stop.kind == "depot":
                if not last:
                    raise PlanStructureError(f"{j}: depot revisited mid-route")
                if prev_kind != "delivery":
                    raise PlanStructureError(
                        f"{j}: the return to the depot must come from a delivery"
                    )
                values[vn_chi(pos, DEPOT_ID, j, subtrip)] = 1.0
            else:
                raise PlanStructureError(f"{j}: unknown stop kind {stop.kind!r}")
            pos = stop.node
            prev_kind = stop.kind

        # subtrip energies realized by the arcs just set
        for l in idx.L:
            total = 0.0
            for (x, y) in idx.arcs:
                if values[vn_chi(x, y, j, l)] == 1.0:
                    total += idx.psi(j, x, y)
            values[vn_beta(j, l)] = total

    # dwell-consistent defaults for never-visited charging-point departures
    for j in idx.E:
        for l in idx.L:
            for y in idx.C:
                name = vn_that_dep(y, j, l)
                if name in visited_boundary_dep:
                    continue
                if l == 1:
                    values[name] = 0.0
                else:
                    values[name] = (
                        values[vn_that_arr(y, j, l - 1)]
                        + idx.charge_slope(j, y) * values[vn_beta(j, l - 1)]
                        + instance.cps_by_id[y].avg_wait
                    )

    # linearization products take their defining values on used arcs
    for j in idx.E:
        for l in idx.L:
            for (x, y) in idx.omega_pairs:
                if values[vn_chi(x, y, j, l)] == 1.0:
                    values[vn_omega(x, y, j, l)] = values[vn_tdep(x)]
            for (x, y) in idx.omhat_pairs:
                if values[vn_chi(x, y, j, l)] == 1.0:
                    values[vn_omhat(x, y, j, l)] = values[vn_that_dep(x, j, l)]
            for (x, y) in idx.lam_pairs:
                if values[vn_chi(x, y, j, l)] == 1.0:
                    values[vn_lam(x, y, j, l)] = values[vn_beta(j, l)]

    return Assignment(values=values)
