"""The exact optimization model: variables, constraint catalog, objective, checker.

Decision variables (names as exported):

* ``chi_{x}_{y}_{j}_{l}``  binary: vehicle j drives arc x->y inside subtrip l.
  Arcs exist from the depot / charging points / other deliveries into a
  delivery, and from a delivery into a charging point or back to the depot.
* ``z_{j}_{l}``            binary: subtrip l of vehicle j is in use.
* ``u_{x}_{j}_{l}``        visit order of delivery x within a subtrip, in [2, n]
  with n = number of deliveries + 1 (so one subtrip can hold them all).
* ``beta_{j}_{l}``         energy spent in subtrip l of vehicle j.
* ``tarr_{y}`` / ``tdep_{y}``             delivery arrival / departure times.
* ``that_arr_{y}_{j}_{l}`` / ``that_dep_{y}_{j}_{l}``  charging-point times
  (plus ``that_dep_d0_{j}_1`` for the initial depot departure).
* ``omega_...`` / ``omhat_...``  products departure-time x arc indicator,
  linearized with big-M rows.
* ``lam_...``              product subtrip-energy x arc indicator (cost term).

Constraint families carry tags ``C1`` .. ``C21`` plus ``EQ3`` (the cost
linearization); see the README for the catalog. The objective maximizes
alpha1 * (arcs into deliveries) - alpha2 * sum(lam * unit cost at the subtrip's
terminal charging location).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from ..errors import ConfigError, MissingVariableError
from ..instance import (
    DEPOT_ID,
    ElectricVehicle,
    Instance,
    effective_charge_rate,
    energy_required,
    travel_time,
)


def default_l_max(instance: Instance) -> int:
    """Default subtrip budget: every subtrip serves at least one delivery, so
    more than min(|D|, 1 + ceil(|D| / |E|)) subtrips is vacuous."""
    n_d = len(instance.deliveries)
    n_e = len(instance.evs)
    return min(n_d, 1 + math.ceil(n_d / n_e))


def default_alphas(instance: Instance, l_max: int) -> tuple[float, float]:
    """Objective weights: serving one more delivery always dominates any
    realistic charging-cost difference."""
    theta_max = instance.depot.unit_cost
    if instance.charging_points:
        theta_max = max(theta_max, max(c.unit_cost for c in instance.charging_points))
    return 1.0, 1.0 / (instance.battery_capacity * theta_max * l_max)


# ---------------------------------------------------------------------------
# Variable naming


def vn_chi(x: str, y: str, j: str, l: int) -> str:
    return f"chi_{x}_{y}_{j}_{l}"


def vn_z(j: str, l: int) -> str:
    return f"z_{j}_{l}"


def vn_u(x: str, j: str, l: int) -> str:
    return f"u_{x}_{j}_{l}"


def vn_beta(j: str, l: int) -> str:
    return f"beta_{j}_{l}"


def vn_tarr(y: str) -> str:
    return f"tarr_{y}"


def vn_tdep(y: str) -> str:
    return f"tdep_{y}"


def vn_that_arr(y: str, j: str, l: int) -> str:
    return f"that_arr_{y}_{j}_{l}"


def vn_that_dep(y: str, j: str, l: int) -> str:
    return f"that_dep_{y}_{j}_{l}"


def vn_omega(x: str, y: str, j: str, l: int) -> str:
    return f"omega_{x}_{y}_{j}_{l}"


def vn_omhat(x: str, y: str, j: str, l: int) -> str:
    return f"omhat_{x}_{y}_{j}_{l}"


def vn_lam(x: str, y: str, j: str, l: int) -> str:
    return f"lam_{x}_{y}_{j}_{l}"


# ---------------------------------------------------------------------------
# Index sets shared by the builder and the plan translator


@dataclass(frozen=True)
class ModelIndex:
    instance: Instance
    l_max: int

    @cached_property
    def D(self) -> tuple[str, ...]:
        return tuple(d.id for d in self.instance.deliveries)

    @cached_property
    def C(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.instance.charging_points)

    @cached_property
    def E(self) -> tuple[str, ...]:
        return tuple(e.id for e in self.instance.evs)

    @property
    def L(self) -> range:
        return range(1, self.l_max + 1)

    @property
    def n(self) -> int:
        """Order-variable upper bound; one more than the delivery count so a
        single subtrip can chain every delivery."""
        return len(self.D) + 1

    @cached_property
    def charging_nodes(self) -> tuple[str, ...]:
        return (DEPOT_ID,) + self.C

    @cached_property
    def arcs_into_delivery(self) -> tuple[tuple[str, str], ...]:
        out = []
        for y in self.D:
            for x in self.charging_nodes + tuple(d for d in self.D if d != y):
                out.append((x, y))
        return tuple(out)

    @cached_property
    def arcs_to_charging(self) -> tuple[tuple[str, str], ...]:
        out = []
        for x in self.D:
            for y in (DEPOT_ID,) + self.C:
                out.append((x, y))
        return tuple(out)

    @cached_property
    def arcs(self) -> tuple[tuple[str, str], ...]:
        return self.arcs_into_delivery + self.arcs_to_charging

    @cached_property
    def omega_pairs(self) -> tuple[tuple[str, str], ...]:
        """Pairs whose departure-time product is linearized: delivery x to a
        next delivery or charging point y (the depot return needs no time)."""
        out = []
        for x in self.D:
            for y in tuple(d for d in self.D if d != x) + self.C:
                out.append((x, y))
        return tuple(out)

    @cached_property
    def omhat_pairs(self) -> tuple[tuple[str, str], ...]:
        out = []
        for x in self.C:
            for y in self.D:
                out.append((x, y))
        return tuple(out)

    @cached_property
    def lam_pairs(self) -> tuple[tuple[str, str], ...]:
        return self.arcs_to_charging

    def ev(self, j: str) -> ElectricVehicle:
        return self.instance.evs_by_id[j]

    def gamma(self, j: str, x: str, y: str) -> float:
        return travel_time(self.instance, self.ev(j), x, y)

    def psi(self, j: str, x: str, y: str) -> float:
        return energy_required(self.instance, self.ev(j), x, y)

    def charge_slope(self, j: str, y: str) -> float:
        """Minutes of charging per kWh refilled at charging point y."""
        cp = self.instance.cps_by_id[y]
        return 60.0 / effective_charge_rate(self.ev(j), cp)


# ---------------------------------------------------------------------------
# Model containers


@dataclass(frozen=True)
class VarDef:
    name: str
    kind: str  # "binary" | "continuous"
    lb: float
    ub: float


@dataclass(frozen=True)
class Row:
    tag: str
    coeffs: Mapping[str, float]
    sense: str  # "<=", ">=", "="
    rhs: float


@dataclass(frozen=True)
class Assignment:
    """A full valuation of the model's decision variables."""

    values: Mapping[str, float]

    def value(self, name: str) -> float:
        try:
            return self.values[name]
        except KeyError:
            raise MissingVariableError(name) from None


@dataclass(frozen=True)
class Violation:
    tag: str
    lhs: float
    sense: str
    rhs: float
    slack: float  # negative when violated


@dataclass(frozen=True)
class CheckReport:
    feasible: bool
    violations: tuple[Violation, ...]
    objective_value: float
    deliveries_served: int
    charging_cost: float


@dataclass(frozen=True)
class MilpModel:
    instance: Instance
    l_max: int
    n: int
    alphas: tuple[float, float]
    big_m_time: float
    big_m_count: float
    bill_depot_return: bool
    variables: tuple[VarDef, ...]
    constraints: tuple[Row, ...]
    objective: Mapping[str, float]  # maximize
    served_vars: tuple[str, ...]  # arcs into deliveries
    cost_terms: tuple[tuple[str, float], ...]  # (lam name, effective unit cost)

    @cached_property
    def variables_by_name(self) -> dict[str, VarDef]:
        return {v.name: v for v in self.variables}

    def constraint_tags(self) -> tuple[str, ...]:
        return tuple(r.tag for r in self.constraints)


def tag_family(tag: str) -> str:
    """Leading constraint family of a tag, e.g. ``C16b[e1,2,d1,c1]`` -> ``C16``."""
    head = tag.split("[", 1)[0]
    for marker in ("EQ3", "BIN"):
        if head.startswith(marker):
            return marker
    out = head[:1]
    for ch in head[1:]:
        if ch.isdigit():
            out += ch
        else:
            break
    return out


# ---------------------------------------------------------------------------
# Builder


def build_model(
    instance: Instance,
    l_max: int | None = None,
    alphas: tuple[float, float] | None = None,
    bill_depot_return: bool = True,
) -> MilpModel:
    """Materialize the full linear model for an instance.

    ``bill_depot_return`` keeps (default) or zeroes the cost weight on the
    final return-to-depot arc; with billing on, every subtrip's energy is
    priced at the unit cost of the charging location where it ends,
    including the last subtrip at the depot's rate.
    """
    if l_max is None:
        l_max = default_l_max(instance)
    if l_max < 1:
        raise ConfigError("l_max must be >= 1")
    if alphas is None:
        alphas = default_alphas(instance, l_max)
    a1, a2 = alphas
    if not (math.isfinite(a1) and math.isfinite(a2)):
        raise ConfigError("alphas must be finite")

    idx = ModelIndex(instance, l_max)
    battery = instance.battery_capacity
    m_time = instance.horizon
    m_count = float(len(idx.D))
    n = idx.n

    variables: list[VarDef] = []

    def add_var(name: str, kind: str, lb: float, ub: float) -> None:
        variables.append(VarDef(name, kind, lb, ub))

    for j in idx.E:
        for l in idx.L:
            for (x, y) in idx.arcs:
                add_var(vn_chi(x, y, j, l), "binary", 0.0, 1.0)
    for j in idx.E:
        for l in idx.L:
            add_var(vn_z(j, l), "binary", 0.0, 1.0)
    for j in idx.E:
        for l in idx.L:
            for x in idx.D:
                add_var(vn_u(x, j, l), "continuous", 2.0, float(n))
    for j in idx.E:
        for l in idx.L:
            add_var(vn_beta(j, l), "continuous", 0.0, battery)
    for y in idx.D:
        add_var(vn_tarr(y), "continuous", 0.0, math.inf)
    for y in idx.D:
        add_var(vn_tdep(y), "continuous", 0.0, math.inf)
    for y in idx.C:
        for j in idx.E:
            for l in idx.L:
                add_var(vn_that_arr(y, j, l), "continuous", 0.0, math.inf)
    for y in idx.C:
        for j in idx.E:
            for l in idx.L:
                add_var(vn_that_dep(y, j, l), "continuous", 0.0, math.inf)
    for j in idx.E:
        add_var(vn_that_dep(DEPOT_ID, j, 1), "continuous", 0.0, math.inf)
    for j in idx.E:
        for l in idx.L:
            for (x, y) in idx.omega_pairs:
                add_var(vn_omega(x, y, j, l), "continuous", 0.0, math.inf)
    for j in idx.E:
        for l in idx.L:
            for (x, y) in idx.omhat_pairs:
                add_var(vn_omhat(x, y, j, l), "continuous", 0.0, math.inf)
    for j in idx.E:
        for l in idx.L:
            for (x, y) in idx.lam_pairs:
                add_var(vn_lam(x, y, j, l), "continuous", 0.0, math.inf)

    known = {v.name for v in variables}
    rows: list[Row] = []

    def add_row(tag: str, coeffs: dict[str, float], sense: str, rhs: float) -> None:
        # Zero coefficients are structurally absent; dropping them keeps the
        # in-memory matrix identical to what a parser reads back from a file.
        coeffs = {name: coef for name, coef in coeffs.items() if coef != 0.0}
        assert coeffs, f"empty constraint {tag}"
        for name in coeffs:
            assert name in known, f"unknown variable {name} in {tag}"
        rows.append(Row(tag=tag, coeffs=coeffs, sense=sense, rhs=rhs))

    # Depot departures: at most once in the first subtrip.
    for j in idx.E:
        add_row(
            f"C1[{j}]",
            {vn_chi(DEPOT_ID, y, j, 1): 1.0 for y in idx.D},
            "<=",
            1.0,
        )

    # One depot departure overall, matched by exactly one return.
    for j in idx.E:
        coeffs: dict[str, float] = {}
        for l in idx.L:
            for y in idx.D:
                coeffs[vn_chi(DEPOT_ID, y, j, l)] = coeffs.get(vn_chi(DEPOT_ID, y, j, l), 0.0) + 1.0
            for x in idx.D:
                coeffs[vn_chi(x, DEPOT_ID, j, l)] = coeffs.get(vn_chi(x, DEPOT_ID, j, l), 0.0) - 1.0
        add_row(f"C2a[{j}]", coeffs, "=", 0.0)
        add_row(
            f"C2b[{j}]",
            {vn_chi(DEPOT_ID, y, j, l): 1.0 for l in idx.L for y in idx.D},
            "<=",
            1.0,
        )

    # Charging-point flow ties the end of one subtrip to the start of the next.
    for j in idx.E:
        for l in idx.L[:-1]:
            for y in idx.C:
                coeffs = {vn_chi(x, y, j, l): 1.0 for x in idx.D}
                for x in idx.D:
                    coeffs[vn_chi(y, x, j, l + 1)] = -1.0
                add_row(f"C3[{j},{l},{y}]", coeffs, "=", 0.0)

    # Flow conservation at every delivery within a subtrip.
    for j in idx.E:
        for l in idx.L:
            for x in idx.D:
                coeffs = {}
                for y in idx.charging_nodes:
                    coeffs[vn_chi(y, x, j, l)] = 1.0
                for y in idx.D:
                    if y != x:
                        coeffs[vn_chi(y, x, j, l)] = 1.0
                for y in idx.D:
                    if y != x:
                        coeffs[vn_chi(x, y, j, l)] = -1.0
                for y in (DEPOT_ID,) + idx.C:
                    coeffs[vn_chi(x, y, j, l)] = -1.0
                add_row(f"C4[{j},{l},{x}]", coeffs, "=", 0.0)

    # Each delivery is entered at most once, fleet-wide.
    for y in idx.D:
        coeffs = {}
        for j in idx.E:
            for l in idx.L:
                for x in idx.charging_nodes + tuple(d for d in idx.D if d != y):
                    coeffs[vn_chi(x, y, j, l)] = 1.0
        add_row(f"C5[{y}]", coeffs, "<=", 1.0)

    # Subtrip validity: start arcs only when the subtrip is switched on ...
    for j in idx.E:
        for l in idx.L:
            starts = {vn_chi(x, y, j, l): 1.0 for x in idx.charging_nodes for y in idx.D}
            coeffs = dict(starts)
            coeffs[vn_z(j, l)] = -m_count
            add_row(f"C6[{j},{l}]", coeffs, "<=", 0.0)
            coeffs = dict(starts)
            coeffs[vn_z(j, l)] = -m_count
            add_row(f"C7[{j},{l}]", coeffs, ">=", -m_count)
            # ... and an active subtrip starts and ends at a charging location
            # exactly once.
            coeffs = dict(starts)
            coeffs[vn_z(j, l)] = -1.0
            add_row(f"C8[{j},{l}]", coeffs, "=", 0.0)
            coeffs = {vn_chi(x, y, j, l): 1.0 for x in idx.D for y in (DEPOT_ID,) + idx.C}
            coeffs[vn_z(j, l)] = -1.0
            add_row(f"C9[{j},{l}]", coeffs, "=", 0.0)

    # Subtrip chaining at charging points (same balance as C3, kept under its
    # own tag for traceability).
    for j in idx.E:
        for l in idx.L[:-1]:
            for z_node in idx.C:
                coeffs = {vn_chi(x, z_node, j, l): 1.0 for x in idx.D}
                for y in idx.D:
                    coeffs[vn_chi(z_node, y, j, l + 1)] = -1.0
                add_row(f"C10[{j},{l},{z_node}]", coeffs, "=", 0.0)

    # Order variables rule out subtours among deliveries.
    for j in idx.E:
        for l in idx.L:
            for x in idx.D:
                for y in idx.D:
                    if x == y:
                        continue
                    add_row(
                        f"C11[{j},{l},{x},{y}]",
                        {
                            vn_u(x, j, l): 1.0,
                            vn_u(y, j, l): -1.0,
                            vn_chi(x, y, j, l): float(n),
                        },
                        "<=",
                        float(n - 1),
                    )
    for j in idx.E:
        for l in idx.L:
            for x in idx.D:
                add_row(f"C12lb[{j},{l},{x}]", {vn_u(x, j, l): 1.0}, ">=", 2.0)
                add_row(f"C12ub[{j},{l},{x}]", {vn_u(x, j, l): 1.0}, "<=", float(n))

    # Subtrip energy bookkeeping and the battery cap.
    for j in idx.E:
        for l in idx.L:
            coeffs = {vn_beta(j, l): 1.0}
            for (x, y) in idx.arcs:
                coeffs[vn_chi(x, y, j, l)] = -idx.psi(j, x, y)
            add_row(f"C13[{j},{l}]", coeffs, "=", 0.0)
            add_row(f"C14[{j},{l}]", {vn_beta(j, l): 1.0}, "<=", battery)

    # Times: initial depot departure is non-negative.
    for j in idx.E:
        add_row(f"C15[{j}]", {vn_that_dep(DEPOT_ID, j, 1): 1.0}, ">=", 0.0)

    # Departure-time products for delivery departures.
    for j in idx.E:
        for l in idx.L:
            for (x, y) in idx.omega_pairs:
                om = vn_omega(x, y, j, l)
                add_row(f"C16a[{j},{l},{x},{y}]", {om: 1.0, vn_tdep(x): -1.0}, "<=", 0.0)
                add_row(
                    f"C16b[{j},{l},{x},{y}]",
                    {om: 1.0, vn_chi(x, y, j, l): -m_time},
                    "<=",
                    0.0,
                )
                add_row(
                    f"C16c[{j},{l},{x},{y}]",
                    {om: 1.0, vn_tdep(x): -1.0, vn_chi(x, y, j, l): -m_time},
                    ">=",
                    -m_time,
                )

    # Departure-time products for charging-point departures.
    for j in idx.E:
        for l in idx.L:
            for (x, y) in idx.omhat_pairs:
                om = vn_omhat(x, y, j, l)
                add_row(
                    f"C17a[{j},{l},{x},{y}]",
                    {om: 1.0, vn_that_dep(x, j, l): -1.0},
                    "<=",
                    0.0,
                )
                add_row(
                    f"C17b[{j},{l},{x},{y}]",
                    {om: 1.0, vn_chi(x, y, j, l): -m_time},
                    "<=",
                    0.0,
                )
                add_row(
                    f"C17c[{j},{l},{x},{y}]",
                    {om: 1.0, vn_that_dep(x, j, l): -1.0, vn_chi(x, y, j, l): -m_time},
                    ">=",
                    -m_time,
                )

    # Arrival at a delivery happens after the predecessor departs plus travel.
    for j in idx.E:
        for l in idx.L:
            for y in idx.D:
                coeffs = {vn_tarr(y): 1.0}
                for x in idx.D:
                    if x == y:
                        continue
                    coeffs[vn_omega(x, y, j, l)] = -1.0
                    coeffs[vn_chi(x, y, j, l)] = -idx.gamma(j, x, y)
                for x in idx.C:
                    coeffs[vn_omhat(x, y, j, l)] = -1.0
                    coeffs[vn_chi(x, y, j, l)] = -idx.gamma(j, x, y)
                add_row(f"C18[{j},{l},{y}]", coeffs, ">=", 0.0)

    # Arrival at a charging point comes from a delivery.
    for j in idx.E:
        for l in idx.L:
            for y in idx.C:
                coeffs = {vn_that_arr(y, j, l): 1.0}
                for x in idx.D:
                    coeffs[vn_omega(x, y, j, l)] = -1.0
                    coeffs[vn_chi(x, y, j, l)] = -idx.gamma(j, x, y)
                add_row(f"C19[{j},{l},{y}]", coeffs, ">=", 0.0)

    # Window adherence at every delivery.
    for y_id in idx.D:
        d = instance.deliveries_by_id[y_id]
        add_row(f"C20a[{y_id}]", {vn_tdep(y_id): 1.0, vn_tarr(y_id): -1.0}, ">=", 0.0)
        add_row(
            f"C20b[{y_id}]",
            {vn_tdep(y_id): 1.0},
            ">=",
            d.window_start + instance.unload_time,
        )
        add_row(f"C20c[{y_id}]", {vn_tdep(y_id): 1.0}, "<=", d.window_end)

    # Charging dwell: departure from a charging point waits for the refill of
    # the energy spent in the previous subtrip, plus the queue.
    for j in idx.E:
        for l in idx.L:
            if l == 1:
                continue
            for y in idx.C:
                cp = instance.cps_by_id[y]
                add_row(
                    f"C21[{j},{l},{y}]",
                    {
                        vn_that_dep(y, j, l): 1.0,
                        vn_that_arr(y, j, l - 1): -1.0,
                        vn_beta(j, l - 1): -idx.charge_slope(j, y),
                    },
                    ">=",
                    cp.avg_wait,
                )

    # Cost linearization: lam equals beta on taken arcs, zero otherwise.
    for j in idx.E:
        for l in idx.L:
            for (x, y) in idx.lam_pairs:
                lam = vn_lam(x, y, j, l)
                add_row(f"EQ3a[{j},{l},{x},{y}]", {lam: 1.0, vn_beta(j, l): -1.0}, "<=", 0.0)
                add_row(
                    f"EQ3b[{j},{l},{x},{y}]",
                    {lam: 1.0, vn_chi(x, y, j, l): -battery},
                    "<=",
                    0.0,
                )
                add_row(
                    f"EQ3c[{j},{l},{x},{y}]",
                    {lam: 1.0, vn_beta(j, l): -1.0, vn_chi(x, y, j, l): -battery},
                    ">=",
                    -battery,
                )

    served_vars = tuple(
        vn_chi(x, y, j, l) for j in idx.E for l in idx.L for (x, y) in idx.arcs_into_delivery
    )
    cost_terms = []
    for j in idx.E:
        for l in idx.L:
            for (x, y) in idx.lam_pairs:
                if y == DEPOT_ID and not bill_depot_return:
                    theta = 0.0
                else:
                    theta = instance.unit_cost_of(y)
                cost_terms.append((vn_lam(x, y, j, l), theta))

    objective: dict[str, float] = {}
    for name in served_vars:
        objective[name] = objective.get(name, 0.0) + a1
    for name, theta in cost_terms:
        if theta != 0.0:
            objective[name] = objective.get(name, 0.0) - a2 * theta

    return MilpModel(
        instance=instance,
        l_max=l_max,
        n=n,
        alphas=(a1, a2),
        big_m_time=m_time,
        big_m_count=m_count,
        bill_depot_return=bill_depot_return,
        variables=tuple(variables),
        constraints=tuple(rows),
        objective=objective,
        served_vars=served_vars,
        cost_terms=tuple(cost_terms),
    )


# ---------------------------------------------------------------------------
# Checker


def check_solution(model: MilpModel, assignment: Assignment, tol: float = 1e-6) -> CheckReport:
    """Evaluate every constraint at the assignment and report violations.

    Raises MissingVariableError (naming the variable) when the assignment
    does not cover the model. Binary variables off {0, 1} by more than the
    tolerance are reported under a ``BIN[...]`` pseudo-tag.
    """
    values = assignment.values
    for v in model.variables:
        if v.name not in values:
            raise MissingVariableError(v.name)

    violations: list[Violation] = []
    for v in model.variables:
        if v.kind != "binary":
            continue
        val = values[v.name]
        dist = min(abs(val), abs(val - 1.0))
        if dist > tol:
            violations.append(
                Violation(tag=f"BIN[{v.name}]", lhs=val, sense="=", rhs=round(val), slack=-dist)
            )

    for row in model.constraints:
        lhs = 0.0
        for name, coef in row.coeffs.items():
            lhs += coef * values[name]
        if row.sense == "<=":
            slack = row.rhs - lhs
        elif row.sense == ">=":
            slack = lhs - row.rhs
        else:
            slack = -abs(lhs - row.rhs)
        if slack < -tol:
            violations.append(
                Violation(tag=row.tag, lhs=lhs, sense=row.sense, rhs=row.rhs, slack=slack)
            )

    objective = sum(coef * values[name] for name, coef in model.objective.items())
    served = sum(values[name] for name in model.served_vars)
    charging_cost = sum(values[name] * theta for name, theta in model.cost_terms)
    return CheckReport(
        feasible=not violations,
        violations=tuple(violations),
        objective_value=objective,
        deliveries_served=int(round(served)),
        charging_cost=charging_cost,
    )
