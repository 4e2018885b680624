import pytest

from edrp import FleetPlan, Stop, build_model, csa_plan, generate_synthetic, simulate_plan
from edrp.errors import MissingVariableError, PlanStructureError
from edrp.heuristics import report_objective
from edrp.milp import (
    Assignment,
    check_solution,
    default_alphas,
    default_l_max,
    enumerate_optimal,
    plan_to_assignment,
    tag_family,
)
from helpers import cp, delivery, ev, make_instance


def _plan_of(routes):
    return FleetPlan(
        routes=routes,
        schedule={k: tuple(s.departure for s in r) for k, r in routes.items()},
        served=frozenset(
            s.node for r in routes.values() for s in r if s.kind == "delivery"
        ),
        total_charging_cost=sum(
            s.charge_cost for r in routes.values() for s in r
        ),
    )


def test_oracle_assignment_is_feasible():
    inst = generate_synthetic(9, 3, 2, 1)
    assignment, report = enumerate_optimal(inst)
    assert report.feasible, [v.tag for v in report.violations[:5]]
    assert report.deliveries_served >= 1


def test_single_chi_flip_trips_c5():
    inst = generate_synthetic(9, 3, 2, 1)
    lmax = default_l_max(inst)
    model = build_model(inst, lmax)
    plan = csa_plan(inst)
    assignment = plan_to_assignment(inst, plan, lmax)
    served = sorted(plan.served)[0]
    # add a second incoming arc to an already-served delivery
    values = dict(assignment.values)
    other = next(
        name
        for name in values
        if name.startswith("chi_d0_") and name.split("_")[2] == served and values[name] == 0.0
    )
    values[other] = 1.0
    report = check_solution(model, Assignment(values=values))
    assert not report.feasible
    c5 = [v for v in report.violations if tag_family(v.tag) == "C5"]
    assert any(served in v.tag for v in c5)


def test_checker_names_missing_variable():
    inst = generate_synthetic(9, 2, 1, 1)
    model = build_model(inst, 2)
    values = {v.name: 0.0 for v in model.variables}
    missing = model.variables[5].name
    del values[missing]
    with pytest.raises(MissingVariableError) as err:
        check_solution(model, Assignment(values=values))
    assert missing in str(err.value)


def test_checker_reports_fractional_binaries():
    inst = generate_synthetic(9, 2, 1, 1)
    model = build_model(inst, 2)
    values = {v.name: 0.0 for v in model.variables}
    for v in model.variables:
        if v.kind == "continuous":
            values[v.name] = max(v.lb, 0.0)
    values["z_e1_1"] = 0.4
    report = check_solution(model, Assignment(values=values))
    assert any(v.tag == "BIN[z_e1_1]" for v in report.violations)


def test_empty_plan_translates_to_zeros():
    inst = generate_synthetic(9, 2, 1, 1)
    plan = _plan_of({"e1": ()})
    assignment = plan_to_assignment(inst, plan, 2)
    assert all(
        assignment.values[name] == 0.0
        for name in assignment.values
        if name.startswith(("chi_", "z_", "lam_"))
    )
    model = build_model(inst, 2)
    report = check_solution(model, assignment)
    assert report.objective_value == 0.0
    assert report.deliveries_served == 0


def test_one_arc_route_translation():
    inst = make_instance(
        deliveries=[delivery("d1", 3.0, 4.0, 0.0, 200.0)],
        cps=[cp("c1", 1.0, 1.0)],
        evs=[ev("e1", speed=0.5, mileage=2.0)],
    )
    plan = csa_plan(inst)
    assignment = plan_to_assignment(inst, plan, 1)
    assert assignment.values["chi_d0_d1_e1_1"] == 1.0
    assert assignment.values["chi_d1_d0_e1_1"] == 1.0
    assert assignment.values["z_e1_1"] == 1.0
    assert assignment.values["beta_e1_1"] == pytest.approx(5.0)  # 10 miles / 2 mi/kWh
    assert assignment.values["u_d1_e1_1"] == 2.0
    # arrival 10 min, departure 15; the energy-cost product equals beta
    assert assignment.values["tarr_d1"] == pytest.approx(10.0)
    assert assignment.values["tdep_d1"] == pytest.approx(15.0)
    assert assignment.values["lam_d1_d0_e1_1"] == pytest.approx(5.0)
    report = check_solution(build_model(inst, 1), assignment)
    assert report.feasible


def test_simulator_accepted_plans_check_out():
    for seed in (1, 5, 11, 23):
        inst = generate_synthetic(seed, 5, 2, 1)
        plan = csa_plan(inst)
        sim = simulate_plan(inst, plan)
        assert sim.feasible
        lmax = default_l_max(inst)
        model = build_model(inst, lmax)
        report = check_solution(model, plan_to_assignment(inst, plan, lmax))
        assert report.feasible, (seed, [v.tag for v in report.violations[:5]])
        assert report.objective_value == pytest.approx(
            report_objective(sim, model.alphas), abs=1e-6
        )
        assert report.deliveries_served == sim.served_count
        assert report.charging_cost == pytest.approx(sim.total_cost, abs=1e-6)


def test_translate_rejects_double_visit():
    inst = generate_synthetic(9, 2, 1, 2)
    d1 = inst.deliveries[0].id
    route = (
        Stop("depot", "d0", 0.0, 0.0, 100.0),
        Stop("delivery", d1, 5.0, 10.0, 90.0),
        Stop("depot", "d0", 15.0, 15.0, 80.0),
    )
    plan = _plan_of({"e1": route, "e2": route})
    with pytest.raises(PlanStructureError, match="twice"):
        plan_to_assignment(inst, plan, 2)


def test_translate_rejects_exceeding_subtrip_budget():
    inst = make_instance(
        deliveries=[
            delivery("d1", 1.0, 0.0, 0.0, 600.0),
            delivery("d2", 2.0, 0.0, 0.0, 700.0),
            delivery("d3", 3.0, 0.0, 0.0, 800.0),
        ],
        cps=[cp("c1", 1.5, 0.0)],
        evs=[ev("e1", speed=1.0)],
        horizon=2000.0,
    )
    route = (
        Stop("depot", "d0", 0.0, 0.0, 100.0),
        Stop("delivery", "d1", 1.0, 6.0, 99.0),
        Stop("charge", "c1", 7.0, 9.0, 100.0, 0.5),
        Stop("delivery", "d2", 10.0, 15.0, 99.0),
        Stop("charge", "c1", 16.0, 18.0, 100.0, 0.5),
        Stop("delivery", "d3", 19.0, 24.0, 99.0),
        Stop("depot", "d0", 27.0, 27.0, 97.0),
    )
    plan = _plan_of({"e1": route})
    with pytest.raises(PlanStructureError, match="l_max"):
        plan_to_assignment(inst, plan, 2)
    assignment = plan_to_assignment(inst, plan, 3)  # three subtrips fit
    assert assignment.values["z_e1_3"] == 1.0


def test_translate_rejects_trailing_charge():
    inst = make_instance(
        deliveries=[delivery("d1", 1.0, 0.0, 0.0, 600.0)],
        cps=[cp("c1", 1.5, 0.0)],
        evs=[ev("e1", speed=1.0)],
        horizon=2000.0,
    )
    route = (
        Stop("depot", "d0", 0.0, 0.0, 100.0),
        Stop("delivery", "d1", 1.0, 6.0, 99.0),
        Stop("charge", "c1", 7.0, 9.0, 100.0, 0.5),
        Stop("depot", "d0", 11.0, 11.0, 99.0),
    )
    with pytest.raises(PlanStructureError, match="delivery"):
        plan_to_assignment(inst, _plan_of({"e1": route}), 3)


def test_translate_rejects_midroute_depot_charge():
    inst = make_instance(
        deliveries=[
            delivery("d1", 1.0, 0.0, 0.0, 600.0),
            delivery("d2", 2.0, 0.0, 0.0, 700.0),
        ],
        cps=[cp("c1", 1.5, 0.0)],
        evs=[ev("e1", speed=1.0)],
        horizon=2000.0,
    )
    route = (
        Stop("depot", "d0", 0.0, 0.0, 100.0),
        Stop("delivery", "d1", 1.0, 6.0, 99.0),
        Stop("charge", "d0", 7.0, 9.0, 100.0, 0.3),
        Stop("delivery", "d2", 11.0, 16.0, 98.0),
        Stop("depot", "d0", 18.0, 18.0, 96.0),
    )
    with pytest.raises(PlanStructureError, match="depot"):
        plan_to_assignment(inst, _plan_of({"e1": route}), 3)
