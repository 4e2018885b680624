import pytest

from edrp import csa_plan, edf_plan, generate_synthetic, ndf_plan, simulate_plan
from edrp.errors import EnumerationLimitError
from edrp.heuristics import report_objective
from edrp.milp import (
    EnumerationLimits,
    default_alphas,
    default_l_max,
    enumerate_optimal,
    oracle_search,
)
from helpers import cp, delivery, ev, make_instance


def test_easy_single_delivery_served_without_charging():
    inst = make_instance(
        deliveries=[delivery("d1", 3.0, 4.0, 0.0, 300.0)],
        cps=[cp("c1", 1.0, 1.0)],
        evs=[ev("e1", battery=100.0, mileage=2.0, speed=0.5)],
    )
    unbilled = oracle_search(inst, EnumerationLimits(bill_depot_return=False))
    assert unbilled.served == 1
    assert unbilled.total_cost == 0.0
    assert [s.kind for s in unbilled.plan.routes["e1"]] == ["depot", "delivery", "depot"]
    # with end-of-day billing the round trip energy is priced at the depot rate
    billed = oracle_search(inst, EnumerationLimits(bill_depot_return=True))
    assert billed.total_cost == pytest.approx(10.0 / 2.0 * 0.3)


def test_forced_charge_inserts_exactly_one_stop():
    # chaining both deliveries costs 28 kWh against a 24 kWh battery, so the
    # energy cap forces one full recharge between them
    inst = make_instance(
        deliveries=[
            delivery("d1", 10.0, 0.0, 0.0, 400.0),
            delivery("d2", 14.0, 0.0, 0.0, 600.0),
        ],
        cps=[cp("c1", 13.0, 0.0, cost=0.5, rate=200.0, wait=2.0)],
        evs=[ev("e1", battery=24.0, mileage=1.0, speed=1.0)],
    )
    result = oracle_search(inst)
    assert result.served == 2
    charges = [s for r in result.plan.routes.values() for s in r if s.kind == "charge"]
    assert len(charges) == 1
    # serving d1 first reaches the charger with less deficit, hence cheaper
    assert [s.node for s in result.plan.routes["e1"]] == ["d0", "d1", "c1", "d2", "d0"]


def test_objective_ties_break_lexicographically():
    inst = make_instance(
        deliveries=[
            delivery("d1", 1.0, 0.0, 0.0, 300.0),
            delivery("d2", -1.0, 0.0, 0.0, 300.0),
        ],
        cps=[cp("c1", 0.0, 1.0)],
        evs=[ev("e1", battery=100.0, mileage=2.0, speed=0.5)],
    )
    result = oracle_search(inst)
    assert result.served == 2
    served_order = [s.node for s in result.plan.routes["e1"] if s.kind == "delivery"]
    assert served_order == ["d1", "d2"]


def test_dominates_heuristics_and_serves_all_when_possible():
    for seed in range(20):
        inst = generate_synthetic(seed, 4, 2, 2)
        l_max = default_l_max(inst)
        alphas = default_alphas(inst, l_max)
        limits = EnumerationLimits(l_max=l_max, alphas=alphas)
        result = oracle_search(inst, limits)
        if result.max_feasible_served == len(inst.deliveries):
            assert result.served == len(inst.deliveries)
        for planner in (csa_plan, edf_plan, ndf_plan):
            report = simulate_plan(inst, planner(inst))
            assert report.feasible
            assert report_objective(report, alphas) <= result.objective + 1e-6


def test_refuses_oversized_instances():
    inst = generate_synthetic(0, 7, 2, 1)
    with pytest.raises(EnumerationLimitError, match="refusing"):
        oracle_search(inst)
    inst = generate_synthetic(0, 4, 4, 1)
    with pytest.raises(EnumerationLimitError):
        oracle_search(inst)
    inst = generate_synthetic(0, 4, 2, 3)
    with pytest.raises(EnumerationLimitError):
        oracle_search(inst, EnumerationLimits(max_evs=2))


def test_deterministic():
    inst = generate_synthetic(33, 5, 2, 2)
    assert oracle_search(inst).plan == oracle_search(inst).plan


def test_enumerate_optimal_report_matches_search():
    inst = generate_synthetic(14, 4, 2, 1)
    result = oracle_search(inst)
    assignment, report = enumerate_optimal(inst)
    assert report.feasible
    assert report.objective_value == pytest.approx(result.objective, abs=1e-9)
    assert report.deliveries_served == result.served
    assert report.charging_cost == pytest.approx(result.total_cost, abs=1e-9)
    # the assignment realizes the plan's arcs
    taken = [n for n, v in assignment.values.items() if n.startswith("chi_") and v == 1.0]
    assert len(taken) >= result.served + 1


def test_csa_gap_to_oracle_is_small_on_average():
    gaps = []
    for seed in range(30):
        inst = generate_synthetic(seed, 5, 2, 1)
        result = oracle_search(inst)
        report = simulate_plan(inst, csa_plan(inst))
        gaps.append(result.served - report.served_count)
        assert report.served_count <= result.served
    assert sum(gaps) / len(gaps) <= 1.0, gaps
