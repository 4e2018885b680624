import math
from collections import Counter

import pytest

from edrp import build_model, generate_synthetic
from edrp.errors import ConfigError
from edrp.milp import Assignment, check_solution, default_alphas, default_l_max, tag_family
from helpers import cp, delivery, ev, make_instance


def _family_counts(model):
    return Counter(tag_family(r.tag) for r in model.constraints)


def _tiny(n_deliveries=2, n_cps=1, n_evs=1):
    deliveries = [
        delivery(f"d{i}", float(i), 0.0, 10.0 * i, 200.0 + 10.0 * i)
        for i in range(1, n_deliveries + 1)
    ]
    cps = [cp(f"c{q}", 0.5 * q, 1.0) for q in range(1, n_cps + 1)]
    evs = [ev(f"e{j}") for j in range(1, n_evs + 1)]
    return make_instance(deliveries=deliveries, cps=cps, evs=evs)


def expected_family_counts(n_d: int, n_c: int, n_e: int, l: int) -> dict[str, int]:
    """Closed-form row counts per family from the index sets."""
    return {
        "C1": n_e,
        "C2": 2 * n_e,  # flow equality + single-departure cap
        "C3": n_e * (l - 1) * n_c,
        "C4": n_e * l * n_d,
        "C5": n_d,
        "C6": n_e * l,
        "C7": n_e * l,
        "C8": n_e * l,
        "C9": n_e * l,
        "C10": n_e * (l - 1) * n_c,
        "C11": n_e * l * n_d * (n_d - 1),
        "C12": 2 * n_e * l * n_d,  # explicit lower + upper order bounds
        "C13": n_e * l,
        "C14": n_e * l,
        "C15": n_e,
        "C16": 3 * n_e * l * n_d * (n_d - 1 + n_c),
        "C17": 3 * n_e * l * n_c * n_d,
        "C18": n_e * l * n_d,
        "C19": n_e * l * n_c,
        "C20": 3 * n_d,
        "C21": n_e * (l - 1) * n_c,
        "EQ3": 3 * n_e * l * n_d * (n_c + 1),
    }


def expected_variable_count(n_d: int, n_c: int, n_e: int, l: int) -> int:
    arcs = n_d * (1 + n_c + n_d - 1) + n_d * (n_c + 1)
    chi = n_e * l * arcs
    z = n_e * l
    u = n_e * l * n_d
    beta = n_e * l
    t_delivery = 2 * n_d
    t_cp = 2 * n_c * n_e * l
    t_depot = n_e
    omega = n_e * l * n_d * (n_d - 1 + n_c)
    omhat = n_e * l * n_c * n_d
    lam = n_e * l * n_d * (n_c + 1)
    return chi + z + u + beta + t_delivery + t_cp + t_depot + omega + omhat + lam


@pytest.mark.parametrize(
    "n_d,n_c,n_e,l",
    [(2, 1, 1, 2), (3, 2, 2, 3), (1, 1, 1, 1), (4, 3, 2, 2)],
)
def test_constraint_counts_match_formulas(n_d, n_c, n_e, l):
    inst = _tiny(n_d, n_c, n_e)
    model = build_model(inst, l_max=l)
    got = _family_counts(model)
    want = expected_family_counts(n_d, n_c, n_e, l)
    want = {k: v for k, v in want.items() if v > 0}
    assert dict(got) == want
    assert len(model.variables) == expected_variable_count(n_d, n_c, n_e, l)


def test_rows_are_linear_and_well_formed():
    inst = generate_synthetic(5, 3, 2, 2)
    model = build_model(inst)
    names = {v.name for v in model.variables}
    for row in model.constraints:
        assert row.sense in ("<=", ">=", "=")
        assert math.isfinite(row.rhs)
        assert row.coeffs, row.tag
        for var, coef in row.coeffs.items():
            # one float per variable: a linear expression by construction
            assert var in names
            assert isinstance(coef, float) and math.isfinite(coef) and coef != 0.0
        assert tag_family(row.tag) in {f"C{i}" for i in range(1, 22)} | {"EQ3"}


def test_zero_point_analysis():
    inst = _tiny(2, 1, 1)
    model = build_model(inst, l_max=2)
    zeros = Assignment(values={v.name: 0.0 for v in model.variables})
    report = check_solution(model, zeros)
    assert report.objective_value == 0.0
    assert report.deliveries_served == 0
    assert not report.feasible
    families = {tag_family(v.tag) for v in report.violations}
    assert "C12" in families  # order variables sit below their lower bound of 2
    for satisfied in ("C1", "C5", "C14"):
        assert satisfied not in families
    # every order variable's lower bound is flagged
    c12lb = [v for v in report.violations if v.tag.startswith("C12lb")]
    assert len(c12lb) == 2 * 2  # deliveries x subtrips


def test_big_m_constants():
    inst = _tiny(3, 2, 1)
    model = build_model(inst, l_max=2)
    assert model.big_m_time == inst.horizon
    assert model.big_m_count == 3.0
    assert model.n == 4  # deliveries + 1: one subtrip can chain them all


def test_variable_bounds_and_kinds():
    inst = _tiny(2, 1, 1)
    model = build_model(inst, l_max=2)
    by_name = model.variables_by_name
    assert by_name["chi_d0_d1_e1_1"].kind == "binary"
    assert by_name["z_e1_2"].kind == "binary"
    u = by_name["u_d1_e1_1"]
    assert (u.lb, u.ub) == (2.0, 3.0)
    beta = by_name["beta_e1_1"]
    assert (beta.lb, beta.ub) == (0.0, inst.battery_capacity)
    assert by_name["tarr_d1"].lb == 0.0
    assert by_name["that_dep_d0_e1_1"].name in by_name


def test_default_l_max_and_alphas():
    inst = generate_synthetic(0, 10, 2, 3)
    assert default_l_max(inst) == min(10, 1 + math.ceil(10 / 3))
    l = default_l_max(inst)
    a1, a2 = default_alphas(inst, l)
    theta_max = max(c.unit_cost for c in inst.charging_points)
    assert a1 == 1.0
    assert a2 == pytest.approx(1.0 / (inst.battery_capacity * theta_max * l))


def test_objective_terms():
    inst = _tiny(2, 1, 1)
    a1, a2 = 1.0, 0.01
    model = build_model(inst, l_max=2, alphas=(a1, a2))
    # every arc into a delivery contributes a1
    assert model.objective["chi_d0_d1_e1_1"] == a1
    assert model.objective["chi_c1_d2_e1_2"] == a1
    # cost terms carry -a2 * unit price of the terminal charging location
    assert model.objective["lam_d1_c1_e1_1"] == pytest.approx(-a2 * 0.5)
    assert model.objective["lam_d1_d0_e1_1"] == pytest.approx(-a2 * 0.3)


def test_depot_return_billing_flag():
    inst = _tiny(2, 1, 1)
    unbilled = build_model(inst, l_max=2, bill_depot_return=False)
    assert "lam_d1_d0_e1_1" not in unbilled.objective
    assert unbilled.objective["lam_d1_c1_e1_1"] < 0.0
    cost_by_name = dict(unbilled.cost_terms)
    assert cost_by_name["lam_d1_d0_e1_1"] == 0.0


def test_build_rejects_bad_parameters():
    inst = _tiny(2, 1, 1)
    with pytest.raises(ConfigError):
        build_model(inst, l_max=0)
    with pytest.raises(ConfigError):
        build_model(inst, l_max=2, alphas=(1.0, math.inf))


def test_model_without_public_cps():
    inst = make_instance(
        deliveries=[delivery("d1", 1.0, 0.0, 0.0, 100.0), delivery("d2", 2.0, 0.0, 0.0, 150.0)],
        cps=[],
        evs=[ev("e1")],
    )
    model = build_model(inst, l_max=2)
    families = _family_counts(model)
    for cp_family in ("C3", "C10", "C17", "C19", "C21"):
        assert cp_family not in families
    assert families["C13"] == 2
    # the depot still appears as the terminal charging location
    assert any(name.startswith("lam_") and name.endswith("_d0_e1_1") for name, _ in model.cost_terms)
