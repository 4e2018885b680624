"""Command-line interface.

Subcommands:

* ``edrp generate``     write a synthetic instance file
* ``edrp solve``        run a planner on an instance, optionally saving the plan
* ``edrp bench``        run a parameter sweep and write metrics/figures
* ``edrp export-milp``  write the exact model as LP or MPS text
* ``edrp check``        verify a solver's variable dump against the model
* ``edrp oracle``       exhaustive optimum for desk-scale instances
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .bench import ExperimentConfig, run_experiment, summarize
from .errors import EdrpError
from .heuristics import (
    ClusteringParams,
    csa_plan,
    edf_plan,
    ndf_plan,
    report_objective,
    save_plan,
    simulate_plan,
)
from .instance import GeneratorConfig, generate_synthetic, load_instance, save_instance
from .milp import (
    EnumerationLimits,
    assignment_for_model,
    build_model,
    check_solution,
    default_alphas,
    default_l_max,
    enumerate_optimal,
    export_model,
    oracle_search,
    read_solution,
    write_solution,
)


def parse_values(text: str) -> tuple[float, ...]:
    """``25..200:25`` (inclusive range) or ``5,10,15`` or a single number."""
    text = text.strip()
    if ".." in text:
        span, _, step_txt = text.partition(":")
        lo_txt, _, hi_txt = span.partition("..")
        try:
            lo, hi = float(lo_txt), float(hi_txt)
            step = float(step_txt) if step_txt else 1.0
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad range {text!r}") from None
        if step <= 0 or hi < lo:
            raise argparse.ArgumentTypeError(f"bad range {text!r}")
        out = []
        v = lo
        while v <= hi + 1e-9:
            out.append(round(v, 9))
            v += step
        return tuple(out)
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad value list {text!r}") from None


def parse_seeds(text: str) -> tuple[int, ...]:
    """A count (``10`` means seeds 0..9), a comma list, or an inclusive range."""
    text = text.strip()
    if ".." in text or "," in text:
        return tuple(int(v) for v in parse_values(text))
    count = int(text)
    if count < 1:
        raise argparse.ArgumentTypeError("seed count must be >= 1")
    return tuple(range(count))


def _add_instance_arg(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--instance", required=True, type=Path, help="instance file")
    parser.add_argument(
        "--instance-format",
        default="native-json",
        choices=("native-json", "jd-style"),
        help="instance file format (default native-json)",
    )


def _add_model_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--lmax", type=int, default=None, help="subtrip budget per vehicle")
    parser.add_argument("--alpha1", type=float, default=None, help="objective weight on deliveries")
    parser.add_argument("--alpha2", type=float, default=None, help="objective weight on cost")
    parser.add_argument(
        "--no-depot-return-billing",
        action="store_true",
        help="zero the cost of the final return-to-depot leg",
    )


def _resolve_model_params(instance, args) -> tuple[int, tuple[float, float], bool]:
    l_max = args.lmax if args.lmax is not None else default_l_max(instance)
    alphas = default_alphas(instance, l_max)
    if args.alpha1 is not None:
        alphas = (args.alpha1, alphas[1])
    if args.alpha2 is not None:
        alphas = (alphas[0], args.alpha2)
    return l_max, alphas, not args.no_depot_return_billing


def _cmd_generate(args) -> int:
    config = GeneratorConfig()
    if args.battery is not None:
        config = replace(config, battery_range=(args.battery[0], args.battery[1]))
    instance = generate_synthetic(args.seed, args.deliveries, args.cps, args.evs, config)
    save_instance(instance, args.out)
    print(
        f"wrote {args.out} ({args.deliveries} deliveries, {args.cps} charging points, "
        f"{args.evs} vehicles, seed {args.seed})"
    )
    return 0


def _cmd_solve(args) -> int:
    instance = load_instance(args.instance, args.instance_format)
    bill = not args.no_depot_return_billing
    if args.method == "csa":
        params = ClusteringParams(
            eps_spatial=args.eps_spatial,
            eps_temporal=args.eps_temporal,
            min_pts=args.min_pts,
        )
        plan = csa_plan(instance, params)
    elif args.method == "edf":
        plan = edf_plan(instance, order=args.edf_order)
    elif args.method == "ndf":
        plan = ndf_plan(instance)
    else:
        raise EdrpError(f"unknown method {args.method!r}")
    report = simulate_plan(instance, plan, bill_depot_return=bill)
    alphas = default_alphas(instance, default_l_max(instance))
    print(f"method: {args.method}")
    print(f"served: {report.served_count}/{len(instance.deliveries)}")
    print(f"total cost: {report.total_cost:.4f} (per served: {report.cost_per_served:.4f})")
    print(f"makespan: {report.makespan:.2f} min")
    print(f"objective: {report_objective(report, alphas):.6f}")
    print(f"feasible: {report.feasible}")
    if args.plan_out is not None:
        save_plan(plan, args.plan_out)
        print(f"plan written to {args.plan_out}")
    return 0 if report.feasible else 1


def _cmd_bench(args) -> int:
    config = ExperimentConfig(
        sweep=args.sweep,
        values=args.values,
        deliveries=args.deliveries,
        ratio=args.ratio,
        cps=args.cps,
        seeds=args.seeds,
        methods=tuple(args.methods.split(",")),
        output_dir=args.out,
        bill_depot_return=not args.no_depot_return_billing,
        render_figures=not args.no_figures,
    )
    rows = run_experiment(config)
    summary = summarize(rows)
    print(f"{len(rows)} runs -> {args.out}")
    for s in summary:
        extra = ""
        if s.cost_reduction_vs_edf is not None:
            extra += f"  vs edf {s.cost_reduction_vs_edf:+.1%}"
        if s.cost_reduction_vs_ndf is not None:
            extra += f"  vs ndf {s.cost_reduction_vs_ndf:+.1%}"
        print(
            f"  {s.method:6s} x={s.sweep_value:g}: served {s.served_mean:.2f}±{s.served_std:.2f}"
            f"  cost {s.avg_cost_mean:.4f}±{s.avg_cost_std:.4f}"
            f"  elapsed {s.elapsed_ms_mean:.1f} ms{extra}"
        )
    return 0


def _cmd_export_milp(args) -> int:
    instance = load_instance(args.instance, args.instance_format)
    l_max, alphas, bill = _resolve_model_params(instance, args)
    model = build_model(instance, l_max, alphas, bill_depot_return=bill)
    export_model(model, args.out, args.format)
    print(
        f"wrote {args.out}: {len(model.variables)} variables, "
        f"{len(model.constraints)} constraints (l_max={l_max})"
    )
    return 0


def _cmd_check(args) -> int:
    instance = load_instance(args.instance, args.instance_format)
    l_max, alphas, bill = _resolve_model_params(instance, args)
    model = build_model(instance, l_max, alphas, bill_depot_return=bill)
    values = read_solution(args.solution)
    fill = None if args.strict_variables else 0.0
    assignment = assignment_for_model(model, values, fill_missing=fill)
    report = check_solution(model, assignment, tol=args.tol)
    print(f"feasible: {report.feasible}")
    print(f"objective: {report.objective_value:.6f}")
    print(f"deliveries served: {report.deliveries_served}")
    print(f"charging cost: {report.charging_cost:.4f}")
    if report.violations:
        print(f"violations ({len(report.violations)}):")
        for v in report.violations[: args.max_violations]:
            print(f"  {v.tag}: lhs={v.lhs:.6f} {v.sense} rhs={v.rhs:.6f} (slack {v.slack:.2e})")
        if len(report.violations) > args.max_violations:
            print(f"  ... and {len(report.violations) - args.max_violations} more")
    return 0 if report.feasible else 1


def _cmd_oracle(args) -> int:
    instance = load_instance(args.instance, args.instance_format)
    l_max, alphas, bill = _resolve_model_params(instance, args)
    limits = EnumerationLimits(
        max_deliveries=args.max_deliveries,
        max_evs=args.max_evs,
        max_cps=args.max_cps,
        l_max=l_max,
        alphas=alphas,
        bill_depot_return=bill,
    )
    result = oracle_search(instance, limits)
    print(f"served: {result.served}/{len(instance.deliveries)}")
    print(f"total cost: {result.total_cost:.4f}")
    print(f"objective: {result.objective:.6f}")
    for ev in instance.evs:
        route = result.plan.routes.get(ev.id, ())
        if len(route) <= 1:
            print(f"  {ev.id}: idle")
        else:
            print(f"  {ev.id}: " + " -> ".join(s.node for s in route))
    if args.solution_out is not None:
        assignment, report = enumerate_optimal(instance, limits)
        write_solution(assignment.values, args.solution_out, objective=report.objective_value)
        print(f"solution written to {args.solution_out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="edrp",
        description="Electric-vehicle delivery route planning toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic instance file")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--deliveries", type=int, required=True)
    p.add_argument("--cps", type=int, required=True)
    p.add_argument("--evs", type=int, required=True)
    p.add_argument("--battery", type=float, nargs=2, metavar=("LO", "HI"), default=None)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("solve", help="run a planner on an instance")
    _add_instance_arg(p)
    p.add_argument("--method", required=True, choices=("csa", "edf", "ndf"))
    p.add_argument("--plan-out", type=Path, default=None)
    p.add_argument("--eps-spatial", type=float, default=None)
    p.add_argument("--eps-temporal", type=float, default=None)
    p.add_argument("--min-pts", type=int, default=2)
    p.add_argument("--edf-order", default="start", choices=("start", "deadline"))
    p.add_argument("--no-depot-return-billing", action="store_true")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("bench", help="run a parameter sweep")
    p.add_argument("--sweep", required=True, choices=("deliveries", "ratio", "cps"))
    p.add_argument("--values", required=True, type=parse_values,
                   help="e.g. 25..200:25 or 5,10,15")
    p.add_argument("--deliveries", type=int, default=200, help="fixed delivery count")
    p.add_argument("--ratio", type=float, default=5.0, help="fixed delivery-to-vehicle ratio")
    p.add_argument("--cps", type=int, default=5, help="fixed charging-point count")
    p.add_argument("--methods", default="csa,edf,ndf")
    p.add_argument("--seeds", type=parse_seeds, default=tuple(range(10)),
                   help="count (10 -> seeds 0..9), list, or range")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--no-figures", action="store_true")
    p.add_argument("--no-depot-return-billing", action="store_true")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("export-milp", help="write the exact model as LP/MPS text")
    _add_instance_arg(p)
    _add_model_args(p)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--format", default=None, choices=("lp-text", "mps-text"))
    p.set_defaults(func=_cmd_export_milp)

    p = sub.add_parser("check", help="verify a solution dump against the model")
    _add_instance_arg(p)
    _add_model_args(p)
    p.add_argument("--solution", required=True, type=Path)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-violations", type=int, default=20)
    p.add_argument(
        "--strict-variables",
        action="store_true",
        help="fail on missing variables instead of assuming 0",
    )
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("oracle", help="exhaustive optimum (desk scale)")
    _add_instance_arg(p)
    _add_model_args(p)
    p.add_argument("--max-deliveries", type=int, default=6)
    p.add_argument("--max-evs", type=int, default=2)
    p.add_argument("--max-cps", type=int, default=3)
    p.add_argument("--solution-out", type=Path, default=None)
    p.set_defaults(func=_cmd_oracle)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except EdrpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
