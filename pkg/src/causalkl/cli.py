"""Command-line interface.

Typical pipeline:

    causalkl mutate --name rev.out.strong --output mutant.json
    causalkl project --truth metastatic.json --dag mutant.json \
        --output mutant_fitted.json
    causalkl eval --truth metastatic.json --model mutant_fitted.json \
        --metric ckl3 --scale

    causalkl reproduce-metastatic --regime infinite
    causalkl audit-desiderata
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from .augmentation import InterventionScheme
from .divergence import ckl, kl, wed3
from .errors import CausalklError
from .fileio import (load_dag, load_dataset, load_network, save_dag,
                     save_dataset, save_network)
from .harness import (ALL_COLUMNS, DIVERGENCE_COLUMNS, STRUCTURE_COLUMNS,
                      Cell, CptTweak, ExperimentConfig, MetricReport,
                      Mutation, apply_mutation, builtin_metastatic_suite,
                      desiderata_audit, path_mirror, run_finite, run_infinite,
                      scale_factor)
from .network import joint_distribution, fit_mle, project_parameters, sample
from .structure import edit_distance, wed_d, wed_p

EVAL_METRICS = ("ed", "wed_d", "wed_p", "kl", "ckl1", "ckl2", "ckl3", "wed3")
_SCHEME_OF = {
    "ckl1": InterventionScheme.INDEPENDENT,
    "ckl2": InterventionScheme.SUBSETS,
    "ckl3": InterventionScheme.ONE_FREE,
}


def _log_base(flag: str) -> float | None:
    return None if flag == "e" else 2.0


def _emit(text: str, output: str | None):
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _render(reports: list[MetricReport], fmt: str, output: str | None):
    if fmt == "csv":
        blocks = [f"# table: {r.title}\n" + r.to_csv() for r in reports]
    else:
        blocks = [r.to_text() for r in reports]
    _emit("\n".join(blocks), output)


def _add_output_flags(p: argparse.ArgumentParser):
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.add_argument("--output", help="write to this file instead of stdout")


def _add_metric_flags(p: argparse.ArgumentParser):
    scale = p.add_mutually_exclusive_group()
    scale.add_argument("--scale", dest="scale", action="store_true",
                       default=True,
                       help="apply the per-scheme presentation scaling "
                            "(ckl1/ckl2 x2, ckl3 x variable count; default)")
    scale.add_argument("--no-scale", dest="scale", action="store_false",
                       help="report raw divergences")
    p.add_argument("--log-base", choices=("e", "2"), default="e",
                   help="logarithm base for divergences (default natural)")


def cmd_eval(args) -> int:
    truth = load_network(args.truth)
    try:
        model = load_network(args.model)
        model_dag = model.dag
    except ValueError:
        model = None
        model_dag = load_dag(args.model)
    if args.metric == "all":
        metrics = ("ed", "wed_d", "kl", "ckl1", "ckl2", "ckl3", "wed3")
    else:
        metrics = (args.metric,)
    needs_params = [m for m in metrics
                    if m not in ("ed", "wed_d", "wed_p")]
    if model is None and needs_params:
        raise CausalklError(
            f"{args.model} has no parameters; {needs_params[0]} needs a "
            f"full network (run the project subcommand first)")
    base = _log_base(args.log_base)
    c = len(truth.variables)
    cells: dict[tuple[str, str], Cell] = {}

    def put(col: str, value: float, flags=()):
        if base is not None and col != "ed" and math.isfinite(value):
            value /= math.log(base)
        cells[("model", col)] = Cell(value, flags=tuple(flags))

    for m in metrics:
        if m == "ed":
            put(m, float(edit_distance(truth.dag, model_dag)))
        elif m == "wed_d":
            put(m, wed_d(truth, model_dag))
        elif m == "wed_p":
            put(m, wed_p(path_mirror(truth), model_dag))
        elif m == "kl":
            dv = kl(joint_distribution(truth), joint_distribution(model))
            put(m, dv.value, ["infinite"] if dv.hit_zero_denominator else [])
        elif m == "wed3":
            dv = wed3(truth, model)
            put(m, dv.value, ["infinite"] if dv.hit_zero_denominator else [])
        else:
            dv = ckl(_SCHEME_OF[m], truth, model)
            factor = scale_factor(_SCHEME_OF[m], c) if args.scale else 1.0
            put(m, factor * dv.value,
                ["infinite"] if dv.hit_zero_denominator else [])
    scaling = (f"ckl1 x2, ckl2 x2, ckl3 x{c}" if args.scale else "off")
    report = MetricReport("model vs truth", tuple(metrics), ("model",),
                          cells, {"log_base": args.log_base,
                                  "scaling": scaling})
    _render([report], args.format, args.output)
    return 0


def _parse_arc(text: str) -> tuple[str, str]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2 or not all(parts):
        raise CausalklError(f"malformed arc {text!r}, expected 'FROM,TO'")
    return parts[0], parts[1]


def _parse_given(items) -> tuple[tuple[str, str], ...]:
    out = []
    for item in items or []:
        if "=" not in item:
            raise CausalklError(
                f"malformed condition {item!r}, expected 'PARENT=STATE'")
        name, state = item.split("=", 1)
        out.append((name.strip(), state.strip()))
    return tuple(out)


def cmd_mutate(args) -> int:
    if args.network:
        net = load_network(args.network)
    else:
        net, _ = builtin_metastatic_suite()
    if args.name:
        _, suite = builtin_metastatic_suite()
        by_name = {m.name: m for m in suite}
        if args.name not in by_name:
            raise CausalklError(
                f"unknown mutation {args.name!r}; choose from "
                f"{', '.join(sorted(by_name))}")
        mutation = by_name[args.name]
    elif args.kind == "tweak":
        mutation = Mutation("cli.tweak", "tweak", tweak=CptTweak(
            args.child, _parse_given(args.given), args.state, args.prob))
    elif args.kind:
        arcs = tuple(_parse_arc(a) for a in args.arc or [])
        mutation = Mutation(f"cli.{args.kind}", args.kind, arcs)
    else:
        raise CausalklError("mutate needs --name or --kind")
    dag, mutated = apply_mutation(net, mutation)
    if mutated is not None:
        save_network(mutated, args.output)
    else:
        save_dag(dag, args.output)
    return 0


def cmd_sample(args) -> int:
    net = load_network(args.network)
    data = sample(net, args.n, args.seed)
    save_dataset(data, args.output)
    return 0


def cmd_fit(args) -> int:
    try:
        dag = load_network(args.dag).dag
    except ValueError:
        dag = load_dag(args.dag)
    data = load_dataset(args.data, dag.variables)
    fitted = fit_mle(dag, data, args.pseudocount)
    save_network(fitted, args.output)
    return 0


def cmd_project(args) -> int:
    truth = load_network(args.truth)
    try:
        dag = load_network(args.dag).dag
    except ValueError:
        dag = load_dag(args.dag)
    projected = project_parameters(joint_distribution(truth), dag)
    save_network(projected, args.output)
    return 0


def cmd_reproduce_metastatic(args) -> int:
    base = _log_base(args.log_base)
    config = ExperimentConfig.metastatic(
        sample_size=args.n, replicates=args.replicates, seed=args.seed,
        pseudocount=args.pseudocount, scaled=args.scale, log_base=base,
        epsilon_floor=args.epsilon_floor, jobs=args.jobs)
    reports: list[MetricReport] = []
    if args.regime in ("infinite", "both"):
        inf_report = run_infinite(config)
        reports.append(inf_report.subset(STRUCTURE_COLUMNS,
                                         "structure metrics"))
        reports.append(inf_report.subset(DIVERGENCE_COLUMNS,
                                         "divergences, infinite data"))
    if args.regime in ("finite", "both"):
        fin = run_finite(config)
        if args.regime == "finite":
            reports.append(fin.subset(STRUCTURE_COLUMNS,
                                      "structure metrics"))
        reports.append(fin.subset(
            DIVERGENCE_COLUMNS,
            f"divergences, finite data (n={args.n}, "
            f"{args.replicates} replicates)"))
    _render(reports, args.format, args.output)
    return 0


def cmd_audit_desiderata(args) -> int:
    report = desiderata_audit(seed=args.seed,
                              reparameterizations=args.reparameterizations)
    if args.format == "csv":
        lines = ["metric," + ",".join(report.columns)]
        for r in report.rows:
            lines.append(r + "," + ",".join(
                report.verdicts[(r, c)] for c in report.columns))
        for note in report.notes:
            lines.append(f"# {note}")
        _emit("\n".join(lines) + "\n", args.output)
    else:
        _emit(report.to_text(), args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="causalkl",
        description="Score learned causal network structures against a "
                    "known truth.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("eval", help="score one model against a truth network")
    p.add_argument("--truth", required=True, help="true network JSON")
    p.add_argument("--model", required=True,
                   help="model network JSON (structure-only files allow "
                        "ed/wed_d/wed_p)")
    p.add_argument("--metric", choices=("all",) + EVAL_METRICS,
                   default="all")
    _add_metric_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("mutate",
                       help="apply a suite mutation or an inline edit")
    p.add_argument("--network",
                   help="network JSON (default: built-in benchmark)")
    p.add_argument("--name", help="mutation name from the built-in suite")
    p.add_argument("--kind", choices=("add", "delete", "reverse", "tweak"))
    p.add_argument("--arc", action="append",
                   help="arc as 'FROM,TO' (repeatable)")
    p.add_argument("--child", help="tweak: child variable")
    p.add_argument("--given", action="append",
                   help="tweak: parent condition 'PARENT=STATE' (repeatable)")
    p.add_argument("--state", help="tweak: child state to set")
    p.add_argument("--prob", type=float, help="tweak: new probability")
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_mutate)

    p = sub.add_parser("sample", help="draw a dataset from a network")
    p.add_argument("--network", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("fit",
                       help="maximum-likelihood CPTs for a structure")
    p.add_argument("--dag", required=True,
                   help="structure JSON (a full network's arcs also work)")
    p.add_argument("--data", required=True, help="dataset CSV")
    p.add_argument("--pseudocount", type=float, default=0.0)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("project",
                       help="parameterize a structure from a truth's joint")
    p.add_argument("--truth", required=True)
    p.add_argument("--dag", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("reproduce-metastatic",
                       help="run the built-in benchmark tables")
    p.add_argument("--regime", choices=("infinite", "finite", "both"),
                   default="both")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--replicates", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pseudocount", type=float, default=0.5,
                   help="smoothing added to every CPT count when fitting "
                        "finite replicates (default 0.5)")
    p.add_argument("--epsilon-floor", type=float, default=None,
                   help="optional probability floor for finite-data "
                        "ckl1/ckl2 (default off)")
    p.add_argument("--jobs", type=int, default=1,
                   help="worker processes for finite replicates")
    _add_metric_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=cmd_reproduce_metastatic)

    p = sub.add_parser("audit-desiderata",
                       help="check each metric against the six requirements")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reparameterizations", type=int, default=20)
    _add_output_flags(p)
    p.set_defaults(func=cmd_audit_desiderata)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CausalklError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
