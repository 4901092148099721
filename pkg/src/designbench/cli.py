"""Command-line interface: check, simulate, optimize, generate, evaluate, render.

Machine-readable JSON goes to stdout, messages to stderr.  Exit codes:
0 ok, 2 usage, 3 constraint error, 4 simulation failure, 5 unknown problem.
"""
from __future__ import annotations

import argparse
import ast
import json
import os
import sys
from typing import Any, Sequence

import numpy as np

from designbench import datagen, metrics
from designbench.datagen import DatasetError
from designbench.core import (
    ConstraintError,
    Problem,
    RegistryError,
    SimulationError,
    UnknownConditionError,
    make,
)

EXIT_OK, EXIT_USAGE, EXIT_CONSTRAINT, EXIT_SIMULATION, EXIT_REGISTRY = 0, 2, 3, 4, 5


class UsageError(Exception):
    pass


def _literal(text: str) -> Any:
    try:
        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        return text


def _pairs(items: Sequence[str] | None, what: str, convert=_literal) -> dict[str, Any]:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise UsageError(f"{what} must look like NAME=VALUE, got {item!r}")
        name, value = item.split("=", 1)
        out[name.strip()] = convert(value.strip())
    return out


def _float(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise UsageError(f"not a number: {text!r}") from None


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, sort_keys=True) + "\n")


def _tolist(x) -> Any:
    return np.asarray(x).tolist()


def load_design(path: str) -> np.ndarray:
    if path.endswith(".npy"):
        return np.load(path)
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if isinstance(data, dict):
        data = data["design"]
    return np.asarray(data, dtype=float)


def save_design(design, path: str) -> None:
    if path.endswith(".npy"):
        np.save(path, np.asarray(design))
    else:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump({"shape": list(np.shape(design)), "design": _tolist(design)}, fh)
            fh.write("\n")


def _problem(args) -> Problem:
    return make(args.problem, seed=args.seed, **_pairs(args.config, "--config"))


def _design(args, problem: Problem):
    if getattr(args, "design", None):
        return load_design(args.design)
    design, _ = problem.random_design()
    return design


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_check(args) -> int:
    problem = _problem(args)
    conds = _pairs(args.cond, "--cond", _float)
    design = load_design(args.design) if args.design else None
    found = problem.check_constraints(design, conds)
    for v in found:
        print(v.message, file=sys.stderr)
    errors = sum(v.is_error for v in found)
    _emit({"problem": problem.problem_id, "violations": [v.message for v in found], "errors": errors,
           "warnings": len(found) - errors})
    return EXIT_CONSTRAINT if errors else EXIT_OK


def cmd_simulate(args) -> int:
    problem = _problem(args)
    conds = problem.merge_conditions(_pairs(args.cond, "--cond", _float))
    design = _design(args, problem)
    values = problem.simulate(design, conds, strict=args.strict)
    _emit({"problem": problem.problem_id, "seed": args.seed, "conditions": conds,
           "objectives": dict(zip(problem.objectives_keys, map(float, values)))})
    return EXIT_OK


def cmd_optimize(args) -> int:
    problem = _problem(args)
    conds = problem.merge_conditions(_pairs(args.cond, "--cond", _float))
    start = load_design(args.design) if args.design else None
    options = _pairs(args.opt, "--opt")
    design, history = problem.optimize(start, conds, strict=args.strict, **options)
    os.makedirs(args.out, exist_ok=True)
    stem = datagen.dataset_stem(problem.problem_id)
    summary = {"problem": problem.problem_id, "seed": args.seed, "conditions": conds,
               "iterations": history.iterations, "converged": history.converged}
    if "pareto_front" in history.extra:
        names = problem.objectives_keys
        path = os.path.join(args.out, stem + ".pareto.jsonl")
        with open(path, "w", encoding="utf-8") as fh:
            for x, f in zip(design, history.extra["pareto_front"]):
                fh.write(datagen._json({"design": list(np.ravel(x)), "objectives": dict(zip(names, f))}) + "\n")
        summary.update(pareto_size=len(design), pareto_file=os.path.basename(path))
    else:
        path = os.path.join(args.out, stem + ".design.json")
        save_design(design, path)
        values = problem.simulate(design, conds)
        summary.update(design_file=os.path.basename(path),
                       objectives=dict(zip(problem.objectives_keys, map(float, values))))
    hist_path = os.path.join(args.out, stem + ".history.jsonl")
    with open(hist_path, "w", encoding="utf-8") as fh:
        for i, row in enumerate(history.objective_values):
            extra = {k: v[i] for k, v in history.extra.items() if len(v) == history.iterations}
            fh.write(datagen._json({"iteration": i, "objectives": list(row), **extra}) + "\n")
    summary["history_file"] = os.path.basename(hist_path)
    _emit(summary)
    return EXIT_OK


def _dimension(spec: str) -> datagen.Dimension:
    # NAME=lo:hi:n  or  NAME=v1,v2,...
    name, _, body = spec.partition("=")
    if not body:
        raise UsageError(f"bad --grid entry {spec!r}; use NAME=lo:hi:n or NAME=v1,v2")
    try:
        if ":" in body:
            lo, hi, n = body.split(":")
            return datagen.Dimension(name, float(lo), float(hi), n_levels=int(n))
        levels = tuple(float(v) for v in body.split(","))
    except ValueError:
        raise UsageError(f"bad --grid entry {spec!r}") from None
    return datagen.Dimension(name, min(levels), max(levels), levels=levels)


def _plan(args) -> datagen.SamplingPlan:
    if args.plan:
        with open(args.plan, encoding="utf-8") as fh:
            raw = json.load(fh)
        dims = [datagen.Dimension(**{k: v for k, v in d.items() if v is not None}) for d in raw["dims"]]
        return datagen.SamplingPlan(raw["kind"], dims, raw.get("count", 0), raw.get("seed", args.seed))
    if not args.grid:
        raise UsageError("generate needs --plan FILE or at least one --grid entry")
    return datagen.SamplingPlan(args.kind, [_dimension(g) for g in args.grid], args.count, args.seed)


def cmd_generate(args) -> int:
    problem = _problem(args)
    holdout = None
    if args.holdout:
        holdout = {}
        for name, values in _pairs(args.holdout, "--holdout", str).items():
            holdout[name] = [float(v) for v in values.split(",")]
    opts = datagen.GenerateOptions(mode=args.mode, holdout=holdout, split_seed=args.seed,
                                   optimize_options=_pairs(args.opt, "--opt"))
    manifest = datagen.generate(problem, _plan(args), args.parallelism, args.out, opts)
    _emit(manifest)
    return EXIT_OK


def _stats(values) -> dict:
    a = np.asarray(values, dtype=float)
    return {"mean": float(a.mean()), "std": float(a.std()), "n": int(a.size)}


def _load_set(path: str):
    if path.endswith(".jsonl"):
        return datagen.read_jsonl(path)
    arr = np.load(path) if path.endswith(".npy") else np.asarray(json.load(open(path, encoding="utf-8")), float)
    return [datagen.DatasetRecord(i, {}, np.asarray(x, float), None) for i, x in enumerate(arr)]


METRICS = ("mmd2", "mmd2_test", "dpp", "rvc", "rf", "cog")


def cmd_evaluate(args) -> int:
    problem = _problem(args)
    reference = _load_set(args.dataset)
    generated = _load_set(args.generated) if args.generated else reference
    ref_designs = [r.design for r in reference if r.design is not None]
    gen_ok = [r for r in generated if r.design is not None]
    gen_designs = [r.design for r in gen_ok]
    out = {}
    for name in args.metric or ["mmd2"]:
        if name == "mmd2":
            out[name] = _stats([metrics.mmd2(ref_designs, gen_designs, unbiased=args.unbiased)])
        elif name == "mmd2_test":
            res = metrics.mmd2_permutation_test(ref_designs, gen_designs, n_perms=args.n_perms, seed=args.seed,
                                                 unbiased=args.unbiased)
            out[name] = {**_stats([res.statistic]), "p_value": res.p_value}
        elif name == "dpp":
            out[name] = _stats([metrics.dpp_diversity(gen_designs).det])
        elif name == "rvc":
            conds = [r.conditions or None for r in gen_ok]
            flags = [metrics.violates_theory(problem, d, c) for d, c in zip(gen_designs, conds)]
            out[name] = _stats(flags)
        elif name == "rf":
            out[name] = _stats([r.failed for r in generated])
        elif name == "cog":
            sign = problem.objectives[0][1]
            gaps = [metrics.cog([row[0] for row in r.history], r.objectives[problem.objectives_keys[0]], sign)
                    for r in generated if r.history and r.objectives]
            if not gaps:
                raise UsageError("cog needs records with optimization histories")
            out[name] = _stats(gaps)
        else:
            raise UsageError(f"unknown metric {name!r}; choose from {METRICS}")
    _emit(out)
    return EXIT_OK


def cmd_render(args) -> int:
    problem = _problem(args)
    design = _design(args, problem)
    if args.fields:
        if not hasattr(problem, "render_fields"):
            raise UsageError(f"{problem.problem_id} has no field render")
        data = problem.render_fields(design, _pairs(args.cond, "--cond", _float), args.format)
    else:
        data = problem.render(design, args.format)
    out = args.out if args.out.endswith("." + args.format) else os.path.join(args.out, "design." + args.format)
    os.makedirs(os.path.dirname(out) or ".", exist_ok=True)
    with open(out, "wb") as fh:
        fh.write(data)
    _emit({"problem": problem.problem_id, "file": out, "bytes": len(data)})
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--problem", required=True, help="registered id, e.g. beams2d/v0")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--cond", action="append", metavar="NAME=VAL", help="condition override (repeatable)")
    common.add_argument("--config", action="append", metavar="KEY=VAL", help="problem configuration, e.g. nelx=40")
    common.add_argument("--out", default=".")
    common.add_argument("--strict", action="store_true", help="refuse to run when a constraint error is found")
    common.add_argument("--parallelism", type=int, default=1)
    common.add_argument("--design", help="design file (.npy or .json); random design when omitted")

    parser = argparse.ArgumentParser(prog="designbench", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("check", parents=[common], help="list constraint findings").set_defaults(func=cmd_check)
    sub.add_parser("simulate", parents=[common], help="objectives of one design").set_defaults(func=cmd_simulate)
    p = sub.add_parser("optimize", parents=[common], help="run the built-in optimizer")
    p.add_argument("--opt", action="append", metavar="KEY=VAL", help="optimizer option, e.g. max_iter=50")
    p.set_defaults(func=cmd_optimize)
    p = sub.add_parser("generate", parents=[common], help="build a dataset from a sampling plan")
    p.add_argument("--plan", help="JSON plan file")
    p.add_argument("--grid", action="append", metavar="NAME=lo:hi:n|v1,v2", help="plan dimension (repeatable)")
    p.add_argument("--kind", default="Grid", choices=[k.value for k in datagen.PlanKind])
    p.add_argument("--count", type=int, default=0)
    p.add_argument("--mode", default="auto", choices=["auto", "optimize", "simulate"])
    p.add_argument("--holdout", action="append", metavar="NAME=v1,v2", help="condition values kept out of train")
    p.add_argument("--opt", action="append", metavar="KEY=VAL")
    p.set_defaults(func=cmd_generate)
    p = sub.add_parser("evaluate", parents=[common], help="metrics of a generated set against a dataset")
    p.add_argument("--dataset", required=True, help="reference .jsonl")
    p.add_argument("--generated", help=".jsonl, .npy or .json designs (defaults to the dataset)")
    p.add_argument("--metric", action="append", choices=METRICS)
    p.add_argument("--n-perms", type=int, default=1000)
    # the V-statistic is non-negative and exactly 0 for identical sets
    p.add_argument("--unbiased", action="store_true", help="U-statistic MMD^2 instead of the V-statistic")
    p.set_defaults(func=cmd_evaluate)
    p = sub.add_parser("render", parents=[common], help="write a PGM/SVG picture of a design")
    p.add_argument("--format", default="pgm", choices=["pgm", "svg"])
    p.add_argument("--fields", action="store_true", help="field panels (photonics)")
    p.set_defaults(func=cmd_render)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except RegistryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REGISTRY
    except ConstraintError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONSTRAINT
    except SimulationError as exc:
        print(f"simulation failed: {exc}", file=sys.stderr)
        return EXIT_SIMULATION
    except DatasetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SIMULATION
    except (UsageError, UnknownConditionError, ValueError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
