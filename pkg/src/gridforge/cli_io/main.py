"""The ``gridforge`` command line."""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path
from typing import List, Optional

from ..algorithms import ALGORITHMS, evaluate_design, run_algorithm
from ..formulation import apply_chance_relaxation, build_master
from ..grid_model import enumerate_cycles
from ..milp import SolveParams, export_mps
from ..scenario import DEFAULT_SCENARIO_COUNT, DamageModel, sample_scenarios
from .serialization import (
    ParseError, load_design, load_instance, load_scenarios, save_instance, save_results,
    save_scenarios,
)
from .sweep import SweepSpec, run_sweep, sweep_csv
from .synthetic import PROFILES, generate_synthetic

SWEEP_PARAMS = {"lambda": "lambda", "epsilon": "epsilon", "damage": "per_mile_probability"}


def _grid(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must be comma-separated numbers, got {text!r}") from None


def _params(args) -> SolveParams:
    if args.time_limit is None:
        return SolveParams()
    return SolveParams(time_limit_seconds=args.time_limit)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gridforge", description="Resilient distribution grid design.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic multi-feeder instance")
    g.add_argument("--profile", choices=sorted(PROFILES), required=True)
    g.add_argument("--feeders", type=int, required=True)
    g.add_argument("--buses-per-feeder", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--output", required=True)

    s = sub.add_parser("scenarios", help="sample damage scenarios for an instance")
    s.add_argument("--per-mile", type=float, required=True)
    s.add_argument("--hardened-ratio", type=float, default=0.0)
    s.add_argument("--count", type=int, default=DEFAULT_SCENARIO_COUNT)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("-i", "--instance", required=True)
    s.add_argument("-o", "--output", required=True)

    v = sub.add_parser("solve", help="design upgrades for an instance and scenario set")
    v.add_argument("--algorithm", choices=ALGORITHMS, required=True)
    v.add_argument("--epsilon", type=float, default=None)
    v.add_argument("--lambda", dest="lam", type=float, default=None)
    v.add_argument("--gamma", type=float, default=None)
    v.add_argument("--time-limit", type=float, default=None)
    v.add_argument("--record-time", action="store_true",
                   help="add CPU seconds to the outputs (they are then not byte-reproducible)")
    v.add_argument("-i", "--instance", required=True)
    v.add_argument("-s", "--scenarios", required=True)
    v.add_argument("-o", "--output", required=True)

    e = sub.add_parser("evaluate", help="price a design on every scenario")
    e.add_argument("-i", "--instance", required=True)
    e.add_argument("-s", "--scenarios", required=True)
    e.add_argument("-d", "--design", required=True)

    w = sub.add_parser("sweep", help="solve across a parameter grid and write CSV")
    w.add_argument("--param", choices=sorted(SWEEP_PARAMS), required=True)
    w.add_argument("--grid", type=_grid, required=True)
    w.add_argument("--algorithm", choices=ALGORITHMS, required=True)
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--count", type=int, default=None, help="scenario count for damage sweeps")
    w.add_argument("--hardened-ratio", type=float, default=None)
    w.add_argument("--time-limit", type=float, default=None)
    w.add_argument("--record-time", action="store_true")
    w.add_argument("-i", "--instance", required=True)
    w.add_argument("-s", "--scenarios", default=None)
    w.add_argument("-o", "--output", required=True)

    m = sub.add_parser("export-mps", help="write the extensive model in MPS format")
    m.add_argument("--epsilon", type=float, default=None)
    m.add_argument("-i", "--instance", required=True)
    m.add_argument("-s", "--scenarios", required=True)
    m.add_argument("-o", "--output", required=True)
    return p


def _generate(args) -> int:
    inst = generate_synthetic(args.profile, args.feeders, args.buses_per_feeder, args.seed)
    save_instance(inst, args.output)
    return 0


def _scenarios(args) -> int:
    inst = load_instance(args.instance)
    scen = sample_scenarios(inst, DamageModel(args.per_mile, args.hardened_ratio, args.seed), args.count)
    save_scenarios(scen, args.output)
    return 0


def _solve(args) -> int:
    inst = load_instance(args.instance)
    scen = load_scenarios(args.scenarios, inst)
    if args.lam is not None or args.gamma is not None:
        inst = inst.with_fractions(args.lam, args.gamma)
    t0 = time.process_time()
    report = run_algorithm(args.algorithm, inst, scen, _params(args), epsilon=args.epsilon)
    cpu = time.process_time() - t0
    save_results(report, inst, args.output, cpu if args.record_time else None)
    print(f"{report.algorithm}: {report.status} objective={report.objective:g} "
          f"feasible={report.feasible}")
    return 0


def _evaluate(args) -> int:
    inst = load_instance(args.instance)
    scen = load_scenarios(args.scenarios, inst)
    design = load_design(args.design, inst)
    results = evaluate_design(inst, scen, design)
    doc = {
        "cost": design.cost(inst),
        "feasible": all(r.l_value == 0.0 for r in results),
        "pricing": [r.to_dict() for r in results],
    }
    print(json.dumps(doc, indent=2))
    return 0


def _sweep(args) -> int:
    inst = load_instance(args.instance)
    param = SWEEP_PARAMS[args.param]
    scen = load_scenarios(args.scenarios, inst) if args.scenarios else None
    if scen is None and param != "per_mile_probability":
        raise ParseError("scenarios", f"-s is required for {args.param} sweeps")
    src = scen.source_model if scen is not None else None
    count = args.count or (len(scen) if scen is not None else DEFAULT_SCENARIO_COUNT)
    ratio = args.hardened_ratio if args.hardened_ratio is not None else (src.hardened_rate_ratio if src else 0.0)
    spec = SweepSpec(param, args.grid, args.algorithm, args.seed, count, ratio)
    rows = run_sweep(inst, scen, spec, _params(args))
    Path(args.output).write_text(sweep_csv(rows, args.record_time))
    return 0


def _export(args) -> int:
    inst = load_instance(args.instance)
    scen = load_scenarios(args.scenarios, inst)
    model = build_master(inst, scen.scenarios, enumerate_cycles(inst))
    if args.epsilon:
        model = apply_chance_relaxation(model, args.epsilon, total_scenarios=len(scen))
    Path(args.output).write_text(export_mps(model))
    return 0


COMMANDS = {
    "generate": _generate, "scenarios": _scenarios, "solve": _solve, "evaluate": _evaluate,
    "sweep": _sweep, "export-mps": _export,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ValueError as exc:
        # ParseError and bad option values alike
        print(f"gridforge: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
