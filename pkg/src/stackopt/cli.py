"""Command-line entry point: ``stackopt {evaluate,optimize,tipping,sweep,hv}``."""

from __future__ import annotations

import argparse
import logging
import secrets
import shutil
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from . import reports
from .config import LoadedScenario, load_scenario
from .errors import DegenerateDenominator, ScenarioFileError, StackoptError
from .labor import (
    PHASES,
    AutomationVector,
    ScenarioParams,
    baseline_cost,
    baseline_labor,
    baseline_load_per_person,
    collapsed_labor,
    effective_base,
    naive_heuristic_cost,
    quality_ratio,
    tipping,
    tipping_from_fraction,
    uniform_model_cost,
)
from .metrics import NormalizedPoint, hypervolume_2d, normalize_front, relative_gap, summarize
from .nsga import OptimizerConfig, RunReport, run
from .sweep import SweepMode, SweepSpec, flatten, run_sweep

log = logging.getLogger("stackopt")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_RUNTIME = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def _u64(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _fraction(text: str) -> float:
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"fraction must lie in [0, 1], got {text}")
    return value


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text: str) -> list[int]:
    return [_u64(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", type=Path, help="scenario JSON (default: bundled reference scenario)")
    common.add_argument("--format", choices=("json", "table"), default="json")
    common.add_argument("--out", type=Path, help="output directory")
    common.add_argument("--seed", type=_u64, help="base seed; drawn at random and printed when omitted")
    common.add_argument("--runs", type=int, default=1, help="number of independent runs")

    vector = _Parser(add_help=False)
    for phase in PHASES:
        vector.add_argument(f"--f-{phase.short}", type=_fraction, metavar="F", help=f"{phase.value} automation fraction")

    parser = _Parser(prog="stackopt", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("evaluate", parents=[common, vector], help="labor breakdown for one automation vector")

    p = sub.add_parser("optimize", parents=[common], help="seeded NSGA-II runs")
    p.add_argument("--jobs", type=int, default=1, help="runs executed in parallel")
    p.add_argument("--heuristic-fraction", type=_fraction, default=0.3, help="uniform fraction for baselines")

    p = sub.add_parser("tipping", parents=[common, vector], help="headcount reduction analysis")
    p.add_argument("--fraction", type=float, help="overall automation fraction (skips the labor model)")
    p.add_argument("--team-size", type=int, help="override the scenario team size")

    p = sub.add_parser("sweep", parents=[common], help="oversight/coordination sensitivity grid")
    p.add_argument("--beta-grid", type=_float_list)
    p.add_argument("--alpha-grid", type=_float_list)
    p.add_argument("--mode", choices=[m.value for m in SweepMode])
    p.add_argument("--seeds", type=_int_list, help="seeds for reoptimize mode")

    p = sub.add_parser("hv", parents=[common], help="normalized hypervolume of a front CSV")
    p.add_argument("front", type=Path)
    p.add_argument("--ref", type=_float_list, default=[1.1, 1.0], help="reference point u,v")
    p.add_argument("--c-base", type=float, help="baseline cost (default: from the scenario)")
    return parser


def _vector_from_args(args: argparse.Namespace) -> AutomationVector | None:
    given = {p: getattr(args, f"f_{p.short}") for p in PHASES}
    if all(v is None for v in given.values()):
        return None
    return AutomationVector(tuple(given[p] or 0.0 for p in PHASES))


def _emit(payload: dict, fmt: str) -> None:
    if fmt == "json":
        sys.stdout.write(reports.dumps(payload))
        return
    rows = list(_flatten_rows(payload))
    width = max((len(k) for k, _ in rows), default=0)
    for key, value in rows:
        sys.stdout.write(f"{key:<{width}}  {value}\n")


def _flatten_rows(payload: dict, prefix: str = ""):
    for key, value in payload.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            yield from _flatten_rows(value, name + ".")
        elif isinstance(value, float):
            yield name, f"{value:,.4f}"
        else:
            yield name, value


def cmd_evaluate(scenario: LoadedScenario, args: argparse.Namespace) -> int:
    params = scenario.params
    f = _vector_from_args(args) or AutomationVector.uniform(0.0)
    _emit(evaluation_payload(params, f), args.format)
    return EXIT_OK


def evaluation_payload(params: ScenarioParams, f: AutomationVector) -> dict:
    breakdown = collapsed_labor(params, f)
    try:
        quality = quality_ratio(params, f, breakdown)
    except DegenerateDenominator:
        quality = None
    return {
        "automation": f.as_dict(),
        "baseline": {
            "labor_hours": baseline_labor(params),
            "effective_hours": effective_base(params),
            "cost": baseline_cost(params),
            "per_person_load": baseline_load_per_person(params),
        },
        "breakdown": reports.breakdown_to_dict(breakdown),
        "quality_ratio": quality,
        "tipping": reports.tipping_to_dict(tipping(params, breakdown)),
    }


def cmd_tipping(scenario: LoadedScenario, args: argparse.Namespace) -> int:
    params = scenario.params
    if args.team_size is not None:
        params = replace(params, team_size=args.team_size)
    vector = _vector_from_args(args)
    if vector is not None and args.fraction is not None:
        raise UsageError("give either per-phase --f-* flags or --fraction, not both")
    if args.fraction is not None:
        report = tipping_from_fraction(args.fraction, params.team_size, effective_base(params))
    else:
        vector = vector or AutomationVector.uniform(0.0)
        report = tipping(params, collapsed_labor(params, vector))
    _emit(reports.tipping_to_dict(report), args.format)
    return EXIT_OK


def _resolve_seed(args: argparse.Namespace, config: OptimizerConfig) -> int:
    if args.seed is not None:
        return args.seed
    if config.seed is not None:
        return config.seed
    seed = secrets.randbits(64)
    print(f"seed: {seed}", file=sys.stderr)
    return seed


def _one_run(params: ScenarioParams, config: OptimizerConfig, digest: str) -> RunReport:
    return replace(run(params, config), digest=digest)


def optimize_runs(scenario: LoadedScenario, base_seed: int, runs: int, jobs: int = 1) -> list[RunReport]:
    configs = [replace(scenario.optimizer, seed=(base_seed + k) % 2**64) for k in range(runs)]
    if jobs <= 1 or runs == 1:
        return [_one_run(scenario.params, c, scenario.digest) for c in configs]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(_one_run, scenario.params, c, scenario.digest) for c in configs]
        return [f.result() for f in futures]


def summary_payload(scenario: LoadedScenario, results: Sequence[RunReport], heuristic_fraction: float) -> dict:
    params = scenario.params
    bests = [r.best for r in results if r.best is not None]
    costs = [b.objectives.cost for b in bests]
    naive = naive_heuristic_cost(params, heuristic_fraction)
    uniform = uniform_model_cost(params, heuristic_fraction)
    ec_mean = summarize(costs).mean if costs else None
    return {
        "digest": scenario.digest,
        "runs": len(results),
        "seeds": [r.seed for r in results],
        "feasible_runs": len(bests),
        "baseline_cost": baseline_cost(params),
        "best_cost": summarize(costs).as_dict() if costs else None,
        "hv": summarize([r.hv for r in results]).as_dict(),
        "team_size": summarize([b.genome.team_size for b in bests]).as_dict() if bests else None,
        "heuristics": {
            "fraction": heuristic_fraction,
            "naive_uniform_cost": naive,
            "uniform_model_cost": uniform,
            "ec_mean_cost": ec_mean,
            "gap_vs_naive": relative_gap(naive, ec_mean) if ec_mean is not None and naive > 0 else None,
            "gap_vs_uniform_model": relative_gap(uniform, ec_mean) if ec_mean is not None and uniform > 0 else None,
        },
    }


def _require_out(args: argparse.Namespace) -> Path:
    if args.out is None:
        raise UsageError("--out DIR is required")
    return args.out


def _publish(staging: Path, out: Path) -> None:
    for item in sorted(staging.iterdir()):
        item.replace(out / item.name)


def cmd_optimize(scenario: LoadedScenario, args: argparse.Namespace) -> int:
    if args.runs < 1:
        raise UsageError("--runs must be >= 1")
    out = _require_out(args)
    seed = _resolve_seed(args, scenario.optimizer)
    out.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=".staging-", dir=out))
    try:
        results = optimize_runs(scenario, seed, args.runs, args.jobs)
        for k, result in enumerate(results):
            (staging / f"run_{k}.json").write_text(reports.serialize_run_report(result), encoding="utf-8")
            (staging / f"front_{k}.csv").write_text(reports.front_csv(result.front), encoding="utf-8")
            log.info("run %d seed %d best %s hv %.4f", k, result.seed,
                     None if result.best is None else result.best.objectives.cost, result.hv)
        summary = summary_payload(scenario, results, args.heuristic_fraction)
        (staging / "summary.json").write_text(reports.dumps(summary), encoding="utf-8")
        _publish(staging, out)
    finally:
        shutil.rmtree(staging, ignore_errors=True)
    if args.format == "table":
        _emit({k: v for k, v in summary.items() if k not in ("seeds",)}, "table")
    return EXIT_OK


def resolve_sweep_spec(scenario: LoadedScenario, args: argparse.Namespace) -> SweepSpec:
    spec = scenario.sweep or SweepSpec()
    changes = {}
    if args.beta_grid is not None:
        changes["beta_grid"] = tuple(args.beta_grid)
    if args.alpha_grid is not None:
        changes["alpha_grid"] = tuple(args.alpha_grid)
    if args.mode is not None:
        changes["mode"] = SweepMode(args.mode)
    mode = changes.get("mode", spec.mode)
    if mode is SweepMode.REOPTIMIZE:
        changes["optimizer"] = spec.optimizer or scenario.optimizer
        if args.seeds is not None:
            changes["seeds"] = tuple(args.seeds)
        elif not spec.seeds:
            base = _resolve_seed(args, scenario.optimizer)
            changes["seeds"] = tuple((base + k) % 2**64 for k in range(max(args.runs, 1)))
    return replace(spec, **changes)


def cmd_sweep(scenario: LoadedScenario, args: argparse.Namespace) -> int:
    out = _require_out(args)
    spec = resolve_sweep_spec(scenario, args)
    cells = flatten(run_sweep(scenario.params, spec))
    out.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=".staging-", dir=out))
    try:
        (staging / "sweep.csv").write_text(reports.sweep_csv(cells), encoding="utf-8")
        _publish(staging, out)
    finally:
        shutil.rmtree(staging, ignore_errors=True)
    if args.format == "table":
        sys.stdout.write(reports.sweep_csv(cells))
    return EXIT_OK


def cmd_hv(scenario: LoadedScenario, args: argparse.Namespace) -> int:
    if len(args.ref) != 2:
        raise UsageError("--ref takes exactly two numbers u,v")
    c_base = args.c_base if args.c_base is not None else baseline_cost(scenario.params)
    points = normalize_front(reports.read_front_points(args.front), c_base)
    value = hypervolume_2d(points, NormalizedPoint(*args.ref))
    if args.format == "json":
        sys.stdout.write(reports.dumps({"hv": value, "points": len(points), "ref": list(args.ref)}))
    else:
        print(f"{value:.6f}")
    return EXIT_OK


COMMANDS = {
    "evaluate": cmd_evaluate,
    "optimize": cmd_optimize,
    "tipping": cmd_tipping,
    "sweep": cmd_sweep,
    "hv": cmd_hv,
}


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        scenario = load_scenario(args.config)
        return COMMANDS[args.command](scenario, args)
    except (UsageError, ScenarioFileError) as exc:
        print(f"stackopt: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except StackoptError as exc:
        # model/config errors surfaced from flags (e.g. an invalid team size)
        print(f"stackopt: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001
        log.debug("runtime failure", exc_info=True)
        print(f"stackopt: runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
