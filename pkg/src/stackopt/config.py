"""Scenario file loading and validation.

A scenario file is a JSON object with four sections::

    {
      "scenario":  {"phase_hours": {...}, "coord_hours": 500, "team_size": 20,
                    "capacity_hours": 135, "cost_rate": 75, "stated_base_hours": 2700},
      "model":     {"oversight_factor": 0.2, "coord_retention": 0.4, "ai_time_factor": {...}},
      "optimizer": {"population_size": 50, "generations": 100, ...},
      "sweep":     {"beta_grid": [...], "alpha_grid": [...], "mode": "fixed_vector", ...}
    }

``scenario`` is required; everything else falls back to defaults. Unknown
keys are rejected, and every error names the offending field path.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Iterator

from .errors import ConfigInvalid, InvalidParameter, IoError, ParseError, ValidationError
from .labor import PHASES, AutomationVector, Phase, ScenarioParams
from .nsga import OptimizerConfig, ViolationScales
from .sweep import AGGRESSIVE_VECTOR, DEFAULT_ALPHA_GRID, DEFAULT_BETA_GRID, SweepMode, SweepSpec

_SECTIONS = {"scenario", "model", "optimizer", "sweep"}
_SCENARIO_KEYS = {"phase_hours", "coord_hours", "team_size", "capacity_hours", "cost_rate", "stated_base_hours"}
_MODEL_KEYS = {"oversight_factor", "coord_retention", "ai_time_factor"}
_OPTIMIZER_KEYS = {
    "population_size",
    "generations",
    "crossover_prob",
    "mutation_sigma",
    "real_mutation_prob",
    "int_perturb_prob",
    "team_min",
    "team_max",
    "fixed_phases",
    "seed",
    "quality_floor",
    "violation_scales",
}
_SWEEP_KEYS = {"beta_grid", "alpha_grid", "mode", "vector", "seeds"}
_SCALE_KEYS = {"capacity", "quality", "tipping"}

_MISSING = object()


@dataclass(frozen=True)
class LoadedScenario:
    params: ScenarioParams
    optimizer: OptimizerConfig
    sweep: SweepSpec | None
    digest: str

    def __iter__(self) -> Iterator[Any]:
        return iter((self.params, self.optimizer, self.sweep))


def bundled_scenario_path() -> Path:
    return Path(str(resources.files("stackopt") / "data" / "reference.json"))


def load_scenario(path: str | Path | None = None) -> LoadedScenario:
    """Read, validate and resolve a scenario file (the bundled ``reference.json`` when ``path`` is None)."""
    path = Path(path) if path is not None else bundled_scenario_path()
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc.strerror or exc}") from exc
    return parse_scenario(text, source=str(path))


def parse_scenario(text: str, source: str = "<input>") -> LoadedScenario:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, source, exc.lineno, exc.colno) from None
    return resolve(data)


def resolve(data: Any) -> LoadedScenario:
    root = _obj(data, "$")
    _reject_unknown(root, _SECTIONS, "$")
    if "scenario" not in root:
        raise ValidationError("scenario", "section is required")

    scen = _obj(root["scenario"], "scenario")
    _reject_unknown(scen, _SCENARIO_KEYS, "scenario")
    model = _obj(root.get("model", {}), "model")
    _reject_unknown(model, _MODEL_KEYS, "model")

    phase_hours = _phase_numbers(scen, "phase_hours", "scenario", required=True, default=None, lo=0.0)
    ai_factor = _phase_numbers(model, "ai_time_factor", "model", required=False, default=1.0, lo=0.0, lo_open=True)
    stated = _number(scen, "stated_base_hours", "scenario", default=None, lo=0.0, lo_open=True, nullable=True)
    params = _build(
        "scenario",
        ScenarioParams,
        phase_hours=phase_hours,
        coord_hours=_number(scen, "coord_hours", "scenario", lo=0.0),
        team_size=_integer(scen, "team_size", "scenario", lo=1),
        capacity_hours=_number(scen, "capacity_hours", "scenario", lo=0.0, lo_open=True),
        cost_rate=_number(scen, "cost_rate", "scenario", lo=0.0),
        oversight_factor=_number(model, "oversight_factor", "model", default=0.2, lo=0.0, hi=1.0),
        coord_retention=_number(model, "coord_retention", "model", default=0.4, lo=0.0, hi=1.0),
        ai_time_factor=ai_factor,
        stated_base_hours=stated,
    )

    optimizer = _optimizer(_obj(root.get("optimizer", {}), "optimizer"))
    sweep = None
    if "sweep" in root:
        sweep = _sweep(_obj(root["sweep"], "sweep"), optimizer)

    return LoadedScenario(params, optimizer, sweep, digest(params, optimizer, sweep))


def _optimizer(sec: dict) -> OptimizerConfig:
    p = "optimizer"
    _reject_unknown(sec, _OPTIMIZER_KEYS, p)
    defaults = OptimizerConfig()
    fixed_raw = _obj(sec.get("fixed_phases", {}), f"{p}.fixed_phases")
    fixed = {}
    for key in fixed_raw:
        phase = _phase_key(key, f"{p}.fixed_phases")
        fixed[phase] = _number(fixed_raw, key, f"{p}.fixed_phases", lo=0.0, hi=1.0, nullable=True)
    scales_raw = _obj(sec.get("violation_scales", {}), f"{p}.violation_scales")
    _reject_unknown(scales_raw, _SCALE_KEYS, f"{p}.violation_scales")
    ds = defaults.violation_scales
    scales = ViolationScales(
        *(
            _number(scales_raw, k, f"{p}.violation_scales", default=getattr(ds, k), lo=0.0, lo_open=True)
            for k in ("capacity", "quality", "tipping")
        )
    )
    return _build(
        p,
        OptimizerConfig,
        population_size=_integer(sec, "population_size", p, default=defaults.population_size, lo=4),
        generations=_integer(sec, "generations", p, default=defaults.generations, lo=1),
        crossover_prob=_number(sec, "crossover_prob", p, default=defaults.crossover_prob, lo=0.0, hi=1.0),
        mutation_sigma=_number(sec, "mutation_sigma", p, default=defaults.mutation_sigma, lo=0.0, lo_open=True),
        real_mutation_prob=_number(sec, "real_mutation_prob", p, default=defaults.real_mutation_prob, lo=0.0, hi=1.0),
        int_perturb_prob=_number(sec, "int_perturb_prob", p, default=defaults.int_perturb_prob, lo=0.0, hi=1.0),
        team_min=_integer(sec, "team_min", p, default=defaults.team_min, lo=1),
        team_max=_integer(sec, "team_max", p, default=defaults.team_max, lo=1),
        fixed_phases=fixed,
        seed=_integer(sec, "seed", p, default=None, lo=0, hi=2**64 - 1, nullable=True),
        quality_floor=_number(sec, "quality_floor", p, default=defaults.quality_floor, lo=0.0, nullable=True),
        violation_scales=scales,
    )


def _sweep(sec: dict, optimizer: OptimizerConfig) -> SweepSpec:
    p = "sweep"
    _reject_unknown(sec, _SWEEP_KEYS, p)
    mode_raw = sec.get("mode", SweepMode.FIXED_VECTOR.value)
    try:
        mode = SweepMode(mode_raw)
    except ValueError:
        raise ValidationError(f"{p}.mode", f"must be one of {[m.value for m in SweepMode]}, got {mode_raw!r}") from None
    vector = AGGRESSIVE_VECTOR
    if "vector" in sec:
        vector = AutomationVector.from_mapping(
            _phase_numbers(sec, "vector", p, required=True, default=None, lo=0.0, hi=1.0)
        )
    seeds = [
        _integer({"v": s}, "v", f"{p}.seeds[{i}]", lo=0, hi=2**64 - 1)
        for i, s in enumerate(_array(sec.get("seeds", []), f"{p}.seeds"))
    ]
    return _build(
        p,
        SweepSpec,
        beta_grid=_grid(sec, "beta_grid", DEFAULT_BETA_GRID),
        alpha_grid=_grid(sec, "alpha_grid", DEFAULT_ALPHA_GRID),
        mode=mode,
        vector=vector,
        optimizer=optimizer if mode is SweepMode.REOPTIMIZE else None,
        seeds=tuple(seeds),
    )


def _grid(sec: dict, key: str, default: tuple[float, ...]) -> tuple[float, ...]:
    if key not in sec:
        return default
    values = _array(sec[key], f"sweep.{key}")
    return tuple(_number({"v": v}, "v", f"sweep.{key}[{i}]", lo=0.0, hi=1.0) for i, v in enumerate(values))


def resolved_dict(params: ScenarioParams, optimizer: OptimizerConfig, sweep: SweepSpec | None) -> dict:
    """Canonical, fully-defaulted form of a scenario (the digest input)."""
    out = {
        "scenario": {
            "phase_hours": {p.value: params.phase_hours[p] for p in PHASES},
            "coord_hours": params.coord_hours,
            "team_size": params.team_size,
            "capacity_hours": params.capacity_hours,
            "cost_rate": params.cost_rate,
            "stated_base_hours": params.stated_base_hours,
        },
        "model": {
            "oversight_factor": params.oversight_factor,
            "coord_retention": params.coord_retention,
            "ai_time_factor": {p.value: params.ai_time_factor[p] for p in PHASES},
        },
        "optimizer": {
            "population_size": optimizer.population_size,
            "generations": optimizer.generations,
            "crossover_prob": optimizer.crossover_prob,
            "mutation_sigma": optimizer.mutation_sigma,
            "real_mutation_prob": optimizer.real_mutation_prob,
            "int_perturb_prob": optimizer.int_perturb_prob,
            "team_min": optimizer.team_min,
            "team_max": optimizer.team_max,
            "fixed_phases": {p.value: v for p, v in optimizer.fixed_phases.items()},
            "seed": optimizer.seed,
            "quality_floor": optimizer.quality_floor,
            "violation_scales": {
                "capacity": optimizer.violation_scales.capacity,
                "quality": optimizer.violation_scales.quality,
                "tipping": optimizer.violation_scales.tipping,
            },
        },
    }
    if sweep is not None:
        out["sweep"] = {
            "beta_grid": list(sweep.beta_grid),
            "alpha_grid": list(sweep.alpha_grid),
            "mode": sweep.mode.value,
            "vector": sweep.vector.as_dict() if sweep.vector is not None else None,
            "seeds": list(sweep.seeds),
        }
    return out


def digest(params: ScenarioParams, optimizer: OptimizerConfig, sweep: SweepSpec | None) -> str:
    canonical = json.dumps(resolved_dict(params, optimizer, sweep), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


# --- field helpers ---------------------------------------------------------


def _build(path: str, cls, **kwargs):
    try:
        return cls(**kwargs)
    except (InvalidParameter, ConfigInvalid) as exc:
        raise ValidationError(path, str(exc)) from None


def _obj(value: Any, path: str) -> dict:
    if not isinstance(value, dict):
        raise ValidationError(path, f"expected an object, got {type(value).__name__}")
    return value


def _array(value: Any, path: str) -> list:
    if not isinstance(value, list):
        raise ValidationError(path, f"expected an array, got {type(value).__name__}")
    return value


def _reject_unknown(sec: dict, allowed: set[str], path: str) -> None:
    for key in sec:
        if key not in allowed:
            where = key if path == "$" else f"{path}.{key}"
            raise ValidationError(where, "unknown key")


def _phase_key(key: str, path: str) -> Phase:
    try:
        return Phase(key)
    except ValueError:
        raise ValidationError(f"{path}.{key}", f"unknown phase; expected one of {[p.value for p in PHASES]}") from None


def _number(
    sec: dict,
    key: str,
    path: str,
    default: Any = _MISSING,
    lo: float | None = None,
    hi: float | None = None,
    lo_open: bool = False,
    nullable: bool = False,
) -> float | None:
    where = path if key == "v" else f"{path}.{key}"
    if key not in sec:
        if default is _MISSING:
            raise ValidationError(where, "required field is missing")
        return default
    value = sec[key]
    if value is None and nullable:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ValidationError(where, f"expected a finite number, got {value!r}")
    value = float(value)
    if lo is not None and (value < lo or (lo_open and value == lo)):
        op = ">" if lo_open else ">="
        raise ValidationError(where, f"must be {op} {lo}, got {value}")
    if hi is not None and value > hi:
        raise ValidationError(where, f"must be <= {hi}, got {value}")
    return value


def _integer(
    sec: dict,
    key: str,
    path: str,
    default: Any = _MISSING,
    lo: int | None = None,
    hi: int | None = None,
    nullable: bool = False,
) -> int | None:
    where = path if key == "v" else f"{path}.{key}"
    if key not in sec:
        if default is _MISSING:
            raise ValidationError(where, "required field is missing")
        return default
    value = sec[key]
    if value is None and nullable:
        return None
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(where, f"expected an integer, got {value!r}")
    if lo is not None and value < lo:
        raise ValidationError(where, f"must be >= {lo}, got {value}")
    if hi is not None and value > hi:
        raise ValidationError(where, f"must be <= {hi}, got {value}")
    return value


def _phase_numbers(
    sec: dict,
    key: str,
    path: str,
    required: bool,
    default: float | None,
    lo: float | None = None,
    hi: float | None = None,
    lo_open: bool = False,
) -> dict[Phase, float]:
    where = f"{path}.{key}"
    if key not in sec:
        if required:
            raise ValidationError(where, "required field is missing")
        return {p: default for p in PHASES}
    raw = _obj(sec[key], where)
    out = {}
    for name in raw:
        phase = _phase_key(name, where)
        out[phase] = _number(raw, name, where, lo=lo, hi=hi, lo_open=lo_open)
    for phase in PHASES:
        if phase not in out:
            if default is None:
                raise ValidationError(f"{where}.{phase.value}", "required field is missing")
            out[phase] = default
    return out
