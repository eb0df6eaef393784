"""Command-line front end: run searches, build reports, dump ground truth.

Subcommands: ``search``, ``report``, ``truefront``, ``profiles list``.
Run configuration is a single JSON file; every run directory receives the
fully-resolved config echo so results can be reproduced bit for bit.
Exit codes: 0 success, 1 runtime failure, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import archspace, costmodel, engines, evaluator as evaluator_mod, pareto, reward as reward_mod
from .errors import ConfigError, ParetoNasError, SpaceTooLargeError

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
DEFAULT_OBJECTIVES = [["error_rate", "min"], ["energy_j", "min"]]
CONVENTIONS = {
    "flops": "2 x multiply-accumulates",
    "peak_power": "modeled as energy / latency",
    "activations": "4 bytes per element before the profile factor",
}

_REQUIRED = object()


def _field(section: dict, context: str, key: str, default=_REQUIRED):
    if key in section:
        return section[key]
    if default is _REQUIRED:
        raise ConfigError(f"{context}.{key}: required field is missing")
    return default


def _typed(context: str, key: str, value, kinds, note: str = ""):
    if isinstance(value, bool) and bool not in (kinds if isinstance(kinds, tuple) else (kinds,)):
        raise ConfigError(f"{context}.{key}: expected {note or kinds}, got a boolean")
    if not isinstance(value, kinds):
        raise ConfigError(f"{context}.{key}: expected {note or kinds}, got {type(value).__name__}")
    return value


# ---------------------------------------------------------------------------
# Config resolution
# ---------------------------------------------------------------------------


def _resolve_space(raw: dict) -> dict:
    kind = _field(raw, "space", "kind")
    if kind == "macro":
        out = {
            "kind": "macro",
            "num_layers": _typed("space", "num_layers", _field(raw, "space", "num_layers"), int),
            "kernel_sizes": _typed("space", "kernel_sizes", _field(raw, "space", "kernel_sizes"), list),
            "filter_counts": _typed(
                "space", "filter_counts", _field(raw, "space", "filter_counts"), list
            ),
            "skip_connections": _typed(
                "space", "skip_connections", _field(raw, "space", "skip_connections", False), bool
            ),
        }
        return out
    if kind == "micro":
        return {
            "kind": "micro",
            "norm_ops": _field(raw, "space", "norm_ops", ["batch_norm", "identity"]),
            "conv_ops": _field(
                raw,
                "space",
                "conv_ops",
                [op.name for op in archspace.DEFAULT_CONV_OPS],
            ),
            "max_layers": _typed("space", "max_layers", _field(raw, "space", "max_layers"), int),
            "num_cells_stacked": _typed(
                "space", "num_cells_stacked", _field(raw, "space", "num_cells_stacked", 1), int
            ),
            "reduction_between_cells": _typed(
                "space",
                "reduction_between_cells",
                _field(raw, "space", "reduction_between_cells", 1),
                int,
            ),
        }
    raise ConfigError(f"space.kind: expected 'macro' or 'micro', got {kind!r}")


def _resolve_evaluator(raw: dict) -> dict:
    kind = _field(raw, "evaluator", "kind")
    if kind == "synthetic":
        out = {
            "kind": "synthetic",
            "seed": _typed("evaluator", "seed", _field(raw, "evaluator", "seed", 0), int),
            "noise_std": float(_field(raw, "evaluator", "noise_std", 0.0)),
            "max_accuracy": float(_field(raw, "evaluator", "max_accuracy", 0.95)),
            "weight_scale": float(_field(raw, "evaluator", "weight_scale", 1.0)),
            "depth_weight_scale": float(_field(raw, "evaluator", "depth_weight_scale", 1.0)),
            "quadratic_rank": _typed(
                "evaluator", "quadratic_rank", _field(raw, "evaluator", "quadratic_rank", 0), int
            ),
            "proxy_epochs": _typed(
                "evaluator", "proxy_epochs", _field(raw, "evaluator", "proxy_epochs", 10), int
            ),
            "full_epochs": _typed(
                "evaluator", "full_epochs", _field(raw, "evaluator", "full_epochs", 10), int
            ),
        }
        return out
    if kind == "tabular":
        path = _typed("evaluator", "path", _field(raw, "evaluator", "path"), str)
        if not Path(path).exists():
            raise ConfigError(f"evaluator.path: file does not exist: {path}")
        return {"kind": "tabular", "path": path}
    raise ConfigError(f"evaluator.kind: expected 'synthetic' or 'tabular', got {kind!r}")


def _resolve_reward(raw: dict | None) -> dict | None:
    if raw is None:
        return None
    kind = _field(raw, "reward", "kind")
    out = {"kind": kind}
    for key in ("alpha", "power_budget_w", "accuracy_threshold"):
        if key in raw:
            out[key] = float(raw[key])
    reward_mod.RewardConfig(**out)  # validates kind/field pairing eagerly
    return out


_ENGINE_DEFAULTS = {
    "monas": {
        "hidden_dim": 24,
        "learning_rate": 0.05,
        "momentum": 0.0,
        "baseline_decay": 0.9,
        "clip_norm": 5.0,
        "epochs": None,
    },
    "dppnet": {
        "surrogate_hidden": 16,
        "surrogate_lr": 0.25,
        "surrogate_epochs": 150,
        "surrogate_momentum": 0.0,
    },
    "random": {"epochs": None},
    "ea": {"mutation_rate": 1.0, "eviction": "worst", "epochs": None},
}

_ENGINE_REQUIRED = {
    "monas": ("iterations",),
    "dppnet": ("k", "train_epochs"),
    "random": ("budget",),
    "ea": ("budget", "population_size", "tournament_size"),
}


def _resolve_engine(raw: dict) -> dict:
    kind = _field(raw, "engine", "kind")
    if kind not in _ENGINE_DEFAULTS:
        raise ConfigError(
            f"engine.kind: expected one of {sorted(_ENGINE_DEFAULTS)}, got {kind!r}"
        )
    out = {"kind": kind}
    for key in _ENGINE_REQUIRED[kind]:
        out[key] = _typed("engine", key, _field(raw, "engine", key), int)
    for key, default in _ENGINE_DEFAULTS[kind].items():
        value = raw.get(key, default)
        out[key] = value
    known = {"kind", *_ENGINE_REQUIRED[kind], *_ENGINE_DEFAULTS[kind]}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"engine: unknown fields for kind {kind!r}: {sorted(unknown)}")
    return out


def resolve_config(raw: dict, require_engine: bool = True) -> dict:
    """Validate a raw config dict and materialize every default."""
    if not isinstance(raw, dict):
        raise ConfigError("config: top level must be a JSON object")
    resolved = {
        "format_version": FORMAT_VERSION,
        "seed": _typed("config", "seed", raw.get("seed", 0), int),
        "n_workers": _typed("config", "n_workers", raw.get("n_workers", 1), int),
        "input_shape": raw.get("input_shape", list(engines.DEFAULT_INPUT_SHAPE)),
        "profile": raw.get("profile", "WS"),
        "objectives": raw.get("objectives", DEFAULT_OBJECTIVES),
        "output": raw.get("output"),
        "space": _resolve_space(_typed("config", "space", _field(raw, "config", "space"), dict)),
        "evaluator": _resolve_evaluator(
            _typed("config", "evaluator", _field(raw, "config", "evaluator"), dict)
        ),
        "reward": _resolve_reward(raw.get("reward")),
    }
    shape = resolved["input_shape"]
    if not (isinstance(shape, list) and len(shape) == 3 and all(isinstance(d, int) for d in shape)):
        raise ConfigError("config.input_shape: expected [channels, height, width]")
    if resolved["n_workers"] < 1:
        raise ConfigError("config.n_workers: must be >= 1")
    build_objectives(resolved["objectives"])  # eager validation
    if require_engine or "engine" in raw:
        resolved["engine"] = _resolve_engine(
            _typed("config", "engine", _field(raw, "config", "engine"), dict)
        )
        kind = resolved["engine"]["kind"]
        if kind in ("monas", "ea") and resolved["reward"] is None:
            raise ConfigError(f"config.reward: required by the {kind} engine")
        if kind == "monas" and resolved["space"]["kind"] != "macro":
            raise ConfigError("engine.monas: requires a macro space")
        if kind == "dppnet" and resolved["space"]["kind"] != "micro":
            raise ConfigError("engine.dppnet: requires a micro space")
    return resolved


def config_hash(resolved: dict) -> str:
    canonical = json.dumps(resolved, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------


def _build_op(value, kind: str) -> archspace.OpDef:
    if isinstance(value, str):
        defaults = archspace.DEFAULT_NORM_OPS + archspace.DEFAULT_CONV_OPS
        for op in defaults:
            if op.name == value:
                if op.kind != kind:
                    raise ConfigError(f"op {value!r} is a {op.kind} op, not {kind}")
                return op
        raise ConfigError(f"unknown op name {value!r}; define it inline as an object")
    if isinstance(value, dict):
        return archspace.OpDef(
            name=_field(value, "op", "name"),
            kind=kind,
            kernel_size=value.get("kernel_size", 1),
            groups=value.get("groups", 1),
            depthwise=value.get("depthwise", False),
            expansion=value.get("expansion", 1),
        )
    raise ConfigError(f"op entries must be names or objects, got {type(value).__name__}")


def build_space(cfg: dict) -> archspace.SearchSpace:
    if cfg["kind"] == "macro":
        return archspace.MacroSpace(
            num_layers=cfg["num_layers"],
            kernel_sizes=tuple(cfg["kernel_sizes"]),
            filter_counts=tuple(cfg["filter_counts"]),
            skip_connections=cfg["skip_connections"],
        )
    return archspace.MicroSpace(
        norm_ops=tuple(_build_op(v, "norm") for v in cfg["norm_ops"]),
        conv_ops=tuple(_build_op(v, "conv") for v in cfg["conv_ops"]),
        max_layers=cfg["max_layers"],
        num_cells_stacked=cfg["num_cells_stacked"],
        reduction_between_cells=cfg["reduction_between_cells"],
    )


def build_evaluator(cfg: dict, space) -> evaluator_mod.AccuracyEvaluator:
    if cfg["kind"] == "tabular":
        return evaluator_mod.TabularBenchmark.load_jsonl(cfg["path"], space=space)
    fidelity = evaluator_mod.FidelityConfig(cfg["proxy_epochs"], cfg["full_epochs"])
    return evaluator_mod.SyntheticOracle.from_seed(
        space,
        seed=cfg["seed"],
        noise_std=cfg["noise_std"],
        max_accuracy=cfg["max_accuracy"],
        weight_scale=cfg["weight_scale"],
        depth_weight_scale=cfg["depth_weight_scale"],
        fidelity=fidelity,
        quadratic_rank=cfg["quadratic_rank"],
    )


def build_profile(value: str) -> costmodel.DeviceProfile:
    if value in costmodel.PRESET_NAMES:
        return costmodel.get_preset(value)
    if Path(value).exists():
        return costmodel.load_profile(value)
    raise ConfigError(f"config.profile: {value!r} is neither a preset (WS/ES/M) nor a file")


def build_objectives(items) -> pareto.ObjectiveSpec:
    if not isinstance(items, list):
        raise ConfigError("config.objectives: expected a list of [name, direction] pairs")
    pairs = []
    for item in items:
        if not (isinstance(item, (list, tuple)) and len(item) == 2):
            raise ConfigError(f"config.objectives: bad entry {item!r}")
        pairs.append((str(item[0]), str(item[1])))
    return pareto.ObjectiveSpec(tuple(pairs))


def build_reward(cfg: dict | None) -> reward_mod.RewardConfig | None:
    if cfg is None:
        return None
    return reward_mod.RewardConfig(
        kind=cfg["kind"],
        alpha=cfg.get("alpha"),
        power_budget_w=cfg.get("power_budget_w"),
        accuracy_threshold=cfg.get("accuracy_threshold"),
    )


def run_engine(resolved: dict):
    """Build everything from a resolved config and run the configured engine."""
    space = build_space(resolved["space"])
    oracle = build_evaluator(resolved["evaluator"], space)
    profile = build_profile(resolved["profile"])
    objectives = build_objectives(resolved["objectives"])
    reward_config = build_reward(resolved["reward"])
    engine = resolved["engine"]
    shape = tuple(resolved["input_shape"])
    workers = resolved["n_workers"]
    seed = resolved["seed"]
    kind = engine["kind"]
    if kind == "monas":
        config = engines.MonasConfig(
            space=space,
            reward=reward_config,
            iterations=engine["iterations"],
            seed=seed,
            hidden_dim=engine["hidden_dim"],
            learning_rate=engine["learning_rate"],
            momentum=engine["momentum"],
            baseline_decay=engine["baseline_decay"],
            clip_norm=engine["clip_norm"],
            epochs=engine["epochs"],
        )
        trace, front = engines.run_monas(config, oracle, profile, shape, n_workers=workers)
    elif kind == "dppnet":
        config = engines.SmboConfig(
            space=space,
            objectives=objectives,
            k=engine["k"],
            train_epochs=engine["train_epochs"],
            seed=seed,
            surrogate_hidden=engine["surrogate_hidden"],
            surrogate_lr=engine["surrogate_lr"],
            surrogate_epochs=engine["surrogate_epochs"],
            surrogate_momentum=engine["surrogate_momentum"],
        )
        trace, front = engines.run_dppnet(config, oracle, profile, shape, n_workers=workers)
    elif kind == "random":
        trace, front = engines.run_random(
            space,
            engine["budget"],
            oracle,
            profile,
            objectives,
            seed=seed,
            input_shape=shape,
            epochs=engine["epochs"],
            n_workers=workers,
        )
    else:
        config = engines.EaConfig(
            space=space,
            reward=reward_config,
            budget=engine["budget"],
            population_size=engine["population_size"],
            tournament_size=engine["tournament_size"],
            mutation_rate=engine["mutation_rate"],
            eviction=engine["eviction"],
            seed=seed,
            epochs=engine["epochs"],
        )
        trace, front = engines.run_ea(config, oracle, profile, objectives, shape, n_workers=workers)
    return trace, front, objectives, profile, reward_config


# ---------------------------------------------------------------------------
# Reporting helpers
# ---------------------------------------------------------------------------


def reference_point(record_sets: list[list[engines.TraceRecord]], objectives: pareto.ObjectiveSpec) -> dict:
    """A shared raw-space reference strictly worse than every evaluated point."""
    ref = {}
    for i, (name, direction) in enumerate(objectives.objectives):
        values = [
            objectives.raw_values(r.metrics)[i] for records in record_sets for r in records
        ]
        lo, hi = min(values), max(values)
        pad = max(0.05 * (hi - lo), 1e-9)
        ref[name] = hi + pad if direction == "min" else lo - pad
    return ref


def _hypervolume_points(records: list[engines.TraceRecord], objectives, ref: dict) -> float:
    points = [r.metrics for r in records]
    front = pareto.extract_front(points, objectives)
    return pareto.hypervolume(front, ref, objectives)


def hypervolume_curve(
    records: list[engines.TraceRecord], objectives: pareto.ObjectiveSpec, ref: dict, points: int = 20
) -> list[dict]:
    n = len(records)
    checkpoints = sorted({int(c) for c in np.linspace(1, n, min(points, n))})
    return [
        {"evaluations": c, "hypervolume": _hypervolume_points(records[:c], objectives, ref)}
        for c in checkpoints
    ]


def _trace_summary(records: list[engines.TraceRecord], profile) -> dict:
    accs = [r.metrics.accuracy for r in records]
    energies = [r.metrics.energy_j for r in records]
    summary = {
        "true_evaluations": len(records),
        "mean_accuracy": float(np.mean(accs)),
        "best_accuracy": float(np.max(accs)),
        "mean_energy_j": float(np.mean(energies)),
    }
    if profile is not None:
        summary["mean_energy_norm"] = float(
            np.mean([costmodel.normalize_energy(e, profile) for e in energies])
        )
    return summary


def _front_entries(front: pareto.ParetoFront) -> list[dict]:
    return front.to_json_entries()


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


class _OutputLock:
    """Exclusive ownership of an output directory for one run."""

    def __init__(self, out_dir: Path):
        self.path = out_dir / ".run.lock"
        self.fd = None

    def __enter__(self):
        try:
            self.fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise ParetoNasError(
                f"output directory is locked by another run: {self.path}"
            ) from None
        return self

    def __exit__(self, *exc):
        if self.fd is not None:
            os.close(self.fd)
            self.path.unlink(missing_ok=True)
        return False


def _load_config_file(path: str) -> dict:
    config_path = Path(path)
    if not config_path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        return json.loads(config_path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc


def cmd_search(args) -> int:
    raw = _load_config_file(args.config)
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.profile is not None:
        raw["profile"] = args.profile
    resolved = resolve_config(raw)
    out_value = args.out or resolved.get("output")
    if not out_value:
        raise ConfigError("an output directory is required (--out or config.output)")
    out_dir = Path(out_value)
    out_dir.mkdir(parents=True, exist_ok=True)
    digest = config_hash(resolved)

    with _OutputLock(out_dir):
        trace, front, objectives, profile, reward_config = run_engine(resolved)
        trace.metadata["config_hash"] = digest

        trace.write_csv(out_dir / "trace.csv")
        _write_json(
            out_dir / "front.json",
            {
                "format_version": FORMAT_VERSION,
                "objectives": list(front.objectives.objectives),
                "entries": _front_entries(front),
            },
        )
        echo = dict(resolved)
        echo["config_hash"] = digest
        _write_json(out_dir / "config-echo.json", echo)

        true_records = trace.true_records()
        report_objectives = build_objectives(resolved["objectives"])
        ref = reference_point([true_records], report_objectives)
        metrics_payload = {
            "format_version": FORMAT_VERSION,
            "engine": resolved["engine"]["kind"],
            "seed": resolved["seed"],
            "profile": profile.name,
            "config_hash": digest,
            "conventions": CONVENTIONS,
            "objectives": list(report_objectives.objectives),
            "reference_point": ref,
            "hypervolume": _hypervolume_points(true_records, report_objectives, ref),
            "hypervolume_vs_budget": hypervolume_curve(true_records, report_objectives, ref),
            "summary": _trace_summary(true_records, profile),
            "satisfaction_rate": None,
        }
        constraint = engines.Constraint.from_reward(reward_config) if reward_config else None
        window = args.window
        if constraint is not None and window <= len(true_records):
            series = engines.satisfaction_rate(trace, constraint, window)
            metrics_payload["satisfaction_rate"] = {
                "constraint": {"kind": constraint.kind, "value": constraint.value},
                "window": window,
                "series": [[i, f] for i, f in series],
            }
        _write_json(out_dir / "metrics.json", metrics_payload)
        if trace.checkpoint is not None:
            _write_json(out_dir / "checkpoint.json", trace.checkpoint)
    print(f"wrote {out_dir}/trace.csv ({len(trace)} records, front size {len(front)})")
    return 0


def _sidecar(trace_path: Path) -> dict | None:
    echo_path = trace_path.parent / "config-echo.json"
    if echo_path.exists():
        return json.loads(echo_path.read_text())
    return None


def cmd_report(args) -> int:
    traces = []
    sidecars = []
    for path in args.traces:
        trace_path = Path(path)
        if not trace_path.exists():
            raise ConfigError(f"trace file not found: {path}")
        traces.append((trace_path, engines.SearchTrace.from_csv(trace_path)))
        sidecars.append(_sidecar(trace_path))

    if args.objectives:
        objectives = _parse_objectives_flag(args.objectives)
    else:
        declared = [json.dumps(s["objectives"]) for s in sidecars if s and "objectives" in s]
        if declared and len(set(declared)) > 1:
            raise ConfigError("traces declare mismatched objective sets; pass --objectives")
        objectives = build_objectives(json.loads(declared[0]) if declared else DEFAULT_OBJECTIVES)

    record_sets = [trace.true_records() for _, trace in traces]
    ref = reference_point(record_sets, objectives)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    runs = []
    union_entries: list[tuple] = []
    for (path, trace), records, sidecar in zip(traces, record_sets, sidecars):
        entries = [(archspace.decode(r.arch), r.metrics) for r in records]
        front = pareto.front_from_evaluations(entries, objectives)
        union_entries.extend(entries)
        profile = None
        if sidecar:
            try:
                profile = build_profile(sidecar["profile"])
            except (ConfigError, KeyError):
                profile = None
        run_payload = {
            "trace": str(path),
            "hypervolume": _hypervolume_points(records, objectives, ref),
            "front": _front_entries(front),
            "summary": _trace_summary(records, profile),
        }
        constraint = None
        if sidecar and sidecar.get("reward"):
            constraint = engines.Constraint.from_reward(build_reward(sidecar["reward"]))
        if constraint is not None and args.window <= len(records):
            series = engines.satisfaction_rate(trace, constraint, args.window)
            run_payload["satisfaction_rate"] = {
                "constraint": {"kind": constraint.kind, "value": constraint.value},
                "window": args.window,
                "series": [[i, f] for i, f in series],
            }
        runs.append(run_payload)

    union_front = pareto.front_from_evaluations(union_entries, objectives)
    union_hv = pareto.hypervolume(union_front.points(), ref, objectives)
    _write_json(
        out_dir / "report.json",
        {
            "format_version": FORMAT_VERSION,
            "objectives": list(objectives.objectives),
            "reference_point": ref,
            "runs": runs,
            "union": {"hypervolume": union_hv, "front": _front_entries(union_front)},
        },
    )

    lines = ["run,hypervolume"]
    for payload in runs:
        lines.append(f"{payload['trace']},{payload['hypervolume']!r}")
    lines.append(f"union,{union_hv!r}")
    (out_dir / "hypervolume.csv").write_text("\n".join(lines) + "\n")

    front_lines = ["run,arch," + ",".join(objectives.names)]
    for payload in runs + [{"trace": "union", "front": _front_entries(union_front)}]:
        for entry in payload["front"]:
            vals = ",".join(repr(float(entry[name])) for name in objectives.names)
            front_lines.append(f"{payload['trace']},{entry['arch']},{vals}")
    (out_dir / "fronts.csv").write_text("\n".join(front_lines) + "\n")

    sat_lines = ["run,iteration,fraction"]
    have_sat = False
    for payload in runs:
        series = payload.get("satisfaction_rate")
        if series:
            have_sat = True
            for iteration, frac in series["series"]:
                sat_lines.append(f"{payload['trace']},{iteration},{frac!r}")
    if have_sat:
        (out_dir / "satisfaction.csv").write_text("\n".join(sat_lines) + "\n")

    print(f"wrote report for {len(runs)} trace(s) to {out_dir}")
    return 0


def _parse_objectives_flag(text: str) -> pareto.ObjectiveSpec:
    pairs = []
    for part in text.split(","):
        name, sep, direction = part.partition(":")
        if not sep:
            raise ConfigError(f"--objectives entries look like name:min, got {part!r}")
        pairs.append([name.strip(), direction.strip()])
    return build_objectives(pairs)


def cmd_truefront(args) -> int:
    raw = _load_config_file(args.config)
    resolved = resolve_config(raw, require_engine=False)
    space = build_space(resolved["space"])
    oracle = build_evaluator(resolved["evaluator"], space)
    profile = build_profile(resolved["profile"])
    objectives = build_objectives(resolved["objectives"])
    shape = tuple(resolved["input_shape"])

    entries = evaluator_mod.evaluate_all(space, oracle, profile, shape, limit=args.limit)
    front = pareto.front_from_evaluations(entries, objectives)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    trace = engines.SearchTrace(metadata={"engine": "truefront"})
    for i, (spec, metrics) in enumerate(entries, start=1):
        trace.append(i, spec, metrics, metrics.accuracy, "truefront")
    trace.write_csv(out_dir / "evaluations.csv")
    _write_json(
        out_dir / "truefront.json",
        {
            "format_version": FORMAT_VERSION,
            "objectives": list(objectives.objectives),
            "total_candidates": len(entries),
            "entries": _front_entries(front),
        },
    )
    print(f"evaluated {len(entries)} candidates, true front size {len(front)}")
    return 0


def cmd_profiles(args) -> int:
    if args.action != "list":
        raise ConfigError(f"unknown profiles action {args.action!r}; try 'profiles list'")
    for profile in costmodel.list_presets():
        meta = profile.metadata
        print(
            f"{profile.name}: {meta.get('instance', '?')} | {meta.get('cpu', '?')} "
            f"({meta.get('cores', '?')} cores @ {meta.get('ghz', '?')} GHz) | "
            f"throughput {profile.flops_per_second:.1e} FLOP/s | "
            f"idle {profile.idle_power_w} W | energy bounds {profile.energy_bounds} J"
        )
    return 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pareto-nas",
        description="Multi-objective neural architecture search at desk scale.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    search = sub.add_parser("search", help="run a configured search engine")
    search.add_argument("--config", required=True, help="path to the run config JSON")
    search.add_argument("--out", help="output directory (overrides config.output)")
    search.add_argument("--seed", type=int, help="override the config seed")
    search.add_argument("--profile", help="override the device profile (preset name or path)")
    search.add_argument("--window", type=int, default=100, help="satisfaction-rate window")
    search.set_defaults(func=cmd_search)

    report = sub.add_parser("report", help="compare one or more trace.csv files")
    report.add_argument("traces", nargs="+", help="trace.csv paths")
    report.add_argument("--out", required=True, help="report output directory")
    report.add_argument("--objectives", help="comma list like error_rate:min,energy_j:min")
    report.add_argument("--window", type=int, default=100, help="satisfaction-rate window")
    report.set_defaults(func=cmd_report)

    truefront = sub.add_parser("truefront", help="exhaustive ground-truth front")
    truefront.add_argument("--config", required=True, help="config JSON (engine section optional)")
    truefront.add_argument("--out", required=True, help="output directory")
    truefront.add_argument(
        "--limit", type=int, default=evaluator_mod.ENUMERATION_LIMIT, help="max space size"
    )
    truefront.set_defaults(func=cmd_truefront)

    profiles = sub.add_parser("profiles", help="device profile utilities")
    profiles.add_argument("action", choices=["list"], help="profiles subcommand")
    profiles.set_defaults(func=cmd_profiles)

    return parser


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("PARETO_NAS_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, SpaceTooLargeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ParetoNasError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        logger.exception("unexpected failure")
        print(f"unexpected error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
