"""Batch front end: JSON run configuration in, deterministic CSV out.

Each task writes one CSV (# metadata comments, header, rows with
17-significant-digit scientific notation) plus a .meta.json sidecar with
the fully resolved configuration, library version and wall time. Grid
points are evaluated independently (optionally by a thread pool) and
written in index order, so outputs are byte-identical across runs and
thread counts.

Exit codes: 0 ok, 2 config error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from . import __version__, correl, counting, scenarios, spectrum
from .model import (BlockState, ConfigSpace, FluctuationRates, ModelSpec,
                    PerStateParams, validate)
from .steady import NullSpaceDegenerate, SingularShift, steady_state
from .model import build_generator, trace_functional

TASKS = ("steady", "spectrum", "g2", "c1", "c2", "counting",
         "mandel-sweep", "lineshape-sweep")
TASK_GRID = {"steady": None, "spectrum": "omega", "g2": "tau", "c1": "tau",
             "c2": "tau", "counting": "time", "mandel-sweep": "delta",
             "lineshape-sweep": "delta"}
SCENARIOS = {
    "single_state": scenarios.single_state,
    "spectral_two_state": scenarios.spectral_two_state,
    "lifetime_fluct": scenarios.lifetime_fluct,
    "diffusion_chain": scenarios.diffusion_chain,
    "light_assisted": scenarios.light_assisted,
}


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class GridSpec:
    start: float
    stop: float
    count: int
    spacing: str = "linear"

    def build(self) -> np.ndarray:
        if self.spacing == "linear":
            return np.linspace(self.start, self.stop, self.count)
        if self.start <= 0 or self.stop <= 0:
            raise ConfigError("log grid requires positive start and stop")
        return np.logspace(np.log10(self.start), np.log10(self.stop), self.count)


@dataclass(frozen=True)
class RunConfig:
    schema: int
    model: dict
    task: str
    grids: dict
    output: str
    threads: int
    n_max: int | None


def _require_keys(obj: dict, allowed: set[str], required: set[str], path: str):
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"{path}: unknown key(s) {sorted(unknown)} "
                          f"(allowed: {sorted(allowed)})")
    missing = required - set(obj)
    if missing:
        raise ConfigError(f"{path}: missing required key(s) {sorted(missing)}")


def _parse_grid(obj, path: str) -> GridSpec:
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: must be an object")
    _require_keys(obj, {"start", "stop", "count", "spacing"},
                  {"start", "stop", "count"}, path)
    g = GridSpec(start=float(obj["start"]), stop=float(obj["stop"]),
                 count=int(obj["count"]), spacing=obj.get("spacing", "linear"))
    if g.count < 2:
        raise ConfigError(f"{path}.count: must be >= 2, got {g.count}")
    if g.spacing not in ("linear", "log"):
        raise ConfigError(f"{path}.spacing: must be 'linear' or 'log'")
    return g


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON run configuration; all defaults resolved."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config parse error at line {exc.lineno}, "
                          f"column {exc.colno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be an object")
    _require_keys(raw, {"schema", "model", "task", "grids", "output",
                        "threads", "n_max"}, {"schema", "model", "task"}, "config")
    if raw["schema"] != 1:
        raise ConfigError(f"config.schema: unsupported version {raw['schema']}")
    task = raw["task"]
    if task not in TASKS:
        raise ConfigError(f"config.task: unknown task {task!r}; valid: {list(TASKS)}")

    model = raw["model"]
    if not isinstance(model, dict):
        raise ConfigError("config.model: must be an object")
    if "scenario" in model:
        _require_keys(model, {"scenario", "params"}, {"scenario", "params"},
                      "config.model")
        if model["scenario"] not in SCENARIOS:
            raise ConfigError(f"config.model.scenario: unknown scenario "
                              f"{model['scenario']!r}; valid: {sorted(SCENARIOS)}")
    elif "inline" in model:
        _require_keys(model, {"inline"}, {"inline"}, "config.model")
        inline = model["inline"]
        _require_keys(inline, {"r_max", "delta_omega", "gamma", "omega_rabi",
                               "phi", "gamma_cross", "detuning", "labels"},
                      {"r_max", "delta_omega", "gamma", "omega_rabi"},
                      "config.model.inline")
    else:
        raise ConfigError("config.model: needs either 'scenario' or 'inline'")

    grids = {}
    for name, g in raw.get("grids", {}).items():
        if name not in ("tau", "omega", "delta", "time"):
            raise ConfigError(f"config.grids.{name}: unknown grid name")
        grids[name] = _parse_grid(g, f"config.grids.{name}")
    needed = TASK_GRID[task]
    if needed and needed not in grids:
        raise ConfigError(f"config.grids: task {task!r} needs a {needed!r} grid")

    n_max = raw.get("n_max")
    if task == "counting":
        if n_max is None:
            raise ConfigError("config.n_max: required for the counting task")
        n_max = int(n_max)
        if n_max < 0:
            raise ConfigError(f"config.n_max: must be >= 0, got {n_max}")

    threads = int(raw.get("threads", 1))
    if threads < 1:
        raise ConfigError(f"config.threads: must be >= 1, got {threads}")

    cfg = RunConfig(schema=1, model=model, task=task, grids=grids,
                    output=str(raw.get("output", "run")), threads=threads,
                    n_max=n_max)
    problems = validate(build_model(cfg))
    if problems:
        raise ConfigError("config.model: invalid model:\n  " + "\n  ".join(problems))
    return cfg


def emit_config(config: RunConfig) -> str:
    """Canonical JSON text of a resolved config (round-trips through parse)."""
    d = {"schema": config.schema, "model": config.model, "task": config.task,
         "grids": {k: dataclasses.asdict(g) for k, g in config.grids.items()},
         "output": config.output, "threads": config.threads}
    if config.n_max is not None:
        d["n_max"] = config.n_max
    return json.dumps(d, indent=2, sort_keys=True)


def build_model(config: RunConfig) -> ModelSpec:
    m = config.model
    if "scenario" in m:
        return SCENARIOS[m["scenario"]](**m["params"])
    inline = m["inline"]
    r = int(inline["r_max"])
    per = tuple(PerStateParams(delta_omega=d, gamma=g, omega_rabi=o)
                for d, g, o in zip(inline["delta_omega"], inline["gamma"],
                                   inline["omega_rabi"]))
    if len(per) != r:
        raise ConfigError("config.model.inline: per-state arrays must have length r_max")
    zeros = np.zeros((r, r))
    phi = np.asarray(inline.get("phi") or zeros, dtype=float)
    cross = np.asarray(inline.get("gamma_cross") or zeros, dtype=float)
    labels = inline.get("labels")
    return ModelSpec(
        space=ConfigSpace(r_max=r, labels=tuple(labels) if labels else None),
        per_state=per,
        rates=FluctuationRates(phi=phi, gamma_cross=cross),
        detuning=float(inline.get("detuning", 0.0)),
    )


def _fmt(x: float) -> str:
    return f"{x:.16e}"


def _parallel_map(fn, n: int, threads: int) -> list:
    if threads <= 1:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(n)))


def _write_csv(path: str, meta: dict, header: list[str], rows) -> None:
    lines = [f"# {k} = {v}" for k, v in sorted(meta.items())]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_fmt(x) for x in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def run(config: RunConfig) -> list[str]:
    """Execute one task; returns the list of files written."""
    t0 = time.perf_counter()
    spec = build_model(config)
    task = config.task
    grid_name = TASK_GRID[task]
    grid = config.grids[grid_name].build() if grid_name else None
    meta = {"task": task, "version": __version__,
            "model": json.dumps(config.model, sort_keys=True)}
    csv_path = f"{config.output}_{task.replace('-', '_')}.csv"

    if task == "steady":
        st = steady_state(build_generator(spec))
        pops = np.real(st.blocks[:, 0, 0] + st.blocks[:, 1, 1])
        exc = np.real(st.blocks[:, 1, 1])
        rows = [(float(i), p, e) for i, (p, e) in enumerate(zip(pops, exc))]
        _write_csv(csv_path, meta, ["state_index", "population",
                                    "excited_population"], rows)
    elif task == "spectrum":
        gen = build_generator(spec)
        st = steady_state(gen)
        seeds, w = correl._c1_pieces(spec, st)
        v = BlockState(seeds).to_vector()
        theta = trace_functional(spec.r_max)
        v_dec = BlockState.from_vector(v - st.to_vector() * (theta @ v))
        from .steady import resolve_deflated

        def point(i):
            x = resolve_deflated(gen, -1j * grid[i], v_dec)
            return 2.0 * float(np.real(w @ x.to_vector()))

        vals = _parallel_map(point, grid.size, config.threads)
        meta["coherent_weight"] = _fmt(spectrum.coherent_weight(spec))
        meta["stationary_intensity"] = _fmt(correl.stationary_intensity(spec))
        meta["unit"] = "omega_minus_omegaL in model rate units"
        _write_csv(csv_path, meta, ["omega_minus_omegaL", "s_inc"],
                   zip(grid, vals))
    elif task in ("g2", "c1", "c2"):
        gen = build_generator(spec)
        st = steady_state(gen)
        if task == "c1":
            seed_blocks, w = correl._c1_pieces(spec, st)
            norm = 1.0
        else:
            seed_blocks = correl._c2_seeds(spec, st)
            w = np.zeros(4 * spec.r_max, dtype=complex)
            w[3::4] = spec.effective_decays()
            norm = 1.0
            if task == "g2":
                i_st = float(np.real(spec.effective_decays() @ st.blocks[:, 1, 1]))
                if i_st <= 1e-300:
                    raise correl.ZeroIntensity("stationary intensity is zero")
                norm = i_st**2
        v0 = BlockState(seed_blocks).to_vector()

        def point(i):
            # independent per point so results cannot depend on scheduling
            x = la.expm(grid[i] * gen.matrix) @ v0
            return complex(w @ x) / norm

        vals = _parallel_map(point, grid.size, config.threads)
        if task == "c1":
            _write_csv(csv_path, meta, ["tau", "re_c1", "im_c1"],
                       ((t, v.real, v.imag) for t, v in zip(grid, vals)))
        else:
            _write_csv(csv_path, meta, ["tau", task],
                       ((t, v.real) for t, v in zip(grid, vals)))
    elif task == "counting":
        if np.any(grid < 0):
            raise ConfigError("counting time grid must be nonnegative")

        def point(i):
            rec = counting.counting_record(spec, float(grid[i]), config.n_max)
            return rec

        recs = _parallel_map(point, grid.size, config.threads)
        header = ["t", "mean", "second_factorial", "mandel_q", "remainder"]
        header += [f"p{n}" for n in range(config.n_max + 1)]
        rows = [[r.t, r.mean, r.second_factorial, r.mandel_q, r.remainder, *r.pn]
                for r in recs]
        _write_csv(csv_path, meta, header, rows)
    elif task == "mandel-sweep":
        def point(i):
            return counting.stationary_mandel(
                dataclasses.replace(spec, detuning=float(grid[i])))

        vals = _parallel_map(point, grid.size, config.threads)
        _write_csv(csv_path, meta, ["delta", "q_st"], zip(grid, vals))
    elif task == "lineshape-sweep":
        def point(i):
            return counting.line_shape(
                dataclasses.replace(spec, detuning=float(grid[i])))

        vals = _parallel_map(point, grid.size, config.threads)
        _write_csv(csv_path, meta, ["delta", "intensity"], zip(grid, vals))

    sidecar = f"{config.output}.meta.json"
    with open(sidecar, "w") as fh:
        json.dump({"config": json.loads(emit_config(config)),
                   "version": __version__,
                   "wall_time_s": time.perf_counter() - t0}, fh, indent=2)
    return [csv_path, sidecar]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fluorospec",
        description="Fluorophore emission observables from block Lindblad rate models")
    sub = parser.add_subparsers(dest="task", required=True)
    for task in TASKS:
        p = sub.add_parser(task)
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", default=None, help="output path prefix")
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--verbose", action="store_true")
    args = parser.parse_args(argv)

    try:
        with open(args.config) as fh:
            text = fh.read()
        cfg = parse_config(text)
        overrides = {"task": args.task}
        if args.out is not None:
            overrides["output"] = args.out
        if args.threads is not None:
            overrides["threads"] = args.threads
        cfg = dataclasses.replace(cfg, **overrides)
        needed = TASK_GRID[cfg.task]
        if needed and needed not in cfg.grids:
            raise ConfigError(f"config.grids: task {cfg.task!r} needs a {needed!r} grid")
        if cfg.task == "counting" and cfg.n_max is None:
            raise ConfigError("config.n_max: required for the counting task")
    except (OSError, ConfigError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 2
    try:
        files = run(cfg)
    except (NullSpaceDegenerate, SingularShift, correl.ZeroIntensity,
            counting.ZeroCounts, ArithmeticError, ValueError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}),
              file=sys.stderr)
        return 3
    if args.verbose:
        for f in files:
            print(f, file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
