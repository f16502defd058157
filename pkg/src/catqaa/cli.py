"""Command-line front end.

Config grammar (plain text, one ``key = value`` per line, ``#`` starts a comment)::

    [experiment]          # optional; keys before any section belong here
    spin = half           # half | one
    lattice = ring        # ring | chain | grid
    n = 12
    rows = 4              # grid only
    cols = 3
    j = [3, 1, 0.1]       # lists in brackets, comma separated
    ta = [2, 4, 6, 8, 10]
    n_list = [6, 8, 10, 12]
    r = 32                # realizations
    seed = 0
    dt = 0.01
    gap_points = 201
    modes = [on, off]
    workers = 0           # 0 = all available cores

    [circuit]
    instance = five       # five (5-qubit chain, fields -1/2 on sites 0,2,4) | sampled
    steps = 100
    measure = true

Command-line flags override config keys.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import __version__
from .circuit import emit_text, simulate_circuit, trotterize
from .ensemble import (
    ExperimentConfig,
    disorder_records,
    gap_statistics,
    gaps_csv,
    map_csv,
    overlap_csv,
    records_csv,
    run_ensemble,
    scaling_csv,
    scaling_sweep,
    speedup_map,
)
from .evolve import initial_state
from .model import Problem, Schedule, five_qubit_instance, sample_disorder
from .spectrum import ground_space
from .spinops import SpinKind

COMMANDS = ("run", "map", "gaps", "scaling", "compile")


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line
        self.key = key


@dataclass(frozen=True)
class CircuitOptions:
    instance: str = "five"
    steps: int = 100
    measure: bool = True


@dataclass(frozen=True)
class Config:
    experiment: ExperimentConfig = field(default_factory=ExperimentConfig)
    circuit: CircuitOptions = field(default_factory=CircuitOptions)


# config key -> (dataclass field, value kind)
EXPERIMENT_KEYS = {
    "spin": ("spin", "str"),
    "lattice": ("lattice", "str"),
    "n": ("n", "int"),
    "rows": ("rows", "int"),
    "cols": ("cols", "int"),
    "j": ("J", "floats"),
    "ta": ("t_a", "floats"),
    "n_list": ("n_list", "ints"),
    "r": ("realizations", "int"),
    "seed": ("base_seed", "int"),
    "dt": ("dt", "float"),
    "gap_points": ("coarse_points", "int"),
    "modes": ("modes", "strs"),
    "workers": ("workers", "int"),
}
CIRCUIT_KEYS = {
    "instance": ("instance", "str"),
    "steps": ("steps", "int"),
    "measure": ("measure", "bool"),
}
SECTIONS = {"experiment": EXPERIMENT_KEYS, "circuit": CIRCUIT_KEYS}


def _scalar(text: str, kind: str):
    if kind in ("int", "ints"):
        return int(text)
    if kind in ("float", "floats"):
        return float(text)
    if kind == "bool":
        low = text.lower()
        if low not in ("true", "false", "yes", "no", "1", "0"):
            raise ValueError(f"not a boolean: {text!r}")
        return low in ("true", "yes", "1")
    return text.strip().strip("'\"")


def _value(text: str, kind: str):
    text = text.strip()
    if kind in ("floats", "ints", "strs"):
        if not (text.startswith("[") and text.endswith("]")):
            return (_scalar(text, kind),)
        body = text[1:-1].strip()
        return tuple(_scalar(x.strip(), kind) for x in body.split(",")) if body else ()
    return _scalar(text, kind)


def parse_config(text: str) -> Config:
    values = {name: {} for name in SECTIONS}
    section = "experiment"
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"malformed section header {raw.strip()!r}", lineno)
            section = line[1:-1].strip().lower()
            if section not in SECTIONS:
                raise ConfigError(f"unknown section {section!r}", lineno)
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, _, rhs = line.partition("=")
        key = key.strip().lower()
        table = SECTIONS[section]
        if key not in table:
            raise ConfigError(f"unknown key {key!r} in [{section}]", lineno, key)
        name, kind = table[key]
        if name in values[section]:
            raise ConfigError(f"duplicate key {key!r}", lineno, key)
        try:
            values[section][name] = _value(rhs, kind)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}", lineno, key) from None
    return _build(values)


def _build(values: dict) -> Config:
    exp = values["experiment"]
    try:
        experiment = ExperimentConfig(**exp)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid experiment config: {exc}", key=_offending_key(exp)) from None
    opts = values["circuit"]
    if opts.get("instance", "five") not in ("five", "sampled"):
        raise ConfigError("instance must be 'five' or 'sampled'", key="instance")
    if opts.get("steps", 1) < 1:
        raise ConfigError("steps must be >= 1", key="steps")
    return Config(experiment, CircuitOptions(**opts))


def _offending_key(values: dict) -> str | None:
    """First config key that is invalid on its own against the defaults."""
    names = {name: key for key, (name, _) in EXPERIMENT_KEYS.items()}
    for name, value in values.items():
        try:
            ExperimentConfig(**{name: value})
        except (ValueError, TypeError):
            return names[name]
    return None


def _emit_value(v) -> str:
    if isinstance(v, SpinKind):
        return v.value
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        return "[" + ", ".join(_emit_value(x) for x in v) + "]"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit_config(cfg: Config) -> str:
    lines = ["[experiment]"]
    for key, (name, _) in EXPERIMENT_KEYS.items():
        lines.append(f"{key} = {_emit_value(getattr(cfg.experiment, name))}")
    lines.append("")
    lines.append("[circuit]")
    for key, (name, _) in CIRCUIT_KEYS.items():
        lines.append(f"{key} = {_emit_value(getattr(cfg.circuit, name))}")
    return "\n".join(lines) + "\n"


# --- dispatch ------------------------------------------------------------------------------

def _log(msg: str) -> None:
    print(msg, file=sys.stderr, flush=True)


def _progress(done: int, total: int) -> None:
    if done == total or done % max(1, total // 20) == 0:
        _log(f"  {done}/{total} work items")


def _figure_name(cfg: ExperimentConfig, command: str) -> str:
    half = cfg.spin is SpinKind.HALF
    if command == "run":
        return "fig1a.csv" if half else "fig3.csv"
    if command == "gaps":
        return "fig1c.csv" if half else "fig3c.csv"
    if command == "map":
        return "fig2b.csv" if cfg.lattice == "grid" else "fig2a.csv"
    return "fig4.csv"


def _compile(cfg: Config, out: Path) -> dict[str, str]:
    exp, opts = cfg.experiment, cfg.circuit
    files = {}
    rows = ["J,t_a,P_c,P_0"]
    for J in exp.J:
        if opts.instance == "five":
            p = five_qubit_instance(J)
        else:
            p = Problem(exp.system(exp.n), sample_disorder(exp.n, exp.base_seed, J))
        gs = ground_space(p.hf)
        psi0 = initial_state(p)
        for t_a in exp.t_a:
            probs = {}
            for mode in ("on", "off"):
                circ = trotterize(p, Schedule(t_a, mode == "on"), opts.steps)
                name = f"circuit_J{J!r}_ta{t_a!r}_{mode}.qasm"
                files[name] = emit_text(circ, measure=opts.measure)
                final = simulate_circuit(circ, psi0)
                amps = gs.basis.conj().T @ final
                probs[mode] = float(np.real(np.vdot(amps, amps)))
            rows.append(f"{J!r},{t_a!r},{probs['on']!r},{probs['off']!r}")
    header = "".join(f"# {k}={v}\n" for k, v in exp.describe().items() if k != "workers")
    header += "".join(f"# circuit.{f.name}={getattr(opts, f.name)}\n" for f in fields(opts))
    files["fig7.csv"] = f"# catqaa {__version__} compile\n" + header + "\n".join(rows) + "\n"
    return files


def dispatch(cfg: Config, command: str, out: str | Path) -> dict:
    """Run one command, write its files and a manifest (written last); return the manifest."""
    if command not in COMMANDS:
        raise ValueError(f"unknown command {command!r}")
    start = time.perf_counter()
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    exp = cfg.experiment
    _log(f"catqaa {command}: {exp.spin.value} {exp.lattice} sizes={exp.sizes()} J={exp.J} R={exp.realizations}")
    files: dict[str, str] = {}
    if command == "compile":
        files = _compile(cfg, out)
    else:
        if command == "run":
            stats = run_ensemble(exp, progress=_progress)
            main = overlap_csv(stats)
        elif command == "map":
            stats = speedup_map(exp, progress=_progress)
            main = map_csv(stats)
        elif command == "gaps":
            stats = gap_statistics(exp, progress=_progress)
            main = gaps_csv(stats)
        else:
            stats = scaling_sweep(exp, progress=_progress)
            main = scaling_csv(stats)
        name = _figure_name(exp, command)
        files[name] = main
        files[name.replace(".csv", "_realizations.csv")] = records_csv(stats)
        files["disorder.txt"] = disorder_records(stats.config)
        if stats.excluded:
            _log(f"  {stats.excluded} realization(s) excluded after integration failure")
    digests = {}
    for name, text in files.items():
        data = text.encode("utf-8")
        (out / name).write_bytes(data)
        digests[name] = hashlib.sha256(data).hexdigest()
    manifest = {
        "command": command,
        "version": __version__,
        "config": emit_config(cfg),
        "files": digests,
        "wall_time": time.perf_counter() - start,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="catqaa", description="Catalyzed adiabatic optimization experiments.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", type=Path, help="config file (see module docstring for grammar)")
    ap.add_argument("--out", type=Path, default=Path("out"))
    ap.add_argument("--seed", type=int)
    ap.add_argument("--workers", type=int)
    ap.add_argument("--dt", type=float)
    ap.add_argument("--realizations", type=int)
    return ap


def _error(kind: str, exc: Exception, **extra) -> None:
    record = {"error": kind, "message": str(exc), **extra}
    print(json.dumps(record), file=sys.stderr)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config.read_text()) if args.config else Config()
        overrides = {
            "base_seed": args.seed,
            "workers": args.workers,
            "dt": args.dt,
            "realizations": args.realizations,
        }
        overrides = {k: v for k, v in overrides.items() if v is not None}
        try:
            cfg = replace(cfg, experiment=replace(cfg.experiment, **overrides))
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    except ConfigError as exc:
        _error("config", exc, line=exc.line, key=exc.key)
        return 2
    except OSError as exc:
        _error("io", exc)
        return 2
    try:
        dispatch(cfg, args.command, args.out)
    except Exception as exc:  # noqa: BLE001 - reported as a machine-readable record
        _error(type(exc).__name__, exc)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
