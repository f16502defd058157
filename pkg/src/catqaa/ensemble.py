"""Disorder-averaged experiments: overlaps with/without catalysis, speedups and minimum gaps.

Realization ``r`` uses seed ``base_seed + r`` for every (N, J, t_a) and both catalysis arms,
so arms are paired on identical disorder. Work items are (N, J, r); results are reduced in
item order, so the output does not depend on the worker count.
"""
from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .evolve import DEFAULT_DT, IntegrationDiverged, rk4_evolve
from .model import DisorderInstance, Problem, Schedule, sample_disorder
from .spectrum import gap_scan, ground_space
from .spinops import Lattice, SpinKind, SpinSystem


@dataclass(frozen=True)
class ExperimentConfig:
    spin: SpinKind = SpinKind.HALF
    lattice: str = "ring"
    n: int = 12
    rows: int = 4
    cols: int = 3
    J: tuple[float, ...] = (3.0,)
    t_a: tuple[float, ...] = (5.0,)
    n_list: tuple[int, ...] = ()
    realizations: int = 32
    base_seed: int = 0
    dt: float = DEFAULT_DT
    coarse_points: int = 201
    modes: tuple[str, ...] = ("on", "off")
    gaps: bool = False
    workers: int = 0  # 0: all available cores

    def __post_init__(self):
        object.__setattr__(self, "spin", SpinKind.parse(self.spin))
        object.__setattr__(self, "J", tuple(float(j) for j in self.J))
        object.__setattr__(self, "t_a", tuple(float(t) for t in self.t_a))
        object.__setattr__(self, "n_list", tuple(int(n) for n in self.n_list))
        object.__setattr__(self, "modes", tuple(self.modes))
        if self.realizations < 1:
            raise ValueError("realizations must be >= 1")
        if any(j < 0 for j in self.J):
            raise ValueError("J values must be >= 0")
        if any(t <= 0 for t in self.t_a):
            raise ValueError("t_a values must be > 0")
        if not self.dt > 0:
            raise ValueError("dt must be > 0")
        if self.coarse_points < 3:
            raise ValueError("coarse_points must be >= 3")
        if not set(self.modes) <= {"on", "off"} or not self.modes:
            raise ValueError("modes must be a non-empty subset of {on, off}")
        if not 0 <= self.base_seed < 2**64:
            raise ValueError("base_seed must be an unsigned 64-bit integer")
        if self.workers < 0:
            raise ValueError("workers must be >= 0")
        self.lattice_for(self.sizes()[0])

    def sizes(self) -> tuple[int, ...]:
        if self.lattice == "grid":
            return (self.rows * self.cols,)
        return self.n_list or (self.n,)

    def lattice_for(self, n: int) -> Lattice:
        if self.lattice == "grid":
            return Lattice.grid(self.rows, self.cols)
        return Lattice(self.lattice, (n,))

    def system(self, n: int) -> SpinSystem:
        return SpinSystem(self.spin, self.lattice_for(n))

    def describe(self) -> dict:
        d = asdict(self)
        d["spin"] = self.spin.value
        return d


@dataclass(frozen=True)
class Record:
    n: int
    J: float
    t_a: float | None
    seed: int
    p_cat: float
    p_plain: float
    gap_cat: float
    gap_plain: float
    drift: float
    ok: bool


@dataclass
class Cell:
    n: int
    J: float
    t_a: float | None
    count: int
    excluded: int
    p_cat: float
    p_plain: float
    se_cat: float
    se_plain: float
    sp: float
    se_sp: float
    gap_cat: float
    gap_plain: float


@dataclass
class EnsembleStats:
    config: ExperimentConfig
    cells: list[Cell]
    records: list[Record] = field(repr=False)

    def cell(self, n: int | None = None, J: float | None = None, t_a: float | None = None) -> Cell:
        hits = [c for c in self.cells if (n is None or c.n == n) and (J is None or c.J == J) and (t_a is None or c.t_a == t_a)]
        if len(hits) != 1:
            raise KeyError(f"{len(hits)} cells match n={n} J={J} t_a={t_a}")
        return hits[0]

    @property
    def excluded(self) -> int:
        return sum(not r.ok for r in self.records)


def _realization(cfg: ExperimentConfig, n: int, J: float, r: int) -> list[Record]:
    seed = cfg.base_seed + r
    disorder = sample_disorder(n, seed, J)
    p = Problem(cfg.system(n), disorder)
    gs = ground_space(p.hf)
    gaps = {"on": math.nan, "off": math.nan}
    if cfg.gaps:
        # the gap along the path depends only on t/t_a, so one scan per arm suffices
        for mode in cfg.modes:
            gaps[mode] = gap_scan(p, Schedule(1.0, mode == "on"), cfg.coarse_points).min_gap
    if not cfg.t_a:
        return [Record(n, J, None, seed, math.nan, math.nan, gaps["on"], gaps["off"], 0.0, True)]
    out = []
    for t_a in cfg.t_a:
        probs = {"on": math.nan, "off": math.nan}
        drift, ok = 0.0, True
        for mode in cfg.modes:
            try:
                res = rk4_evolve(p, Schedule(t_a, mode == "on"), cfg.dt, gs=gs)
            except IntegrationDiverged:
                ok = False
                continue
            probs[mode] = res.overlap
            drift = max(drift, res.norm_drift)
        out.append(Record(n, J, t_a, seed, probs["on"], probs["off"], gaps["on"], gaps["off"], drift, ok))
    return out


def _work(args) -> list[Record]:
    return _realization(*args)


def _items(cfg: ExperimentConfig) -> list[tuple]:
    return [(cfg, n, J, r) for n in cfg.sizes() for J in cfg.J for r in range(cfg.realizations)]


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    if x.size == 0:
        return math.nan, math.nan
    se = float(np.std(x, ddof=1) / math.sqrt(x.size)) if x.size > 1 else math.nan
    return float(np.mean(x)), se


def aggregate(cfg: ExperimentConfig, records: Sequence[Record]) -> list[Cell]:
    cells = []
    for n in cfg.sizes():
        for J in cfg.J:
            for t_a in cfg.t_a or (None,):
                rs = [r for r in records if r.n == n and r.J == J and r.t_a == t_a]
                good = [r for r in rs if r.ok]
                pc = np.array([r.p_cat for r in good])
                p0 = np.array([r.p_plain for r in good])
                mc, sc = _mean_se(pc)
                m0, s0 = _mean_se(p0)
                sp, se_sp = math.nan, math.nan
                if good and t_a is not None and "on" in cfg.modes and "off" in cfg.modes and m0 > 0:
                    sp = mc / m0
                    if len(good) > 1:
                        cov = np.cov(pc, p0, ddof=1)
                        var = (cov[0, 0] / mc**2 + cov[1, 1] / m0**2 - 2 * cov[0, 1] / (mc * m0)) / len(good) if mc > 0 else math.nan
                        se_sp = sp * math.sqrt(max(var, 0.0))
                gc = float(np.mean([r.gap_cat for r in good])) if good else math.nan
                g0 = float(np.mean([r.gap_plain for r in good])) if good else math.nan
                cells.append(Cell(n, J, t_a, len(good), len(rs) - len(good), mc, m0, sc, s0, sp, se_sp, gc, g0))
    return cells


def run_ensemble(cfg: ExperimentConfig, progress: Callable[[int, int], None] | None = None) -> EnsembleStats:
    items = _items(cfg)
    records: list[Record] = []
    workers = cfg.workers or default_workers()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for i, recs in enumerate(pool.map(_work, items, chunksize=1)):
                records.extend(recs)
                if progress:
                    progress(i + 1, len(items))
    else:
        for i, item in enumerate(items):
            records.extend(_work(item))
            if progress:
                progress(i + 1, len(items))
    return EnsembleStats(cfg, aggregate(cfg, records), records)


def speedup_map(cfg: ExperimentConfig, **kw) -> EnsembleStats:
    if not cfg.J or not cfg.t_a:
        raise ValueError("J and t_a grids must be non-empty")
    return run_ensemble(replace(cfg, modes=("on", "off")), **kw)


def gap_statistics(cfg: ExperimentConfig, **kw) -> EnsembleStats:
    """Mean minimum gaps per J; no evolutions are run."""
    return run_ensemble(replace(cfg, gaps=True, modes=("on", "off"), t_a=()), **kw)


def scaling_sweep(cfg: ExperimentConfig, **kw) -> EnsembleStats:
    limit = 14 if cfg.spin is SpinKind.HALF else 9
    if not cfg.n_list:
        raise ValueError("scaling needs an n_list")
    if max(cfg.n_list) > limit:
        raise ValueError(f"N={max(cfg.n_list)} exceeds the exact-diagonalization budget ({limit})")
    return run_ensemble(replace(cfg, modes=("on", "off")), **kw)


def log_slope(stats: EnsembleStats, J: float, t_a: float | None = None) -> float:
    """Least-squares slope of log(SP) against N."""
    t_a = stats.config.t_a[0] if t_a is None else t_a
    cells = [c for c in stats.cells if c.J == J and c.t_a == t_a and c.sp > 0]
    if len(cells) < 2:
        return math.nan
    ns = np.array([c.n for c in cells], dtype=float)
    return float(np.polyfit(ns, np.log([c.sp for c in cells]), 1)[0])


# --- CSV ---------------------------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _header(cfg: ExperimentConfig, kind: str) -> list[str]:
    lines = [f"# catqaa {__version__} {kind}"]
    for k, v in cfg.describe().items():
        if k == "workers":
            continue
        lines.append(f"# {k}={v}")
    return lines


def _table(cfg: ExperimentConfig, kind: str, columns: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    for line in _header(cfg, kind):
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def overlap_csv(stats: EnsembleStats) -> str:
    cols = ["N", "J", "t_a", "P_c", "P_0", "SP", "se_P_c", "se_P_0", "se_SP", "count", "excluded"]
    rows = [[c.n, c.J, c.t_a, c.p_cat, c.p_plain, c.sp, c.se_cat, c.se_plain, c.se_sp, c.count, c.excluded] for c in stats.cells]
    return _table(stats.config, "overlap", cols, rows)


def map_csv(stats: EnsembleStats) -> str:
    rows = [[c.J, c.t_a, c.sp, c.se_sp] for c in stats.cells]
    return _table(stats.config, "speedup-map", ["J", "t_a", "SP", "stderr"], rows)


def gaps_csv(stats: EnsembleStats) -> str:
    cols = ["J", "gap_c", "gap_0", "ratio", "count"]
    rows = []
    for c in stats.cells:
        ratio = c.gap_cat / c.gap_plain if c.gap_plain > 0 else math.inf
        rows.append([c.J, c.gap_cat, c.gap_plain, ratio, c.count])
    return _table(stats.config, "min-gap", cols, rows)


def scaling_csv(stats: EnsembleStats) -> str:
    rows = [[c.n, c.J, c.t_a, c.sp, c.se_sp, c.p_cat, c.p_plain] for c in stats.cells]
    text = _table(stats.config, "scaling", ["N", "J", "t_a", "SP", "stderr", "P_c", "P_0"], rows)
    slopes = "".join(f"# log_slope J={J!r}: {log_slope(stats, J)!r}\n" for J in stats.config.J)
    return text + slopes


def records_csv(stats: EnsembleStats) -> str:
    cols = ["N", "J", "t_a", "seed", "P_c", "P_0", "ratio", "gap_c", "gap_0", "drift", "ok"]
    rows = []
    for r in stats.records:
        ratio = r.p_cat / r.p_plain if r.p_plain > 0 else math.nan
        rows.append([r.n, r.J, r.t_a, r.seed, r.p_cat, r.p_plain, ratio, r.gap_cat, r.gap_plain, r.drift, int(r.ok)])
    return _table(stats.config, "realizations", cols, rows)


def disorder_records(cfg: ExperimentConfig) -> str:
    lines = []
    for n in cfg.sizes():
        for J in cfg.J:
            for r in range(cfg.realizations):
                lines.append(sample_disorder(n, cfg.base_seed + r, J).to_record())
    return "\n".join(lines) + "\n"


def default_workers() -> int:
    return max(1, len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else (os.cpu_count() or 1))
