import math

import numpy as np
import pytest
from dataclasses import replace

from catqaa.ensemble import (
    ExperimentConfig,
    aggregate,
    disorder_records,
    gap_statistics,
    gaps_csv,
    log_slope,
    map_csv,
    overlap_csv,
    records_csv,
    run_ensemble,
    scaling_csv,
    scaling_sweep,
    speedup_map,
)
from catqaa.evolve import initial_state
from catqaa.model import DisorderInstance, Problem, sample_disorder
from catqaa.spectrum import ground_space
from catqaa.spinops import SpinKind

SMALL = ExperimentConfig(n=6, J=(1.0,), t_a=(1.0, 2.0), realizations=3, base_seed=11, workers=1)


def test_config_validation():
    with pytest.raises(ValueError):
        replace(SMALL, realizations=0)
    with pytest.raises(ValueError):
        replace(SMALL, J=(-1.0,))
    with pytest.raises(ValueError):
        replace(SMALL, t_a=(0.0,))
    with pytest.raises(ValueError):
        replace(SMALL, modes=("sideways",))
    with pytest.raises(ValueError):
        replace(SMALL, lattice="ring", n=2)


def test_run_shapes_and_pairing():
    stats = run_ensemble(SMALL)
    assert len(stats.cells) == 2
    assert len(stats.records) == 6
    assert stats.excluded == 0
    seeds = sorted({r.seed for r in stats.records})
    assert seeds == [11, 12, 13]
    c = stats.cell(J=1.0, t_a=2.0)
    rs = [r for r in stats.records if r.t_a == 2.0]
    assert math.isclose(c.p_cat, np.mean([r.p_cat for r in rs]))
    assert math.isclose(c.sp, c.p_cat / c.p_plain)
    for r in stats.records:
        assert 0 <= r.p_cat <= 1 + 1e-9 and 0 <= r.p_plain <= 1 + 1e-9


def test_j_zero_decouples():
    cfg = replace(SMALL, J=(0.0,), realizations=1, t_a=(0.5,))
    stats = run_ensemble(cfg)
    rec = stats.records[0]
    # Hc = 0 at J = 0: both arms see the same Hamiltonian
    assert abs(rec.p_cat - rec.p_plain) < 1e-12
    d = sample_disorder(6, 11, 0.0)
    p = Problem(cfg.system(6), d)
    bits = "".join("0" if h < 0 else "1" for h in d.fields)
    gs = ground_space(p.hf)
    assert gs.degeneracy == 1 and np.argmax(np.abs(gs.basis[:, 0])) == int(bits, 2)


def test_self_consistency_without_catalysis():
    stats = run_ensemble(replace(SMALL, modes=("off",)))
    for c in stats.cells:
        assert math.isnan(c.sp)
    # SP from two identical uncatalyzed arms is exactly 1
    recs = [replace(r, p_cat=r.p_plain) for r in stats.records]
    for c in aggregate(SMALL, recs):
        assert c.sp == 1.0


def test_worker_count_does_not_change_output():
    a = run_ensemble(replace(SMALL, workers=1))
    b = run_ensemble(replace(SMALL, workers=2))
    assert overlap_csv(a) == overlap_csv(b)
    assert records_csv(a) == records_csv(b)


def test_gap_statistics_and_csv():
    cfg = replace(SMALL, J=(0.0, 3.0), coarse_points=11)
    stats = gap_statistics(cfg)
    assert len(stats.cells) == 2
    j0 = stats.cell(J=0.0)
    assert j0.gap_cat == j0.gap_plain
    text = gaps_csv(stats)
    body = [l for l in text.splitlines() if not l.startswith("#")]
    assert body[0] == "J,gap_c,gap_0,ratio,count"
    assert len(body) == 3


def test_speedup_map_csv():
    stats = speedup_map(replace(SMALL, J=(0.2, 0.6), t_a=(1.0, 3.0), realizations=2))
    body = [l for l in map_csv(stats).splitlines() if not l.startswith("#")]
    assert body[0] == "J,t_a,SP,stderr"
    assert len(body) == 5


def test_scaling_sweep_and_slope():
    cfg = replace(SMALL, n_list=(4, 6), J=(3.0,), t_a=(1.0,), realizations=4)
    stats = scaling_sweep(cfg)
    assert [c.n for c in stats.cells] == [4, 6]
    assert math.isfinite(log_slope(stats, 3.0))
    assert "log_slope" in scaling_csv(stats)
    with pytest.raises(ValueError):
        scaling_sweep(replace(cfg, n_list=(16,)))


def test_grid_config():
    cfg = ExperimentConfig(lattice="grid", rows=2, cols=3, J=(1.0,), t_a=(0.5,), realizations=1, workers=1)
    assert cfg.sizes() == (6,)
    stats = run_ensemble(cfg)
    assert stats.cells[0].n == 6


def test_disorder_records_replay():
    lines = disorder_records(SMALL).splitlines()
    assert len(lines) == 3
    assert DisorderInstance.from_record(lines[1]) == sample_disorder(6, 12, 1.0)


def test_csv_header_embeds_config():
    text = overlap_csv(run_ensemble(replace(SMALL, realizations=1, t_a=(0.5,))))
    assert text.startswith("# catqaa ")
    assert "# realizations=1" in text
    assert "workers" not in text
