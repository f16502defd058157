import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from catqaa.model import (
    DisorderInstance,
    Problem,
    Schedule,
    assemble,
    build_h0,
    build_hc,
    build_hf,
    five_qubit_instance,
    sample_disorder,
    sample_fields,
    schedule_eval,
)
from catqaa.spinops import Lattice, SpinKind, SpinSystem, embed_bond, embed_site, linear_combine, local_matrices

from conftest import PAULI, dense_product


def test_sample_disorder_deterministic_and_bounded():
    a = sample_disorder(12, 42)
    b = sample_disorder(12, 42)
    assert a == b
    assert all(-1 <= h <= 1 for h in a.fields)
    assert sample_disorder(12, 43).fields != a.fields


def test_sample_disorder_mean():
    assert abs(sample_fields(10_000, 7).mean()) < 0.02


def test_sample_disorder_errors():
    with pytest.raises(ValueError):
        sample_disorder(1, 0)
    with pytest.raises(ValueError):
        DisorderInstance((0.5, 1.5), 1.0, 0)


def test_disorder_record_roundtrip():
    d = sample_disorder(9, 2**63 + 5, 0.7)
    assert DisorderInstance.from_record(d.to_record()) == d


def test_fields_independent_of_J():
    assert sample_disorder(8, 3, 0.1).fields == sample_disorder(8, 3, 3.0).fields


@pytest.mark.parametrize("t_a", [0.3, 1.0, 17.0])
def test_schedule_boundaries(t_a):
    sch = Schedule(t_a, True)
    assert schedule_eval(sch, 0.0) == (1.0, 0.0, 0.0)
    assert schedule_eval(sch, t_a) == (0.0, 1.0, 0.0)
    assert schedule_eval(sch, t_a / 2) == (0.5, 0.5, 0.5)
    assert Schedule(t_a, False)(t_a / 2)[2] == 0.0


def test_schedule_range():
    with pytest.raises(ValueError):
        Schedule(1.0)(1.5)
    with pytest.raises(ValueError):
        Schedule(1.0)(-0.1)
    with pytest.raises(ValueError):
        Schedule(0.0)


@settings(max_examples=50, deadline=None)
@given(s=st.floats(0, 1), t_a=st.floats(0.01, 100))
def test_catalyst_envelope_peak(s, t_a):
    f, g, h = Schedule(t_a, True)(s * t_a)
    assert 0 <= h <= 0.5 + 1e-15
    assert abs(f + g - 1) < 1e-12


def test_h0_spectrum_half_ring():
    sys = SpinSystem(SpinKind.HALF, Lattice.ring(8))
    w = np.linalg.eigvalsh(build_h0(sys).toarray())
    # commuting single-site terms: levels -N + 2m with multiplicity C(N, m)
    assert np.allclose(w[:9], [-8] + [-6] * 8)


def test_h0_small_dense():
    sys = SpinSystem(SpinKind.HALF, Lattice.chain(5))
    # 1-based (-1)^k: site 1 negative
    oracle = sum((-1) ** k * dense_product([PAULI["X"] if j == k - 1 else PAULI["I"] for j in range(5)]) for k in range(1, 6))
    assert np.allclose(build_h0(sys).toarray(), oracle)
    w = np.linalg.eigvalsh(oracle)
    assert np.isclose(w[0], -5) and np.isclose(w[1], -3)


def test_h0_spin_one_gap():
    sys = SpinSystem(SpinKind.ONE, Lattice.ring(4))
    w = np.linalg.eigvalsh(build_h0(sys).toarray())
    assert np.isclose(w[0], -4) and np.isclose(w[1] - w[0], 1)


def test_grid_stagger_is_checkerboard():
    signs = Lattice.grid(4, 3).stagger_signs().reshape(4, 3)
    assert signs[0, 0] == -1 and signs[0, 1] == 1 and signs[1, 0] == 1 and signs[1, 1] == -1


def test_hf_five_qubit_instance_by_enumeration():
    p = five_qubit_instance(1.0)
    energies = {}
    for bits in itertools.product([0, 1], repeat=5):
        z = [1 - 2 * b for b in bits]
        e = -0.5 * (z[0] + z[2] + z[4]) + sum(z[k] * z[k + 1] for k in range(4))
        energies["".join(map(str, bits))] = e
    best = min(energies, key=energies.get)
    assert best == "01010" and energies[best] == -5.5
    assert sorted(energies.values())[1] > -5.5
    diag = np.real(p.hf.diagonal())
    assert np.allclose(diag, [energies[format(i, "05b")] for i in range(32)])


def test_hf_chain2_spectrum():
    sys = SpinSystem(SpinKind.HALF, Lattice.chain(2))
    hf = build_hf(sys, DisorderInstance((0.0, 0.0), 1.0, 0))
    assert np.allclose(np.sort(np.real(hf.diagonal())), [-1, -1, 1, 1])


def test_hf_decoupled_ground_state():
    d = sample_disorder(6, 11, 0.0)
    sys = SpinSystem(SpinKind.HALF, Lattice.ring(6))
    hf = build_hf(sys, d)
    idx = int(np.argmin(np.real(hf.diagonal())))
    bits = format(idx, "06b")
    # local state 0 (z=+1) wherever h_k < 0
    assert bits == "".join("0" if h < 0 else "1" for h in d.fields)


def test_hf_length_mismatch():
    sys = SpinSystem(SpinKind.HALF, Lattice.ring(5))
    with pytest.raises(ValueError):
        build_hf(sys, sample_disorder(6, 0, 1.0))
    with pytest.raises(ValueError):
        Problem(sys, sample_disorder(6, 0, 1.0))


def test_hf_matches_embedded_construction():
    sys = SpinSystem(SpinKind.ONE, Lattice.ring(4))
    d = sample_disorder(4, 5, 0.8)
    z = local_matrices(SpinKind.ONE)["Z"]
    terms = [(h, embed_site(sys, z, k)) for k, h in enumerate(d.fields)]
    terms += [(d.J, embed_bond(sys, z, z, a, b)) for a, b in sys.lattice.bonds]
    assert abs(build_hf(sys, d) - linear_combine(terms)).max() < 1e-12


def test_hc_chain2_dense():
    sys = SpinSystem(SpinKind.HALF, Lattice.chain(2))
    hc = build_hc(sys, 1.0).toarray()
    oracle = np.kron(PAULI["X"], PAULI["X"]) + np.kron(PAULI["Y"], PAULI["Y"])
    assert np.allclose(hc, oracle)
    expected = np.zeros((4, 4))
    expected[1, 2] = expected[2, 1] = 2
    assert np.allclose(hc, expected)
    assert build_hc(sys, 0.0).nnz == 0


@pytest.mark.parametrize("kind", [SpinKind.HALF, SpinKind.ONE])
def test_heisenberg_identity(kind):
    sys = SpinSystem(kind, Lattice.ring(5))
    J = 0.9
    d = sample_disorder(5, 1, J)
    zz_part = build_hf(sys, d) - build_hf(sys, DisorderInstance(d.fields, 0.0, d.seed))
    ops = local_matrices(kind)
    heis = linear_combine([(J, embed_bond(sys, ops[p], ops[p], a, b)) for a, b in sys.lattice.bonds for p in "XYZ"])
    assert abs(zz_part + build_hc(sys, J) - heis).max() < 1e-12


def test_assemble_identities():
    sys = SpinSystem(SpinKind.HALF, Lattice.ring(6))
    p = Problem(sys, sample_disorder(6, 9, 1.3))
    sch = Schedule(4.0, True)
    assert abs(assemble(p, sch, 0.0) - p.h0).max() < 1e-12
    assert abs(assemble(p, sch, 4.0) - p.hf).max() < 1e-12
    assert abs(assemble(p, sch, 2.0) - 0.5 * (p.h0 + p.hf + p.hc)).max() < 1e-12


@pytest.mark.parametrize("lattice", [Lattice.ring(4), Lattice.ring(5), Lattice.chain(3), Lattice.grid(2, 3)])
def test_stagger_breaks_commutation(lattice):
    sys = SpinSystem(SpinKind.HALF, lattice)
    h0, hc = build_h0(sys), build_hc(sys, 1.0)
    zz = linear_combine([(1.0, embed_bond(sys, PAULI["Z"], PAULI["Z"], a, b)) for a, b in lattice.bonds])
    heis = hc + zz
    assert abs(h0 @ hc - hc @ h0).max() > 0.1
    assert abs(h0 @ heis - heis @ h0).max() > 0.1
    # a uniform field is a total-spin component, conserved by the isotropic exchange
    uniform = linear_combine([(1.0, embed_site(sys, PAULI["X"], k)) for k in range(sys.n_sites)])
    comm = uniform @ heis - heis @ uniform
    assert comm.nnz == 0 or abs(comm).max() < 1e-12
