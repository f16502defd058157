"""Initial, problem and catalyst Hamiltonians, the annealing schedule, and disorder sampling."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .spinops import Lattice, SpinKind, SpinSystem, canonical, embed_bond, linear_combine, local_matrices, sum_over

# numpy's PCG64 bit generator seeded directly with the integer seed; fixed for
# reproducibility of every stored disorder record.
RNG_NAME = "numpy.random.PCG64"


@dataclass(frozen=True)
class DisorderInstance:
    fields: tuple[float, ...]
    J: float
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "fields", tuple(float(h) for h in self.fields))
        if any(not -1.0 <= h <= 1.0 for h in self.fields):
            raise ValueError("random fields must lie in [-1, 1]")
        if self.J < 0:
            raise ValueError("J must be non-negative")

    @property
    def n_sites(self) -> int:
        return len(self.fields)

    def to_record(self) -> str:
        """One-line plain-text record; floats in repr form so replay is exact."""
        hs = " ".join(repr(h) for h in self.fields)
        return f"seed={self.seed} n={self.n_sites} J={self.J!r} h={hs}"

    @classmethod
    def from_record(cls, line: str) -> DisorderInstance:
        head, _, tail = line.strip().partition(" h=")
        kv = dict(item.split("=", 1) for item in head.split())
        fields = tuple(float(x) for x in tail.split())
        if len(fields) != int(kv["n"]):
            raise ValueError("record field count does not match n")
        return cls(fields, float(kv["J"]), int(kv["seed"]))


def sample_fields(n: int, seed: int) -> np.ndarray:
    """``n`` i.i.d. uniform fields on [-1, 1] from PCG64 seeded with ``seed``."""
    if n < 2:
        raise ValueError("need at least two sites")
    if seed < 0 or seed >= 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    rng = np.random.Generator(np.random.PCG64(seed))
    return rng.uniform(-1.0, 1.0, size=n)


def sample_disorder(n: int, seed: int, J: float = 0.0) -> DisorderInstance:
    return DisorderInstance(tuple(sample_fields(n, seed)), float(J), int(seed))


@dataclass(frozen=True)
class Schedule:
    """Linear interpolation plus the optional catalyst envelope ``2 s (1 - s)``, ``s = t/t_a``."""

    t_a: float
    catalyzed: bool = True

    def __post_init__(self):
        if not self.t_a > 0:
            raise ValueError("t_a must be positive")

    def _s(self, t: float) -> float:
        if not 0.0 <= t <= self.t_a:
            raise ValueError(f"t={t} outside [0, {self.t_a}]")
        return t / self.t_a

    def __call__(self, t: float) -> tuple[float, float, float]:
        s = self._s(t)
        h = 2.0 * s * (1.0 - s) if self.catalyzed else 0.0
        return 1.0 - s, s, h

    def derivatives(self, t: float) -> tuple[float, float, float]:
        s = self._s(t)
        dh = 2.0 * (1.0 - 2.0 * s) / self.t_a if self.catalyzed else 0.0
        return -1.0 / self.t_a, 1.0 / self.t_a, dh


def schedule_eval(sch: Schedule, t: float) -> tuple[float, float, float]:
    return sch(t)


def build_h0(sys: SpinSystem) -> sp.csr_matrix:
    """Staggered transverse field ``sum_k sign_k X_k``."""
    x = local_matrices(sys.kind)["X"]
    return sum_over(sys, sys.lattice.stagger_signs(), x)


def hf_diagonal(sys: SpinSystem, fields, J: float) -> np.ndarray:
    """Diagonal of the random-field Ising Hamiltonian in the computational basis."""
    fields = np.asarray(fields, dtype=float)
    if fields.shape != (sys.n_sites,):
        raise ValueError(f"expected {sys.n_sites} fields, got shape {fields.shape}")
    zvals = np.real(np.diag(local_matrices(sys.kind)["Z"]))
    z = zvals[sys.digits()]
    diag = z @ fields
    for a, b in sys.lattice.bonds:
        diag = diag + J * z[:, a] * z[:, b]
    return diag


def build_hf(sys: SpinSystem, disorder: DisorderInstance) -> sp.csr_matrix:
    diag = hf_diagonal(sys, disorder.fields, disorder.J)
    return canonical(sp.diags(diag.astype(complex)))


def build_hc(sys: SpinSystem, J: float) -> sp.csr_matrix:
    """Catalyst ``J sum_bonds (X X + Y Y)``."""
    ops = local_matrices(sys.kind)
    terms = []
    for a, b in sys.lattice.bonds:
        terms.append((J, embed_bond(sys, ops["X"], ops["X"], a, b)))
        terms.append((J, embed_bond(sys, ops["Y"], ops["Y"], a, b)))
    return linear_combine(terms)


@dataclass(frozen=True)
class Problem:
    sys: SpinSystem
    disorder: DisorderInstance

    def __post_init__(self):
        if self.disorder.n_sites != self.sys.n_sites:
            raise ValueError("disorder length does not match lattice")

    @cached_property
    def h0(self) -> sp.csr_matrix:
        return build_h0(self.sys)

    @cached_property
    def hf(self) -> sp.csr_matrix:
        return build_hf(self.sys, self.disorder)

    @cached_property
    def hf_diag(self) -> np.ndarray:
        return hf_diagonal(self.sys, self.disorder.fields, self.disorder.J)

    @cached_property
    def hc(self) -> sp.csr_matrix:
        return build_hc(self.sys, self.disorder.J)

    @property
    def kind(self) -> SpinKind:
        return self.sys.kind


def assemble(p: Problem, sch: Schedule, t: float) -> sp.csr_matrix:
    f, g, h = sch(t)
    return linear_combine([(f, p.h0), (g, p.hf), (h, p.hc)])


def h0_ground_energy(sys: SpinSystem) -> float:
    """Analytic ground energy of the staggered field: every site at its lowest X eigenvalue."""
    return -float(sys.n_sites)


def h0_gap(kind: SpinKind) -> float:
    return 2.0 if kind is SpinKind.HALF else 1.0


__all__ = [
    "RNG_NAME",
    "DisorderInstance",
    "Problem",
    "Schedule",
    "assemble",
    "build_h0",
    "build_hc",
    "build_hf",
    "five_qubit_instance",
    "h0_gap",
    "hf_diagonal",
    "sample_disorder",
    "sample_fields",
    "schedule_eval",
]


def five_qubit_instance(J: float = 1.0) -> Problem:
    """Open 5-site chain with fields -1/2 on the odd (1-based) sites; ground state |01010>."""
    sys = SpinSystem(SpinKind.HALF, Lattice.chain(5))
    return Problem(sys, DisorderInstance((-0.5, 0.0, -0.5, 0.0, -0.5), float(J), 0))
