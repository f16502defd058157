"""Spin operators embedded in the many-body Hilbert space.

Site 0 is the most-significant Kronecker factor, so basis index ``b`` written in
base ``d`` lists the local states of sites ``0, 1, ..., N-1`` from left to right.
Local state ``0`` is the +1 eigenstate of Z.

Spin-1/2 operators are Pauli matrices (eigenvalues +-1); spin-1 operators are the
standard S=1 matrices (eigenvalues -1, 0, +1).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

ZERO_CUTOFF = 1e-15


class SpinKind(enum.Enum):
    HALF = "half"
    ONE = "one"

    @property
    def local_dim(self) -> int:
        return 2 if self is SpinKind.HALF else 3

    @classmethod
    def parse(cls, text: str | SpinKind) -> SpinKind:
        if isinstance(text, SpinKind):
            return text
        key = str(text).strip().lower()
        aliases = {"half": cls.HALF, "1/2": cls.HALF, "0.5": cls.HALF, "one": cls.ONE, "1": cls.ONE}
        if key not in aliases:
            raise ValueError(f"unknown spin kind {text!r}")
        return aliases[key]


@dataclass(frozen=True)
class Lattice:
    """Ring(N), Chain(N) or open Grid(rows, cols).

    Grid site ``(i, j)`` has index ``i * cols + j``.
    """

    kind: str
    shape: tuple[int, ...]
    bonds: tuple[tuple[int, int], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        kind = self.kind.lower()
        object.__setattr__(self, "kind", kind)
        if kind == "ring":
            (n,) = self.shape
            if n < 3:
                raise ValueError("Ring(N) needs N >= 3; use Chain for fewer sites")
            bonds = tuple((k, (k + 1) % n) for k in range(n))
        elif kind == "chain":
            (n,) = self.shape
            if n < 2:
                raise ValueError("Chain(N) needs N >= 2")
            bonds = tuple((k, k + 1) for k in range(n - 1))
        elif kind == "grid":
            rows, cols = self.shape
            if rows < 1 or cols < 1 or rows * cols < 2:
                raise ValueError("Grid needs at least two sites")
            horiz = [(i * cols + j, i * cols + j + 1) for i in range(rows) for j in range(cols - 1)]
            vert = [(i * cols + j, (i + 1) * cols + j) for i in range(rows - 1) for j in range(cols)]
            bonds = tuple(horiz + vert)
        else:
            raise ValueError(f"unknown lattice kind {self.kind!r}")
        object.__setattr__(self, "bonds", bonds)

    @classmethod
    def ring(cls, n: int) -> Lattice:
        return cls("ring", (int(n),))

    @classmethod
    def chain(cls, n: int) -> Lattice:
        return cls("chain", (int(n),))

    @classmethod
    def grid(cls, rows: int, cols: int) -> Lattice:
        return cls("grid", (int(rows), int(cols)))

    @property
    def n_sites(self) -> int:
        return int(np.prod(self.shape))

    def stagger_signs(self) -> np.ndarray:
        """Sign of the staggered transverse field per site.

        1D: ``(-1)**(k+1)`` for 0-based ``k`` (first site negative).
        Grid: checkerboard ``(-1)**(i+j+1)``.
        """
        if self.kind == "grid":
            rows, cols = self.shape
            i, j = np.divmod(np.arange(rows * cols), cols)
            return np.where((i + j) % 2 == 0, -1.0, 1.0)
        k = np.arange(self.n_sites)
        return np.where(k % 2 == 0, -1.0, 1.0)

    def __str__(self) -> str:
        return f"{self.kind}({','.join(map(str, self.shape))})"


@dataclass(frozen=True)
class SpinSystem:
    kind: SpinKind
    lattice: Lattice

    @property
    def d(self) -> int:
        return self.kind.local_dim

    @property
    def n_sites(self) -> int:
        return self.lattice.n_sites

    @property
    def dim(self) -> int:
        return self.d**self.n_sites

    def digits(self) -> np.ndarray:
        """``(dim, N)`` array of local-state labels of every basis state."""
        idx = np.arange(self.dim)
        powers = self.d ** np.arange(self.n_sites - 1, -1, -1)
        return (idx[:, None] // powers[None, :]) % self.d


def local_matrices(kind: SpinKind) -> dict[str, np.ndarray]:
    """On-site operators X, Y, Z and ladder operators Plus = X + iY, Minus = X - iY."""
    if kind is SpinKind.HALF:
        x = np.array([[0, 1], [1, 0]], dtype=complex)
        y = np.array([[0, -1j], [1j, 0]], dtype=complex)
        z = np.array([[1, 0], [0, -1]], dtype=complex)
    else:
        s = 1 / np.sqrt(2)
        x = s * np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex)
        y = s * np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]], dtype=complex)
        z = np.diag([1.0, 0.0, -1.0]).astype(complex)
    return {"X": x, "Y": y, "Z": z, "Plus": x + 1j * y, "Minus": x - 1j * y}


def canonical(mat) -> sp.csr_matrix:
    """Sorted, duplicate-free CSR with entries below ``ZERO_CUTOFF`` dropped."""
    m = sp.csr_matrix(mat, dtype=complex)
    m.sum_duplicates()
    m.data[np.abs(m.data) < ZERO_CUTOFF] = 0
    m.eliminate_zeros()
    m.sort_indices()
    return m


def _check_local(sys: SpinSystem, local: np.ndarray) -> np.ndarray:
    local = np.asarray(local, dtype=complex)
    if local.shape != (sys.d, sys.d):
        raise ValueError(f"local operator must be {sys.d}x{sys.d}, got {local.shape}")
    return local


def _check_site(sys: SpinSystem, site: int) -> int:
    if not 0 <= site < sys.n_sites:
        raise IndexError(f"site {site} out of range for {sys.n_sites} sites")
    return int(site)


def embed_site(sys: SpinSystem, local: np.ndarray, site: int) -> sp.csr_matrix:
    local = _check_local(sys, local)
    site = _check_site(sys, site)
    left = sp.identity(sys.d**site, dtype=complex, format="csr")
    right = sp.identity(sys.d ** (sys.n_sites - site - 1), dtype=complex, format="csr")
    return canonical(sp.kron(sp.kron(left, sp.csr_matrix(local)), right))


def embed_bond(sys: SpinSystem, local_a, local_b, site_a: int, site_b: int) -> sp.csr_matrix:
    local_a = _check_local(sys, local_a)
    local_b = _check_local(sys, local_b)
    site_a, site_b = _check_site(sys, site_a), _check_site(sys, site_b)
    if site_a == site_b:
        raise IndexError("bond needs two distinct sites")
    factors = [None] * sys.n_sites
    factors[site_a] = local_a
    factors[site_b] = local_b
    out = sp.identity(1, dtype=complex, format="csr")
    run = 1
    for f in factors:
        if f is None:
            run *= sys.d
            continue
        out = sp.kron(sp.kron(out, sp.identity(run, dtype=complex)), sp.csr_matrix(f))
        run = 1
    out = sp.kron(out, sp.identity(run, dtype=complex))
    return canonical(out)


def linear_combine(terms: Iterable[tuple[float, sp.spmatrix]]) -> sp.csr_matrix:
    terms = list(terms)
    if not terms:
        raise ValueError("need at least one term")
    shape = terms[0][1].shape
    acc = sp.csr_matrix(shape, dtype=complex)
    for coef, op in terms:
        if op.shape != shape:
            raise ValueError(f"dimension mismatch: {op.shape} vs {shape}")
        acc = acc + coef * op
    return canonical(acc)


def is_hermitian(op, atol: float = 1e-12) -> bool:
    diff = op - op.conj().T
    if sp.issparse(diff):
        return diff.nnz == 0 or float(abs(diff).max()) < atol
    return float(np.max(np.abs(diff), initial=0.0)) < atol


def sum_over(sys: SpinSystem, coefs: Sequence[float], local) -> sp.csr_matrix:
    """``sum_k coefs[k] * local_k`` over all sites."""
    return linear_combine((c, embed_site(sys, local, k)) for k, c in enumerate(coefs))
