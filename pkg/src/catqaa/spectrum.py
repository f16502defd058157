"""Low-lying spectrum: ground spaces, lowest two levels, gap scans along a schedule."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la
import scipy.sparse as sp
import scipy.sparse.linalg as sla

from .model import Problem, Schedule
from .spinops import is_hermitian, linear_combine

DENSE_LIMIT = 256
DEFAULT_DEGENERACY_TOL = 1e-9
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class NotHermitianError(ValueError):
    pass


@dataclass
class GroundSpace:
    energy: float
    basis: np.ndarray  # (dim, degeneracy), orthonormal columns
    tol: float = DEFAULT_DEGENERACY_TOL

    @property
    def degeneracy(self) -> int:
        return self.basis.shape[1]


def _start_vector(dim: int) -> np.ndarray:
    # Fixed pseudo-random start: deterministic, and not orthogonal to product ground states
    # the way the all-ones vector can be.
    rng = np.random.Generator(np.random.PCG64(0x5EED))
    return rng.standard_normal(dim) + 0j


def _check(H) -> None:
    if H.shape[0] != H.shape[1]:
        raise ValueError("operator must be square")
    if not is_hermitian(H, atol=1e-10):
        raise NotHermitianError("operator is not Hermitian")


def _diagonal_only(H) -> np.ndarray | None:
    if sp.issparse(H):
        coo = H.tocoo()
        if np.all(coo.row == coo.col):
            return np.real(H.diagonal())
        return None
    H = np.asarray(H)
    if np.count_nonzero(H - np.diag(np.diag(H))) == 0:
        return np.real(np.diag(H))
    return None


def _dense(H) -> np.ndarray:
    return H.toarray() if sp.issparse(H) else np.asarray(H, dtype=complex)


def _canonical_basis(vecs: np.ndarray) -> np.ndarray:
    """Deterministic orthonormal basis of the span of ``vecs``.

    Each vector gets its largest-magnitude component real and positive; vectors are
    ordered by the index of that component.
    """
    g = vecs.shape[1]
    if g > 1:
        # pivot rows from a pivoted QR of V^H fix a canonical representative of the span
        _, _, piv = la.qr(vecs.conj().T, pivoting=True, mode="economic")
        rows = np.sort(piv[:g])
        vecs = vecs @ np.linalg.inv(vecs[rows, :])
        vecs, _ = np.linalg.qr(vecs)
    out = []
    for v in vecs.T:
        k = int(np.argmax(np.abs(v) - 1e-12 * np.arange(v.size)))
        out.append((k, v * (abs(v[k]) / v[k])))
    out.sort(key=lambda kv: kv[0])
    return np.column_stack([v for _, v in out])


def _lowest(H, k: int, v0: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """``k`` smallest eigenpairs, ascending."""
    dim = H.shape[0]
    if dim <= DENSE_LIMIT or k >= dim - 1:
        w, v = np.linalg.eigh(_dense(H))
        return w[:k], v[:, :k]
    if v0 is None:
        v0 = _start_vector(dim)
    if sp.issparse(H) and np.iscomplexobj(H.data) and not np.any(H.data.imag):
        H = H.real.tocsr()
    if not np.iscomplexobj(H.dtype.type(0)):
        v0 = np.real(v0)
    w, v = sla.eigsh(H, k=k, which="SA", v0=v0, ncv=max(2 * k + 1, 20), tol=1e-12)
    order = np.argsort(w)
    return w[order], v[:, order]


def ground_space(H, degeneracy_tol: float = DEFAULT_DEGENERACY_TOL) -> GroundSpace:
    _check(H)
    dim = H.shape[0]
    diag = _diagonal_only(H)
    if diag is not None:
        e0 = float(diag.min())
        idx = np.flatnonzero(diag <= e0 + degeneracy_tol * max(1.0, abs(e0)))
        basis = np.zeros((dim, idx.size), dtype=complex)
        basis[idx, np.arange(idx.size)] = 1.0
        return GroundSpace(e0, basis, degeneracy_tol)
    k = min(4, dim)
    while True:
        w, v = _lowest(H, k)
        e0 = float(w[0])
        mask = w <= e0 + degeneracy_tol * max(1.0, abs(e0))
        if not mask.all() or k >= dim:
            break
        k = min(2 * k, dim)
    return GroundSpace(e0, _canonical_basis(v[:, mask]), degeneracy_tol)


def lowest_two(H, v0: np.ndarray | None = None) -> tuple[float, float]:
    if H.shape[0] < 2:
        raise ValueError("need dimension >= 2")
    diag = _diagonal_only(H)
    if diag is not None:
        w = np.partition(diag, 1)[:2]
        return float(w[0]), float(w[1])
    w, _ = _lowest(H, 2, v0)
    return float(w[0]), float(w[1])


@dataclass
class GapScan:
    schedule: Schedule
    times: np.ndarray
    gaps: np.ndarray
    min_gap: float
    argmin_time: float
    refined_times: list[float] = field(default_factory=list)
    refined_gaps: list[float] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "delta"])
        pts = sorted(zip(list(self.times) + self.refined_times, list(self.gaps) + self.refined_gaps))
        for t, d in pts:
            w.writerow([repr(float(t)), repr(float(d))])
        return buf.getvalue()


class _GapProbe:
    """Instantaneous gap of the real-symmetric H(t)."""

    def __init__(self, p: Problem, sch: Schedule):
        self.sch = sch
        self.h0 = p.h0.real.tocsr()
        self.hc = p.hc.real.tocsr()
        self.hf_diag = p.hf_diag
        self.hf = sp.diags(self.hf_diag, format="csr")

    def __call__(self, t: float) -> float:
        f, g, h = self.sch(t)
        if f == 0.0 and h == 0.0:
            w = np.partition(g * self.hf_diag, 1)[:2]
            return float(w[1] - w[0])
        H = f * self.h0 + g * self.hf
        if h != 0.0:
            H = H + h * self.hc
        w, _ = _lowest(H, 2)
        return max(float(w[1] - w[0]), 0.0)


def gap_scan(p: Problem, sch: Schedule, coarse_points: int = 201) -> GapScan:
    """Gap on a uniform grid, then golden-section refinement around the coarse minimum."""
    if coarse_points < 3:
        raise ValueError("coarse_points must be >= 3")
    probe = _GapProbe(p, sch)
    times = np.linspace(0.0, sch.t_a, coarse_points)
    gaps = np.array([probe(float(t)) for t in times])
    i = int(np.argmin(gaps))
    best_t, best = float(times[i]), float(gaps[i])
    lo = float(times[max(i - 1, 0)])
    hi = float(times[min(i + 1, coarse_points - 1)])
    ref_t: list[float] = []
    ref_g: list[float] = []

    def probe_logged(t):
        val = probe(t)
        ref_t.append(t)
        ref_g.append(val)
        return val

    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    g1, g2 = probe_logged(x1), probe_logged(x2)
    while hi - lo > sch.t_a * 1e-3:
        if g1 <= g2:
            hi, x2, g2 = x2, x1, g1
            x1 = hi - GOLDEN * (hi - lo)
            g1 = probe_logged(x1)
        else:
            lo, x1, g1 = x1, x2, g2
            x2 = lo + GOLDEN * (hi - lo)
            g2 = probe_logged(x2)
    for t, val in zip(ref_t, ref_g):
        if val < best:
            best_t, best = t, val
    return GapScan(sch, times, gaps, best, best_t, ref_t, ref_g)


def _spectral_norm(A) -> float:
    if A.shape[0] <= DENSE_LIMIT:
        return float(np.max(np.abs(np.linalg.eigvalsh(_dense(A)))))
    w = sla.eigsh(A, k=1, which="LM", v0=_start_vector(A.shape[0]), return_eigenvectors=False)
    return float(abs(w[0]))


def hamiltonian_rate(p: Problem, sch: Schedule, t: float):
    df, dg, dh = sch.derivatives(t)
    return linear_combine([(df, p.h0), (dg, p.hf), (dh, p.hc)])


def adiabatic_time_estimate(p: Problem, sch: Schedule, scan: GapScan, gap_tol: float = 1e-12) -> float:
    """``max_t ||dH/dt|| / min_gap**2`` over the scan grid (a diagnostic, not a stopping rule)."""
    if scan.min_gap <= gap_tol:
        return math.inf
    # dH/dt = A + c(t) Hc with c linear in t; the norm is convex in c, so its maximum over
    # the grid sits at an endpoint.
    ends = [0.0, sch.t_a] if sch.catalyzed else [0.0]
    rate = max(_spectral_norm(hamiltonian_rate(p, sch, t)) for t in ends)
    return rate / scan.min_gap**2
