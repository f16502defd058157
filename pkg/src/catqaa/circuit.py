"""Trotterized gate circuits for the spin-1/2 annealing path.

Gates: ``RX(t) = exp(-i t X/2)``, likewise RY, RZ, and CNOT. Qubit ``q`` is lattice site ``q``
(qubit 0 is the most-significant tensor factor, matching the Hamiltonian builders).
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .model import Problem, Schedule
from .spinops import SpinKind

ROTATIONS = ("rx", "ry", "rz")


@dataclass(frozen=True)
class Gate:
    name: str  # rx | ry | rz | cx
    qubits: tuple[int, ...]
    angle: float = 0.0

    def __post_init__(self):
        if self.name not in ROTATIONS + ("cx",):
            raise ValueError(f"unknown gate {self.name!r}")
        want = 2 if self.name == "cx" else 1
        if len(self.qubits) != want:
            raise ValueError(f"{self.name} acts on {want} qubit(s)")
        if self.name == "cx" and self.qubits[0] == self.qubits[1]:
            raise ValueError("cx control and target must differ")
        if not math.isfinite(self.angle):
            raise ValueError("gate angle must be finite")


def rx(q: int, theta: float) -> Gate:
    return Gate("rx", (q,), float(theta))


def ry(q: int, theta: float) -> Gate:
    return Gate("ry", (q,), float(theta))


def rz(q: int, theta: float) -> Gate:
    return Gate("rz", (q,), float(theta))


def cnot(control: int, target: int) -> Gate:
    return Gate("cx", (control, target))


@dataclass
class Circuit:
    n_qubits: int
    gates: list[Gate] = field(default_factory=list)
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for g in self.gates:
            self._check(g)

    def _check(self, g: Gate) -> None:
        if any(not 0 <= q < self.n_qubits for q in g.qubits):
            raise IndexError(f"{g} addresses a qubit outside 0..{self.n_qubits - 1}")

    def append(self, g: Gate) -> None:
        self._check(g)
        self.gates.append(g)

    def extend(self, gates) -> None:
        for g in gates:
            self.append(g)

    def count(self, name: str) -> int:
        return sum(g.name == name for g in self.gates)


def decompose_two_qubit(alpha: float, beta: float, gamma: float, a: int = 0, b: int = 1) -> list[Gate]:
    """Three-CNOT circuit equal to ``exp(i(alpha XX + beta YY + gamma ZZ))`` up to global phase."""
    half = math.pi / 2
    return [
        rz(b, -half),
        cnot(b, a),
        rz(a, half - 2 * gamma),
        ry(b, 2 * alpha - half),
        cnot(a, b),
        ry(b, half - 2 * beta),
        cnot(b, a),
        rz(a, half),
    ]


def trotterize(p: Problem, sch: Schedule, steps: int = 100) -> Circuit:
    """First-order product formula with schedule coefficients taken at each interval midpoint.

    Per interval: RX for the staggered field, RZ for the random fields, then one
    ``exp(-i dt (g J ZZ + h J (XX + YY)))`` factor per bond (skipped when it is the identity).
    """
    if p.kind is not SpinKind.HALF:
        raise NotImplementedError("circuit compilation supports spin-1/2 only")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    n = p.sys.n_sites
    signs = p.sys.lattice.stagger_signs()
    fields = p.disorder.fields
    J = p.disorder.J
    dt = sch.t_a / steps
    c = Circuit(n, metadata={"t_a": sch.t_a, "catalyzed": sch.catalyzed, "steps": steps, "dt_trot": dt})
    for j in range(steps):
        f, g, h = sch((j + 0.5) * dt)
        for k in range(n):
            c.append(rx(k, 2 * f * signs[k] * dt))
        for k in range(n):
            c.append(rz(k, 2 * g * fields[k] * dt))
        xy, zz = -h * J * dt, -g * J * dt
        if xy == 0.0 and zz == 0.0:
            continue
        for a, b in p.sys.lattice.bonds:
            c.extend(decompose_two_qubit(xy, xy, zz, a, b))
    return c


def rotation_matrix(name: str, theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    if name == "rx":
        return np.array([[c, -1j * s], [-1j * s, c]])
    if name == "ry":
        return np.array([[c, -s], [s, c]], dtype=complex)
    return np.array([[c - 1j * s, 0], [0, c + 1j * s]])


def simulate_circuit(c: Circuit, psi: np.ndarray) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (2**c.n_qubits,):
        raise ValueError(f"state must have length {2 ** c.n_qubits}")
    n = c.n_qubits
    t = psi.reshape((2,) * n).copy()
    for g in c.gates:
        if g.name == "cx":
            ctl, tgt = g.qubits
            idx = [slice(None)] * n
            idx[ctl] = 1
            sub = t[tuple(idx)]
            ax = tgt if tgt < ctl else tgt - 1
            sub[...] = np.flip(sub, axis=ax).copy()
        else:
            (q,) = g.qubits
            t = np.moveaxis(np.tensordot(rotation_matrix(g.name, g.angle), t, axes=([1], [q])), 0, q)
    return np.ascontiguousarray(t).reshape(-1)


def circuit_unitary(c: Circuit) -> np.ndarray:
    dim = 2**c.n_qubits
    return np.column_stack([simulate_circuit(c, e) for e in np.eye(dim, dtype=complex)])


# --- OpenQASM 2.0 subset -----------------------------------------------------------------

def _angle(theta: float) -> str:
    k = theta / math.pi
    if theta != 0.0 and k == round(k) and round(k) * math.pi == theta:
        k = int(round(k))
        return {1: "pi", -1: "-pi"}.get(k, f"{k}*pi")
    return f"{theta:.17g}"


def emit_text(c: Circuit, measure: bool = True) -> str:
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";']
    for key in sorted(c.metadata):
        lines.append(f"// {key} = {c.metadata[key]}")
    lines += [f"qreg q[{c.n_qubits}];", f"creg c[{c.n_qubits}];"]
    for g in c.gates:
        if g.name == "cx":
            lines.append(f"cx q[{g.qubits[0]}],q[{g.qubits[1]}];")
        else:
            lines.append(f"{g.name}({_angle(g.angle)}) q[{g.qubits[0]}];")
    if measure:
        lines += [f"measure q[{q}] -> c[{q}];" for q in range(c.n_qubits)]
    return "\n".join(lines) + "\n"


_ROT = re.compile(r"^(rx|ry|rz)\((.+)\)\s+q\[(\d+)\];$")
_CX = re.compile(r"^cx\s+q\[(\d+)\]\s*,\s*q\[(\d+)\];$")
_REG = re.compile(r"^(qreg|creg)\s+(\w+)\[(\d+)\];$")
_MEAS = re.compile(r"^measure\s+q\[(\d+)\]\s*->\s*c\[(\d+)\];$")


def _parse_angle(text: str) -> float:
    text = text.replace(" ", "")
    if text == "pi":
        return math.pi
    if text == "-pi":
        return -math.pi
    if text.endswith("*pi"):
        return int(text[:-3]) * math.pi
    return float(text)


class QasmError(ValueError):
    pass


def parse_text(text: str) -> Circuit:
    """Parse the subset produced by ``emit_text`` (measurements are accepted and dropped)."""
    n = None
    gates = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("//", 1)[0].strip()
        if not line or line.startswith("OPENQASM") or line.startswith("include"):
            continue
        if m := _REG.match(line):
            if m.group(1) == "qreg":
                n = int(m.group(3))
        elif m := _ROT.match(line):
            gates.append(Gate(m.group(1), (int(m.group(3)),), _parse_angle(m.group(2))))
        elif m := _CX.match(line):
            gates.append(cnot(int(m.group(1)), int(m.group(2))))
        elif _MEAS.match(line):
            continue
        else:
            raise QasmError(f"line {lineno}: cannot parse {raw!r}")
    if n is None:
        raise QasmError("missing qreg declaration")
    return Circuit(n, gates)
