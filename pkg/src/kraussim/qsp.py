"""State-preparation circuit synthesis and lowering.

:func:`synthesize` compiles an arbitrary n-qubit amplitude vector into a
circuit built from multi-controlled single-qubit rotations.  The scheme is
recursive over qubits, most significant first:

* levels 1..n-1 prepare the "magnitude pyramid": level k rotates qubit
  k-1 by Ry angles reproducing the prefix magnitudes
  ``r_prefix = sqrt(|c_{prefix 0}|^2 + |c_{prefix 1}|^2)``, one rotation
  per k-1-bit control pattern;
* level n applies, per (n-1)-bit pattern, the unitary
  ``exp(i t/2) Rz(phi) Ry(theta)`` that fixes the last qubit's relative
  magnitude and both branch phases (``theta = 2 atan2(|c1|, |c0|)``,
  ``phi = arg c1 - arg c0``, ``t = arg c1 + arg c0``).

Branch-relative scalar phases are emitted as controlled Phase gates; the
single top-level scalar that remains is tracked on
``Circuit.global_phase`` rather than compiled.  Patterns with zero
amplitude are pruned (their slot emits nothing); :func:`synthesis_plan`
exposes the full slot list including pruned entries.

:func:`synthesize_real` is the specialization for real amplitude vectors:
every level reduces to Ry rotations with signed angles
``2 atan2(c1, c0)``.

:func:`lower` rewrites a synthesized circuit over the elementary set
{X, Ry, Rz, Phase, CX}.  Runs of multi-controlled rotations sharing a
target and control set become one multiplexed rotation, decomposed by the
standard Gray-code walk (2^k CX and up to 2^k rotations for k controls);
runs of controlled Phase gates are folded into a diagonal, realized as a
cascade of multiplexed Rz layers plus a global-phase term.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .numerics import PureState

__all__ = [
    "Gate",
    "Circuit",
    "Slot",
    "GATE_KINDS",
    "synthesize",
    "synthesize_real",
    "synthesis_plan",
    "lower",
    "verify_preparation",
    "gate_counts",
    "dump_circuit",
    "qasm_export",
    "qasm_parse",
]

GATE_KINDS = ("x", "ry", "rz", "phase")

MAX_QUBITS = 12


@dataclass(frozen=True)
class Gate:
    """One gate: a 2x2 primitive on ``target``, optionally controlled.

    ``controls`` lists (qubit, activation bit) pairs; the primitive acts
    only on basis states whose control bits match.  ``angle`` is ignored
    for kind ``"x"``.
    """

    kind: str
    angle: float
    target: int
    controls: tuple[tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        seen = {self.target}
        for q, b in self.controls:
            if q in seen:
                raise ValueError(f"duplicate qubit {q} in gate")
            if b not in (0, 1):
                raise ValueError(f"control bit must be 0 or 1, got {b}")
            seen.add(q)

    def matrix(self) -> np.ndarray:
        """The 2x2 primitive acting on the target qubit."""
        a = self.angle
        if self.kind == "x":
            return np.array([[0, 1], [1, 0]], dtype=np.complex128)
        if self.kind == "ry":
            c, s = math.cos(a / 2.0), math.sin(a / 2.0)
            return np.array([[c, -s], [s, c]], dtype=np.complex128)
        if self.kind == "rz":
            return np.diag([np.exp(-1j * a / 2.0), np.exp(1j * a / 2.0)])
        return np.diag([1.0, np.exp(1j * a)]).astype(np.complex128)

    def is_elementary(self) -> bool:
        """True for the lowered target set: bare X/Ry/Rz/Phase, or CX."""
        if not self.controls:
            return True
        return self.kind == "x" and len(self.controls) == 1 and self.controls[0][1] == 1


@dataclass(frozen=True)
class Circuit:
    """A gate list over ``qubit_count`` qubits plus one tracked scalar phase.

    Gates apply in list order.  ``global_phase`` is the exponent of a
    scalar ``exp(i * global_phase)`` multiplying the final state.
    """

    qubit_count: int
    gates: tuple[Gate, ...]
    global_phase: float = 0.0

    def __post_init__(self) -> None:
        if self.qubit_count < 1:
            raise ValueError("circuit needs at least one qubit")
        for g in self.gates:
            qubits = [g.target] + [q for q, _ in g.controls]
            if any(q < 0 or q >= self.qubit_count for q in qubits):
                raise ValueError(f"gate {g} references qubit outside register")
        object.__setattr__(self, "gates", tuple(self.gates))


@dataclass(frozen=True)
class Slot:
    """One multi-controlled-U slot of the synthesis plan.

    ``level`` runs 1..n; ``pattern`` is the activation value of the
    ``level - 1`` control qubits.  ``scalar`` is the branch phase exponent
    t with ``U = exp(i t / 2) Rz(phi) Ry(theta)``.  Pruned slots sit over
    zero-amplitude branches and emit nothing.
    """

    level: int
    pattern: int
    controls: tuple[tuple[int, int], ...]
    theta: float
    phi: float
    scalar: float
    pruned: bool


def _qubit_count_for(dim: int) -> int:
    n = dim.bit_length() - 1
    if dim < 2 or 2**n != dim:
        raise ValueError(f"amplitude vector length {dim} is not a power of two >= 2")
    if n > MAX_QUBITS:
        raise ValueError(f"{n} qubits exceeds the supported maximum {MAX_QUBITS}")
    return n


def _magnitude_pyramid(amps: np.ndarray, n: int) -> list[np.ndarray]:
    """levels[k-1] holds the 2^k prefix magnitudes; levels[n-1] is ``amps``."""
    levels = [np.asarray(amps)]
    for _ in range(n - 1):
        v = levels[0]
        levels.insert(0, np.sqrt(np.abs(v[0::2]) ** 2 + np.abs(v[1::2]) ** 2))
    return levels


def synthesis_plan(target: PureState, real: bool = False) -> tuple[Slot, ...]:
    """Angles for every slot of the recursion, pruned slots included.

    The plan always contains ``2^n - 1`` slots (sum over levels of
    ``2^(k-1)``); assembling the non-pruned ones yields the circuit.
    """
    amps = target.amplitudes
    n = _qubit_count_for(amps.size)
    if real and np.max(np.abs(amps.imag)) > 1e-12:
        raise ValueError("amplitudes have imaginary parts; use synthesize instead")
    levels = _magnitude_pyramid(amps, n)
    slots: list[Slot] = []
    for k in range(1, n + 1):
        coeff = levels[k - 1]
        parents = levels[k - 2] if k >= 2 else None
        last = k == n
        for pattern in range(2 ** (k - 1)):
            controls = tuple(
                (q, (pattern >> (k - 2 - q)) & 1) for q in range(k - 1)
            )
            if parents is not None and parents[pattern] == 0.0:
                slots.append(Slot(k, pattern, controls, 0.0, 0.0, 0.0, pruned=True))
                continue
            c0, c1 = coeff[2 * pattern], coeff[2 * pattern + 1]
            if not last:
                # magnitude level: both entries real nonnegative
                theta = 2.0 * math.atan2(c1.real, c0.real)
                phi = scalar = 0.0
            elif real:
                theta = 2.0 * math.atan2(c1.real, c0.real)
                phi = scalar = 0.0
            else:
                theta = 2.0 * math.atan2(abs(c1), abs(c0))
                phi0 = math.atan2(c0.imag, c0.real) if c0 != 0.0 else 0.0
                phi1 = math.atan2(c1.imag, c1.real) if c1 != 0.0 else 0.0
                phi = phi1 - phi0
                scalar = phi1 + phi0
            slots.append(Slot(k, pattern, controls, theta, phi, scalar, pruned=False))
    return tuple(slots)


def _controlled_scalar_phase(
    eta: float, controls: tuple[tuple[int, int], ...]
) -> tuple[list[Gate], float]:
    """Gates applying exp(i eta) exactly on the control pattern.

    Realized with Phase gates only (all diagonal): a 1-activated control
    becomes the Phase target directly; a 0-activated control contributes
    Phase(-eta) on that qubit plus the same scalar on the remaining
    controls.  With no controls left the scalar is returned as a
    global-phase increment.
    """
    gates: list[Gate] = []
    ctrl = list(controls)
    while ctrl:
        q, b = ctrl.pop()
        if b == 1:
            gates.append(Gate("phase", eta, q, tuple(ctrl)))
            return gates, 0.0
        gates.append(Gate("phase", -eta, q, tuple(ctrl)))
    return gates, eta


def _assemble(n: int, slots: Sequence[Slot]) -> Circuit:
    gates: list[Gate] = []
    global_phase = 0.0
    for k in range(1, n + 1):
        level_slots = [s for s in slots if s.level == k and not s.pruned]
        target = k - 1
        ry = [Gate("ry", s.theta, target, s.controls) for s in level_slots if s.theta != 0.0]
        rz = [Gate("rz", s.phi, target, s.controls) for s in level_slots if s.phi != 0.0]
        ph: list[Gate] = []
        for s in level_slots:
            if s.scalar != 0.0:
                sub, delta = _controlled_scalar_phase(s.scalar / 2.0, s.controls)
                ph.extend(sub)
                global_phase += delta
        gates.extend(ry)
        gates.extend(rz)
        gates.extend(ph)
    return Circuit(n, tuple(gates), global_phase)


def synthesize(target: PureState) -> Circuit:
    """Compile a state-preparation circuit for an arbitrary amplitude vector."""
    plan = synthesis_plan(target, real=False)
    n = _qubit_count_for(target.dim)
    return _assemble(n, plan)


def synthesize_real(target: PureState) -> Circuit:
    """Compile a preparation circuit for a real amplitude vector (Ry only)."""
    plan = synthesis_plan(target, real=True)
    n = _qubit_count_for(target.dim)
    return _assemble(n, plan)


# ---------------------------------------------------------------------------
# Lowering to {X, Ry, Rz, Phase, CX}


def _gray(j: int) -> int:
    return j ^ (j >> 1)


def _walsh_hadamard(v: np.ndarray) -> np.ndarray:
    out = v.astype(float).copy()
    h = 1
    while h < out.size:
        for i in range(0, out.size, 2 * h):
            a = out[i : i + h].copy()
            b = out[i + h : i + 2 * h].copy()
            out[i : i + h] = a + b
            out[i + h : i + 2 * h] = a - b
        h *= 2
    return out


def _emit_with_cx_cancel(gates: Iterable[Gate]) -> list[Gate]:
    out: list[Gate] = []
    for g in gates:
        if out and g.kind == "x" and g.controls and out[-1] == g:
            out.pop()
        else:
            out.append(g)
    return out


def _lower_multiplexed(
    kind: str, target: int, control_qubits: tuple[int, ...], angles: np.ndarray
) -> list[Gate]:
    """Gray-code decomposition of a multiplexed Ry/Rz rotation.

    ``angles[x]`` is the rotation applied when the control qubits (pattern
    bit order = tuple order, most significant first) read ``x``.  The
    transformed angles come from a Walsh-Hadamard transform evaluated at
    Gray-code indices; each slot is a rotation followed by a CX on the
    Gray transition bit, so conjugations realize the sign matrix.
    """
    k = len(control_qubits)
    if k == 0:
        return [Gate(kind, float(angles[0]), target)] if angles[0] != 0.0 else []
    size = 2**k
    wht = _walsh_hadamard(np.asarray(angles, dtype=float))
    raw: list[Gate] = []
    for j in range(size):
        beta = wht[_gray(j)] / size
        if beta != 0.0:
            raw.append(Gate(kind, float(beta), target))
        transition = _gray(j) ^ _gray((j + 1) % size)
        pos = transition.bit_length() - 1  # bit position from the LSB
        ctrl = control_qubits[k - 1 - pos]
        raw.append(Gate("x", 0.0, target, ((ctrl, 1),)))
    return _emit_with_cx_cancel(raw)


def _accumulate_diag(vec: np.ndarray, gate: Gate, n: int) -> None:
    """Add a controlled Phase gate's exponent into a full-register diagonal."""
    t = vec.reshape([2] * n)
    idx: list = [slice(None)] * n
    for q, b in gate.controls:
        idx[q] = b
    idx[gate.target] = 1
    t[tuple(idx)] += gate.angle


def _lower_diagonal(vec: np.ndarray, n: int) -> tuple[list[Gate], float]:
    """Decompose diag(exp(i vec)) into multiplexed Rz layers + global phase."""
    t = vec.reshape([2] * n)
    support = [
        q
        for q in range(n)
        if not np.array_equal(np.take(t, 0, axis=q), np.take(t, 1, axis=q))
    ]
    if not support:
        return [], float(vec.flat[0])
    idx = tuple(slice(None) if q in support else 0 for q in range(n))
    v = np.ascontiguousarray(t[idx]).reshape(-1).astype(float)
    gates: list[Gate] = []
    for level in range(len(support), 0, -1):
        pairs = v.reshape(-1, 2)
        rz_angles = pairs[:, 1] - pairs[:, 0]
        v = (pairs[:, 0] + pairs[:, 1]) / 2.0
        if np.any(rz_angles != 0.0):
            gates.extend(
                _lower_multiplexed(
                    "rz", support[level - 1], tuple(support[: level - 1]), rz_angles
                )
            )
    return gates, float(v[0])


def _pattern_index(gate: Gate, control_qubits: tuple[int, ...]) -> int:
    bits = dict(gate.controls)
    value = 0
    for q in control_qubits:
        value = (value << 1) | bits[q]
    return value


def lower(circuit: Circuit) -> Circuit:
    """Rewrite over {X, Ry, Rz, Phase, CX}; elementary gates pass unchanged.

    The result prepares the same state as the input including the tracked
    global phase.
    """
    n = circuit.qubit_count
    out: list[Gate] = []
    global_phase = circuit.global_phase
    gates = list(circuit.gates)
    i = 0
    while i < len(gates):
        g = gates[i]
        if g.is_elementary():
            out.append(g)
            i += 1
            continue
        if g.kind == "phase":
            # gather all consecutive Phase gates into one diagonal
            vec = np.zeros(2**n)
            while i < len(gates) and gates[i].kind == "phase":
                _accumulate_diag(vec, gates[i], n)
                i += 1
            sub, delta = _lower_diagonal(vec, n)
            out.extend(sub)
            global_phase += delta
            continue
        if g.kind in ("ry", "rz"):
            control_qubits = tuple(sorted(q for q, _ in g.controls))
            sig = (g.kind, g.target, control_qubits)
            angles = np.zeros(2 ** len(control_qubits))
            while i < len(gates):
                h = gates[i]
                if h.is_elementary() or h.kind != g.kind or h.target != g.target:
                    break
                if tuple(sorted(q for q, _ in h.controls)) != control_qubits:
                    break
                angles[_pattern_index(h, control_qubits)] += h.angle
                i += 1
            out.extend(_lower_multiplexed(g.kind, g.target, control_qubits, angles))
            continue
        # controlled X that is not a plain CX: conjugate a controlled phase
        # of pi by Hadamards built as Ry(pi/2) then X
        h_gates = [Gate("ry", math.pi / 2.0, g.target), Gate("x", 0.0, g.target)]
        vec = np.zeros(2**n)
        _accumulate_diag(vec, Gate("phase", math.pi, g.target, g.controls), n)
        sub, delta = _lower_diagonal(vec, n)
        out.extend(h_gates)
        out.extend(sub)
        global_phase += delta
        out.extend(h_gates)
        i += 1
    return Circuit(n, tuple(out), global_phase)


def verify_preparation(circuit: Circuit, target: PureState) -> float:
    """Fidelity |<target| circuit |0...0>|^2."""
    from .simulator import run  # deferred: simulator imports this module

    prepared = run(circuit)
    if prepared.dim != target.dim:
        raise ValueError("target dimension does not match circuit register")
    return float(abs(np.vdot(target.amplitudes, prepared.amplitudes)) ** 2)


def gate_counts(circuit: Circuit) -> Counter:
    """Histogram of gate kinds; controlled rotations count as ``mc-<kind>``."""
    counts: Counter = Counter()
    for g in circuit.gates:
        if not g.controls:
            counts[g.kind] += 1
        elif g.is_elementary():
            counts["cx"] += 1
        else:
            counts[f"mc-{g.kind}"] += 1
    counts["total"] = len(circuit.gates)
    return counts


# ---------------------------------------------------------------------------
# Text formats


def dump_circuit(circuit: Circuit) -> str:
    """One gate per line: kind, angle, target, controls."""
    lines = [f"qubits {circuit.qubit_count}", f"phase {circuit.global_phase!r}"]
    for g in circuit.gates:
        parts = [g.kind]
        if g.kind != "x":
            parts.append(repr(g.angle))
        parts.append(f"q{g.target}")
        parts.extend(f"c{q}={b}" for q, b in g.controls)
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def qasm_export(circuit: Circuit, measure: bool = True) -> str:
    """OpenQASM 2.0 text for an elementary circuit.

    Gates map to ry/rz/x/cx/u1; angles are printed with full round-trip
    precision.  The tracked global phase has no QASM 2.0 representation
    and is omitted.
    """
    lines = [
        "OPENQASM 2.0;",
        'include "qelib1.inc";',
        f"qreg q[{circuit.qubit_count}];",
        f"creg c[{circuit.qubit_count}];",
    ]
    for g in circuit.gates:
        if not g.is_elementary():
            raise ValueError(f"gate {g} is not elementary; lower the circuit first")
        if g.kind == "x" and g.controls:
            lines.append(f"cx q[{g.controls[0][0]}],q[{g.target}];")
        elif g.kind == "x":
            lines.append(f"x q[{g.target}];")
        elif g.kind == "phase":
            lines.append(f"u1({g.angle!r}) q[{g.target}];")
        else:
            lines.append(f"{g.kind}({g.angle!r}) q[{g.target}];")
    if measure:
        for q in range(circuit.qubit_count):
            lines.append(f"measure q[{q}] -> c[{q}];")
    return "\n".join(lines) + "\n"


_QASM_GATE = re.compile(
    r"^(?P<name>ry|rz|u1)\((?P<angle>[^)]+)\)\s+q\[(?P<t>\d+)\];$"
)
_QASM_X = re.compile(r"^x\s+q\[(?P<t>\d+)\];$")
_QASM_CX = re.compile(r"^cx\s+q\[(?P<c>\d+)\],\s*q\[(?P<t>\d+)\];$")
_QASM_QREG = re.compile(r"^qreg\s+\w+\[(?P<n>\d+)\];$")


def qasm_parse(text: str) -> Circuit:
    """Read back the subset emitted by :func:`qasm_export`.

    Measurement and classical-register lines are ignored; the global
    phase is zero by construction.
    """
    n = None
    gates: list[Gate] = []
    for raw in text.splitlines():
        line = raw.strip()
        if (
            not line
            or line.startswith("OPENQASM")
            or line.startswith("include")
            or line.startswith("creg")
            or line.startswith("measure")
            or line.startswith("barrier")
            or line.startswith("//")
        ):
            continue
        m = _QASM_QREG.match(line)
        if m:
            n = int(m.group("n"))
            continue
        m = _QASM_GATE.match(line)
        if m:
            kind = {"ry": "ry", "rz": "rz", "u1": "phase"}[m.group("name")]
            gates.append(Gate(kind, float(m.group("angle")), int(m.group("t"))))
            continue
        m = _QASM_X.match(line)
        if m:
            gates.append(Gate("x", 0.0, int(m.group("t"))))
            continue
        m = _QASM_CX.match(line)
        if m:
            gates.append(Gate("x", 0.0, int(m.group("t")), ((int(m.group("c")), 1),)))
            continue
        raise ValueError(f"unsupported QASM line: {line!r}")
    if n is None:
        raise ValueError("missing qreg declaration")
    return Circuit(n, tuple(gates), 0.0)
