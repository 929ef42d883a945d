"""Statevector simulator with shot sampling and a readout error model.

Gates are applied in place by reshaping the amplitude vector to one axis
per qubit and updating the two-component slice selected by the control
bits; no full 2^n x 2^n matrices are ever formed.  Qubit 0 is the most
significant bit of basis labels, and bitstrings produced by sampling
follow the same convention.

Randomness comes from the counter-based Philox generator.  Seeds for
independent sampling points derive from a root seed plus an index path
(:func:`derive_rng`), so results are reproducible and independent of
evaluation order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .numerics import PureState
from .qsp import Circuit, Gate

__all__ = [
    "ShotCounts",
    "ReadoutModel",
    "run",
    "sample",
    "apply_readout_noise",
    "mitigate",
    "make_rng",
    "derive_rng",
    "circuit_unitary",
]

RUN_MAX_QUBITS = 20


def make_rng(seed: int) -> np.random.Generator:
    """Philox generator for a root seed."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def derive_rng(seed: int, *path: int) -> np.random.Generator:
    """Philox generator for a (seed, index path) pair.

    Distinct paths give statistically independent streams; the derivation
    is deterministic, so per-point streams do not depend on sweep order.
    """
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(seed, spawn_key=tuple(path)))
    )


def _apply_gate(state: np.ndarray, gate: Gate, n: int) -> None:
    view = state.reshape([2] * n)
    idx: list = [slice(None)] * n
    for q, b in gate.controls:
        idx[q] = b
    sub = view[tuple(idx)]
    # integer indexing collapsed the control axes; recompute target position
    axis = gate.target - sum(1 for q, _ in gate.controls if q < gate.target)
    sub = np.moveaxis(sub, axis, -1)
    sub[...] = sub @ gate.matrix().T


def run(circuit: Circuit) -> PureState:
    """Apply the circuit to |0...0> and return the final statevector."""
    n = circuit.qubit_count
    if n > RUN_MAX_QUBITS:
        raise ValueError(f"{n} qubits exceeds the simulator limit {RUN_MAX_QUBITS}")
    state = np.zeros(2**n, dtype=np.complex128)
    state[0] = 1.0
    for gate in circuit.gates:
        _apply_gate(state, gate, n)
    if circuit.global_phase != 0.0:
        state *= np.exp(1j * circuit.global_phase)
    return PureState(state)


def circuit_unitary(circuit: Circuit) -> np.ndarray:
    """Dense unitary of a small circuit (column k = action on |k>)."""
    n = circuit.qubit_count
    if n > 10:
        raise ValueError("dense unitary limited to 10 qubits")
    dim = 2**n
    cols = np.eye(dim, dtype=np.complex128)
    for k in range(dim):
        state = cols[:, k].copy()
        for gate in circuit.gates:
            _apply_gate(state, gate, n)
        cols[:, k] = state
    return cols * np.exp(1j * circuit.global_phase)


@dataclass(frozen=True)
class ShotCounts:
    """Histogram of measured bitstrings (most significant qubit first)."""

    qubit_count: int
    shots: int
    histogram: dict[str, int]

    def __post_init__(self) -> None:
        if self.shots < 1:
            raise ValueError("shots must be positive")
        total = 0
        for key, count in self.histogram.items():
            if len(key) != self.qubit_count or set(key) - {"0", "1"}:
                raise ValueError(f"bad bitstring key {key!r}")
            if count < 0:
                raise ValueError(f"negative count for {key!r}")
            total += count
        if total != self.shots:
            raise ValueError(f"histogram total {total} != shots {self.shots}")
        object.__setattr__(self, "histogram", dict(self.histogram))

    def frequencies(self) -> dict[str, float]:
        return {k: v / self.shots for k, v in self.histogram.items()}

    def to_json(self) -> str:
        return json.dumps(
            {"shots": self.shots, "counts": self.histogram}, sort_keys=True
        )

    @classmethod
    def from_json(cls, text: str) -> "ShotCounts":
        data = json.loads(text)
        counts = {str(k): int(v) for k, v in data["counts"].items()}
        if not counts:
            raise ValueError("empty counts")
        width = len(next(iter(counts)))
        return cls(qubit_count=width, shots=int(data["shots"]), histogram=counts)


def _as_rng(seed: int | np.random.Generator) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else make_rng(seed)


def sample(state: PureState, shots: int, seed: int | np.random.Generator) -> ShotCounts:
    """Multinomial sampling of computational-basis outcomes.

    ``seed`` is a root seed or an already-derived generator stream.
    """
    if shots < 1:
        raise ValueError("shots must be positive")
    n = state.dim.bit_length() - 1
    if 2**n != state.dim:
        raise ValueError("state dimension is not a power of two")
    probs = np.abs(state.amplitudes) ** 2
    probs = probs / probs.sum()
    rng = _as_rng(seed)
    draws = rng.multinomial(shots, probs)
    histogram = {
        format(i, f"0{n}b"): int(c) for i, c in enumerate(draws) if c > 0
    }
    return ShotCounts(qubit_count=n, shots=shots, histogram=histogram)


@dataclass(frozen=True)
class ReadoutModel:
    """Independent per-qubit readout flips.

    ``e0[q]`` is the probability of reading 1 when qubit q is 0, and
    ``e1[q]`` of reading 0 when it is 1.  Scalars broadcast over all
    qubits.  Both probabilities are capped at 0.5 so the confusion matrix
    stays diagonally dominant.
    """

    e0: tuple[float, ...] | float
    e1: tuple[float, ...] | float

    def __post_init__(self) -> None:
        for name in ("e0", "e1"):
            value = getattr(self, name)
            if isinstance(value, (int, float)):
                value = float(value)
                vals = (value,)
            else:
                value = tuple(float(v) for v in value)
                vals = value
            for v in vals:
                if not 0.0 <= v <= 0.5:
                    raise ValueError(f"{name} entry {v} outside [0, 0.5]")
            object.__setattr__(self, name, value)

    def arrays(self, qubit_count: int) -> tuple[np.ndarray, np.ndarray]:
        out = []
        for value in (self.e0, self.e1):
            if isinstance(value, float):
                out.append(np.full(qubit_count, value))
            else:
                if len(value) != qubit_count:
                    raise ValueError(
                        f"model covers {len(value)} qubits, circuit has {qubit_count}"
                    )
                out.append(np.asarray(value))
        return out[0], out[1]


def apply_readout_noise(
    counts: ShotCounts, model: ReadoutModel, seed: int | np.random.Generator
) -> ShotCounts:
    """Flip each recorded bit independently with the model's probabilities."""
    e0, e1 = model.arrays(counts.qubit_count)
    rng = _as_rng(seed)
    flipped: dict[str, int] = {}
    for key in sorted(counts.histogram):
        count = counts.histogram[key]
        bits = np.array([int(b) for b in key], dtype=np.int8)
        flip_prob = np.where(bits == 0, e0, e1)
        flips = rng.random((count, bits.size)) < flip_prob
        noisy = bits[None, :] ^ flips
        for row in noisy:
            out = "".join("1" if b else "0" for b in row)
            flipped[out] = flipped.get(out, 0) + 1
    return ShotCounts(counts.qubit_count, counts.shots, flipped)


def mitigate(counts: ShotCounts, model: ReadoutModel) -> dict[str, float]:
    """Invert the tensor-product confusion matrix and project to the simplex.

    Per qubit the confusion matrix is [[1-e0, e1], [e0, 1-e1]] (column =
    true bit); its inverse is applied along each axis of the frequency
    tensor.  Negative quasi-probabilities are clipped to zero and the
    remainder renormalized.  A qubit with e0 + e1 = 1 has a singular
    confusion matrix and raises.
    """
    n = counts.qubit_count
    e0, e1 = model.arrays(n)
    freq = np.zeros(2**n)
    for key, count in counts.histogram.items():
        freq[int(key, 2)] = count / counts.shots
    tensor = freq.reshape([2] * n)
    for q in range(n):
        det = 1.0 - e0[q] - e1[q]
        if abs(det) < 1e-12:
            raise ValueError(f"confusion matrix for qubit {q} is singular (e0 + e1 = 1)")
        conf = np.array([[1.0 - e0[q], e1[q]], [e0[q], 1.0 - e1[q]]])
        inv = np.linalg.inv(conf)
        tensor = np.moveaxis(
            np.tensordot(inv, tensor, axes=([1], [q])), 0, q
        )
    quasi = tensor.reshape(-1)
    clipped = np.clip(quasi, 0.0, None)
    total = clipped.sum()
    if total <= 0.0:
        raise ValueError("mitigation clipped all probability mass")
    probs = clipped / total
    return {
        format(i, f"0{n}b"): float(p) for i, p in enumerate(probs) if p > 0.0
    }
