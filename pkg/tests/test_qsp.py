import numpy as np
import pytest

from helpers import random_pure
from kraussim.numerics import PureState, basis_state
from kraussim.qsp import (
    Circuit,
    Gate,
    dump_circuit,
    gate_counts,
    lower,
    qasm_export,
    qasm_parse,
    synthesis_plan,
    synthesize,
    synthesize_real,
    verify_preparation,
)
from kraussim.simulator import circuit_unitary, run


def test_plan_slot_count_is_full_binary_tree():
    rng = np.random.default_rng(300)
    for n in range(1, 6):
        plan = synthesis_plan(random_pure(rng, 2**n))
        assert len(plan) == 2**n - 1
        for level in range(1, n + 1):
            assert sum(1 for s in plan if s.level == level) == 2 ** (level - 1)


def test_one_qubit_real_state_single_rotation():
    circuit = synthesize_real(PureState(np.array([np.sqrt(0.3), np.sqrt(0.7)])))
    assert len(circuit.gates) == 1
    (gate,) = circuit.gates
    assert gate.kind == "ry" and gate.controls == ()
    assert abs(gate.angle - 1.9823131728623846) < 1e-12
    assert circuit.global_phase == 0.0


def test_basis_state_needs_no_gates():
    circuit = synthesize(basis_state(8, 0))
    assert circuit.gates == ()
    assert verify_preparation(circuit, basis_state(8, 0)) > 1 - 1e-12


def test_zero_subtree_is_pruned():
    # no support on the qubit-0 = 0 half, so that subtree's slot is dead
    target = PureState(np.array([0.0, 0.0, 1.0, 1.0]) / np.sqrt(2))
    plan = synthesis_plan(target)
    assert sum(1 for s in plan if s.pruned) == 1
    circuit = synthesize(target)
    assert len(circuit.gates) == 2  # ry on qubit 0, one controlled ry
    assert verify_preparation(circuit, target) > 1 - 1e-12


def test_bell_style_state_two_gates():
    target = PureState(np.array([1.0, 0.0, 0.0, 1.0]) / np.sqrt(2))
    circuit = synthesize(target)
    assert len(circuit.gates) == 2
    assert verify_preparation(circuit, target) > 1 - 1e-12
    lowered = lower(circuit)
    assert verify_preparation(lowered, target) > 1 - 1e-12


def test_round_trip_random_complex_states():
    rng = np.random.default_rng(301)
    for n in range(1, 6):
        for _ in range(10):
            target = random_pure(rng, 2**n)
            circuit = synthesize(target)
            assert verify_preparation(circuit, target) >= 1 - 1e-10
            assert verify_preparation(lower(circuit), target) >= 1 - 1e-10


def test_lowering_preserves_full_unitary():
    rng = np.random.default_rng(302)
    for n in (2, 3, 4):
        circuit = synthesize(random_pure(rng, 2**n))
        dense_pre = circuit_unitary(circuit)
        dense_post = circuit_unitary(lower(circuit))
        assert np.abs(dense_pre - dense_post).max() < 1e-9


def test_single_controlled_ry_lowering_pattern():
    theta = 0.813
    circuit = Circuit(2, (Gate("ry", theta, target=1, controls=((0, 1),)),))
    lowered = lower(circuit)
    kinds = [(g.kind, g.target, g.controls) for g in lowered.gates]
    assert kinds == [
        ("ry", 1, ()),
        ("x", 1, ((0, 1),)),
        ("ry", 1, ()),
        ("x", 1, ((0, 1),)),
    ]
    assert abs(lowered.gates[0].angle - theta / 2) < 1e-12
    assert abs(lowered.gates[2].angle + theta / 2) < 1e-12
    assert np.abs(circuit_unitary(circuit) - circuit_unitary(lowered)).max() < 1e-12


def test_real_state_lowered_gate_budget():
    # generic positive 3-qubit amplitudes: 1 + 2 + 4 rotations, 2 + 4 CX
    rng = np.random.default_rng(303)
    amps = rng.uniform(0.1, 1.0, 8)
    target = PureState(amps / np.linalg.norm(amps))
    lowered = lower(synthesize_real(target))
    counts = gate_counts(lowered)
    assert counts["ry"] == 7 and counts["cx"] == 6 and counts["total"] == 13
    assert all(len(g.controls) <= 1 for g in lowered.gates)
    assert verify_preparation(lowered, target) >= 1 - 1e-10


def test_lower_keeps_elementary_gates_untouched():
    gates = (
        Gate("x", 0.0, 0),
        Gate("x", 0.0, 1, ((0, 1),)),
        Gate("ry", 0.4, 1),
        Gate("rz", -0.9, 0),
        Gate("phase", 0.3, 1),
    )
    circuit = Circuit(2, gates, global_phase=0.2)
    lowered = lower(circuit)
    assert lowered.gates == gates
    assert lowered.global_phase == 0.2


def test_multi_controlled_x_lowering():
    circuit = Circuit(3, (Gate("x", 0.0, 2, ((0, 1), (1, 1))),))
    dense = circuit_unitary(lower(circuit))
    expected = np.eye(8, dtype=complex)
    expected[[6, 7]] = expected[[7, 6]]
    assert np.abs(dense - expected).max() < 1e-9


def test_anticontrol_multi_controlled_rotation():
    circuit = Circuit(3, (Gate("ry", 1.1, 2, ((0, 0), (1, 1))),))
    assert np.abs(circuit_unitary(lower(circuit)) - circuit_unitary(circuit)).max() < 1e-9


def test_controlled_phase_lowering():
    circuit = Circuit(
        2,
        (
            Gate("phase", 0.7, 1, ((0, 1),)),
            Gate("phase", -0.3, 0, ((1, 0),)),
        ),
    )
    assert np.abs(circuit_unitary(lower(circuit)) - circuit_unitary(circuit)).max() < 1e-9


def test_gate_validation():
    with pytest.raises(ValueError):
        Gate("hadamard", 0.0, 0)
    with pytest.raises(ValueError):
        Gate("ry", 0.1, 0, ((0, 1),))  # control collides with target
    with pytest.raises(ValueError):
        Gate("ry", 0.1, 1, ((0, 2),))  # activation must be a bit
    with pytest.raises(ValueError):
        Circuit(2, (Gate("x", 0.0, 5),))


def test_synthesis_rejects_non_power_of_two_lengths():
    with pytest.raises(ValueError):
        synthesize(PureState(np.array([0.6, 0.6, np.sqrt(1 - 0.72)])))


def test_dump_circuit_format():
    circuit = synthesize(PureState(np.array([0.0, 0.0, 1.0, 1.0]) / np.sqrt(2)))
    text = dump_circuit(circuit)
    lines = text.strip().splitlines()
    assert lines[0] == "qubits 2"
    assert lines[1].startswith("phase ")
    assert len(lines) == 2 + len(circuit.gates)
    assert lines[2].startswith("ry ")
    assert lines[3].endswith("c0=1")


def test_qasm_round_trip():
    rng = np.random.default_rng(304)
    target = random_pure(rng, 8)
    lowered = lower(synthesize(target))
    text = qasm_export(lowered, measure=False)
    head = text.splitlines()
    assert head[0] == "OPENQASM 2.0;"
    assert head[1] == 'include "qelib1.inc";'
    assert "measure" not in text
    parsed = qasm_parse(text)
    assert parsed.qubit_count == lowered.qubit_count
    assert parsed.gates == lowered.gates
    assert verify_preparation(parsed, target) >= 1 - 1e-10


def test_qasm_angles_keep_full_precision():
    circuit = Circuit(1, (Gate("ry", 2 * np.arctan2(np.sqrt(0.7), np.sqrt(0.3)), 0),))
    text = qasm_export(circuit, measure=True)
    assert "1.9823131728623846" in text
    assert text.count("measure") == 1


def test_qasm_export_rejects_multi_controlled_gates():
    circuit = Circuit(3, (Gate("ry", 0.5, 2, ((0, 1), (1, 1))),))
    with pytest.raises(ValueError):
        qasm_export(circuit)


def test_full_unitary_includes_tracked_phase():
    # scalar phases folded out of controlled-phase lowering stay in the result
    circuit = Circuit(1, (), global_phase=0.77)
    out = run(circuit)
    assert abs(out.amplitudes[0] - np.exp(0.77j)) < 1e-12
