import itertools

import numpy as np
import pytest

from helpers import dense_gate, random_density, random_pure
from kraussim.numerics import DensityMatrix, PureState
from kraussim.simulator import sample
from kraussim.tomography import (
    basis_rotation,
    exact_expectations,
    expectations,
    extract_embedded,
    project_psd,
    reconstruct,
    settings_for,
)

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)


def test_settings_enumeration():
    t = settings_for((0, 1))
    assert len(t.settings) == 9
    assert set(t.settings) == set(itertools.product("XYZ", repeat=2))
    assert t.rotations[("Z", "Z")] == ()


def test_basis_rotations_map_pauli_to_z():
    # measuring P in the computational basis requires R with R P R^dag = Z
    for pauli, matrix in (("X", X), ("Y", Y), ("Z", Z)):
        gates = basis_rotation(pauli, 0)
        r = np.eye(2, dtype=complex)
        for g in gates:
            r = g.matrix() @ r
        assert np.abs(r @ matrix @ r.conj().T - Z).max() < 1e-12


def test_exact_reconstruction_round_trip():
    rng = np.random.default_rng(500)
    for dim in (2, 4):
        for _ in range(10):
            rho = random_density(rng, dim)
            result = reconstruct(exact_expectations(rho))
            assert np.abs(result.projected.matrix - rho.matrix).max() < 1e-10
            assert np.abs(result.raw - rho.matrix).max() < 1e-10


def test_reconstruct_requires_every_pauli_string():
    rho = random_density(np.random.default_rng(1), 2)
    values = exact_expectations(rho)
    del values["X"]
    with pytest.raises(ValueError):
        reconstruct(values)


def test_expectations_average_compatible_settings():
    flat = {"".join(b): 0.25 for b in itertools.product("01", repeat=2)}
    per_setting = {s: dict(flat) for s in itertools.product("XYZ", repeat=2)}
    per_setting[("X", "X")] = {"00": 1.0}
    per_setting[("X", "Y")] = {"10": 1.0}
    per_setting[("X", "Z")] = {"00": 0.75, "10": 0.25}
    values, errors = expectations(per_setting, system_qubits=(0, 1))
    assert abs(values["XI"] - (1.0 - 1.0 + 0.5) / 3.0) < 1e-12
    assert values["II"] == 1.0
    assert errors["XI"] is None  # frequencies carry no shot totals


def test_expectations_marginalize_ancilla_bits():
    rng = np.random.default_rng(501)
    sys_state = random_pure(rng, 4)
    anc = np.array([np.sqrt(0.3), np.sqrt(0.7)])
    joint = np.kron(sys_state.amplitudes, anc)
    tset = settings_for((0, 1))
    per_setting = {}
    for setting in tset.settings:
        state = joint.copy()
        for g in tset.rotations[setting]:
            state = dense_gate(g, 3) @ state
        probs = np.abs(state) ** 2
        per_setting[setting] = {format(i, "03b"): float(p) for i, p in enumerate(probs)}
    values, _ = expectations(per_setting, system_qubits=(0, 1))
    result = reconstruct(values)
    expected = np.outer(sys_state.amplitudes, sys_state.amplitudes.conj())
    assert np.abs(result.projected.matrix - expected).max() < 1e-10


def test_sampled_reconstruction_close_to_truth():
    rng = np.random.default_rng(502)
    target = random_pure(rng, 4)
    rho_true = np.outer(target.amplitudes, target.amplitudes.conj())
    tset = settings_for((0, 1))
    per_setting = {}
    for k, setting in enumerate(tset.settings):
        # rotate analytically, then draw shots
        state = target.amplitudes.copy()
        for g in tset.rotations[setting]:
            state = dense_gate(g, 2) @ state
        per_setting[setting] = sample(PureState(state), 8192, seed=1000 + k)
    values, errors = expectations(per_setting, system_qubits=(0, 1))
    result = reconstruct(values, errors, shots_per_setting=8192)
    assert np.abs(result.projected.matrix - rho_true).max() < 0.05
    assert all(e is not None for e in result.stderrs.values())


def test_psd_projection_redistributes_negative_mass():
    projected = project_psd(np.diag([1.2, -0.2]))
    assert np.abs(projected - np.diag([1.0, 0.0])).max() < 1e-12


def test_psd_projection_is_idempotent_and_trace_preserving():
    rng = np.random.default_rng(503)
    g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    h = g + g.conj().T
    h = h / np.trace(h).real  # unit trace, typically indefinite
    p1 = project_psd(h)
    p2 = project_psd(p1)
    assert abs(np.trace(p1).real - 1.0) < 1e-12
    assert np.linalg.eigvalsh(p1).min() > -1e-12
    assert np.abs(p1 - p2).max() < 1e-12


def test_psd_projection_leaves_valid_states_alone():
    rho = random_density(np.random.default_rng(504), 3)
    assert np.abs(project_psd(rho.matrix) - rho.matrix).max() < 1e-12


def test_extract_embedded_block():
    rho3 = random_density(np.random.default_rng(505), 3)
    padded = np.zeros((4, 4), dtype=complex)
    padded[:3, :3] = rho3.matrix
    extracted, dropped = extract_embedded(DensityMatrix(padded), 3)
    assert dropped == 0.0
    assert np.abs(extracted.matrix - rho3.matrix).max() < 1e-12


def test_extract_embedded_reports_leaked_mass():
    mat = np.diag([0.5, 0.3, 0.1, 0.1]).astype(complex)
    extracted, dropped = extract_embedded(DensityMatrix(mat), 3)
    assert abs(dropped - 0.1) < 1e-12
    assert abs(np.trace(extracted.matrix).real - 1.0) < 1e-12
    assert np.abs(np.diag(extracted.matrix) - np.array([0.5, 0.3, 0.1]) / 0.9).max() < 1e-12
