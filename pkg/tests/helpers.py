"""Shared random-object generators for the test suite."""

import numpy as np

from kraussim.channels import (
    KrausChannel,
    WignerBoost,
    bit_flip,
    bit_phase_flip,
    depolarizing,
    generalized_amplitude_damping,
    heisenberg_weyl,
    hw_dephasing,
    pauli_channel,
    phase_damping,
    phase_flip,
    qutrit_amplitude_damping,
    spin_boost_channel,
    wigner_channel,
)
from kraussim.numerics import DensityMatrix, PureState


def random_pure(rng, dim):
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return PureState(v / np.linalg.norm(v))


def random_density(rng, dim, rank=None):
    rank = rank or dim
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real)


def random_unitary(rng, dim):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_unit_vector(rng):
    v = rng.standard_normal(3)
    return v / np.linalg.norm(v)


def random_boost(rng):
    return WignerBoost(
        rapidity=rng.uniform(0.1, 3.0),
        boost_direction=random_unit_vector(rng),
        momentum_rapidity=rng.uniform(0.1, 3.0),
        momentum_directions=(random_unit_vector(rng),),
    )


def random_prob_vector(rng, n):
    p = rng.uniform(0.0, 1.0, n)
    return p / p.sum()


# (label, random-draw factory, system dim) for every catalog constructor
CATALOG_DRAWS = (
    ("pauli", lambda rng: pauli_channel(*random_prob_vector(rng, 4)), 2),
    ("bit_flip", lambda rng: bit_flip(rng.uniform(0, 1)), 2),
    ("phase_flip", lambda rng: phase_flip(rng.uniform(0, 1)), 2),
    ("bit_phase_flip", lambda rng: bit_phase_flip(rng.uniform(0, 1)), 2),
    ("depolarizing", lambda rng: depolarizing(rng.uniform(0, 1)), 2),
    ("phase_damping", lambda rng: phase_damping(rng.uniform(0, 1)), 2),
    (
        "generalized_amplitude_damping",
        lambda rng: generalized_amplitude_damping(rng.uniform(0, 1), rng.uniform(0, 1)),
        2,
    ),
    ("hw_dephasing", lambda rng: hw_dephasing(3, rng.uniform(0, 1)), 3),
    (
        "heisenberg_weyl",
        lambda rng: heisenberg_weyl(3, random_prob_vector(rng, 9).reshape(3, 3)),
        3,
    ),
    ("qutrit_amplitude_damping", lambda rng: qutrit_amplitude_damping(rng.uniform(0, 1)), 3),
    ("wigner", lambda rng: wigner_channel(random_boost(rng)), 2),
    ("spin_boost", lambda rng: spin_boost_channel(rng.uniform(0, np.pi)), 2),
)

QUBIT_CHANNEL_DRAWS = tuple(t for t in CATALOG_DRAWS if t[2] == 2)


def random_kraus_channel(rng, dim, n_ops):
    """Generic CPTP channel from the first block column of a random unitary."""
    u = random_unitary(rng, dim * n_ops)
    ops = tuple(u[i * dim : (i + 1) * dim, :dim] for i in range(n_ops))
    return KrausChannel(ops, label="random")


def dense_gate(gate, n):
    """Brute-force matrix of one gate, built per basis state."""
    dim = 2**n
    m = np.zeros((dim, dim), dtype=complex)
    g = gate.matrix()
    for col in range(dim):
        bits = [(col >> (n - 1 - q)) & 1 for q in range(n)]
        if all(bits[q] == b for q, b in gate.controls):
            t = bits[gate.target]
            for out_bit in (0, 1):
                row = col if out_bit == t else col ^ (1 << (n - 1 - gate.target))
                m[row, col] += g[out_bit, t]
        else:
            m[col, col] = 1.0
    return m
