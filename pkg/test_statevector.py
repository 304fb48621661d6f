import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.stats import chisquare, unitary_group

from app.core import gates
from app.core.exceptions import DomainError, GateValidationError, ImpossibleOutcomeError
from app.core.statevector import (
    GateMatrix,
    Statevector,
    apply_controlled,
    apply_unitary,
    fidelity,
    init_basis_state,
    marginal_probabilities,
    postselect,
    probabilities,
    sample,
)
from app.schemas.layout import RegisterLayout


def dense_operator(matrix: np.ndarray, targets, num_qubits: int, controls=()) -> np.ndarray:
    """Full 2^q x 2^q operator built entry by entry; targets[j] is bit j of the gate index"""
    dim = 1 << num_qubits
    out = np.zeros((dim, dim), dtype=complex)
    mask = sum(1 << t for t in targets)
    for col in range(dim):
        if any(not (col >> c) & 1 for c in controls):
            out[col, col] = 1.0
            continue
        sub_col = sum(((col >> t) & 1) << j for j, t in enumerate(targets))
        for sub_row in range(1 << len(targets)):
            row = col & ~mask
            for j, t in enumerate(targets):
                row |= ((sub_row >> j) & 1) << t
            out[row, col] = matrix[sub_row, sub_col]
    return out


def random_state(rng, num_qubits: int) -> Statevector:
    v = rng.normal(size=1 << num_qubits) + 1j * rng.normal(size=1 << num_qubits)
    return Statevector(v / np.linalg.norm(v))


def test_gate_matrix_rejects_non_unitary():
    with pytest.raises(GateValidationError):
        GateMatrix([[1, 1], [0, 1]])
    with pytest.raises(GateValidationError):
        GateMatrix(np.eye(3))
    with pytest.raises(GateValidationError):
        GateMatrix([[np.nan, 0], [0, 1]])


def test_gate_matrix_is_read_only():
    gate = gates.hadamard()
    with pytest.raises(ValueError):
        gate.matrix[0, 0] = 0


def test_statevector_validation():
    with pytest.raises(DomainError):
        Statevector([1.0, 0.0, 0.0])
    with pytest.raises(DomainError):
        Statevector([1.0, 1.0])
    with pytest.raises(DomainError):
        Statevector([1.0, 0.0], layout=RegisterLayout(nb=1, n=2))


def test_init_basis_state(worked_layout):
    state = init_basis_state(worked_layout, 8)
    assert state.amplitudes[8] == 1.0
    assert worked_layout.ket_label(8) == "|1000>"
    with pytest.raises(DomainError):
        init_basis_state(worked_layout, 16)


def test_layout_indexing(worked_layout):
    assert worked_layout.basis_index(b=1, c=0, a=1) == 9
    assert worked_layout.split_index(13) == (1, 2, 1)
    assert worked_layout.clock_qubits == [1, 2]
    assert worked_layout.b_qubits == [3]
    assert worked_layout.ket_label(9) == "|1001>"


def test_x_on_qubit_zero_flips_lsb():
    state = apply_unitary(Statevector.zeros(3), gates.pauli_x(), [0])
    assert_allclose(state.amplitudes, np.eye(8)[1])
    state = apply_unitary(Statevector.zeros(3), gates.pauli_x(), [2])
    assert_allclose(state.amplitudes, np.eye(8)[4])


def test_apply_unitary_matches_dense_operator(rng):
    state = random_state(rng, 4)
    for targets in ([0], [3], [1, 2], [2, 0], [3, 1, 0]):
        matrix = unitary_group.rvs(1 << len(targets), random_state=rng)
        expected = dense_operator(matrix, targets, 4) @ state.amplitudes
        result = apply_unitary(state, GateMatrix(matrix), targets)
        assert_allclose(result.amplitudes, expected, atol=1e-12)


def test_apply_controlled_matches_dense_operator(rng):
    state = random_state(rng, 4)
    for controls, targets in (([0], [1]), ([3], [0]), ([1, 2], [0]), ([0], [3, 2])):
        matrix = unitary_group.rvs(1 << len(targets), random_state=rng)
        expected = dense_operator(matrix, targets, 4, controls) @ state.amplitudes
        result = apply_controlled(state, GateMatrix(matrix), controls, targets)
        assert_allclose(result.amplitudes, expected, atol=1e-12)


def test_apply_controlled_rejects_overlap():
    with pytest.raises(DomainError):
        apply_controlled(Statevector.zeros(2), gates.pauli_x(), [0], [0])


def test_apply_unitary_errors():
    state = Statevector.zeros(2)
    with pytest.raises(DomainError):
        apply_unitary(state, gates.hadamard(), [2])
    with pytest.raises(DomainError):
        apply_unitary(state, gates.swap(), [1, 1])
    with pytest.raises(DomainError):
        apply_unitary(state, gates.swap(), [0])


def test_norm_preserved(rng):
    state = random_state(rng, 5)
    for _ in range(20):
        targets = list(rng.choice(5, size=2, replace=False))
        state = apply_unitary(state, GateMatrix(unitary_group.rvs(4, random_state=rng)), targets)
    assert abs(state.norm_squared() - 1.0) < 1e-10


def test_marginal_probabilities_bit_order():
    # |q2 q1 q0> = |011>
    state = Statevector(np.eye(8)[3])
    assert_allclose(marginal_probabilities(state, [0, 2]), [0, 1, 0, 0])
    assert_allclose(marginal_probabilities(state, [2, 1]), [0, 0, 1, 0])
    with pytest.raises(DomainError):
        marginal_probabilities(state, [])


def test_postselect():
    state = apply_unitary(Statevector.zeros(2), gates.hadamard(), [0])
    collapsed, probability = postselect(state, 0, 1)
    assert probability == pytest.approx(0.5)
    assert_allclose(collapsed.amplitudes, [0, 1, 0, 0], atol=1e-15)

    with pytest.raises(ImpossibleOutcomeError):
        postselect(state, 1, 1)


def test_sample_is_deterministic_per_seed():
    state = apply_unitary(Statevector.zeros(2), gates.hadamard(), [1])
    first = sample(state, [0, 1], shots=500, seed=11)
    assert first == sample(state, [0, 1], shots=500, seed=11)
    assert set(first) <= {0, 2}
    assert sum(first.values()) == 500


def test_sample_single_shot():
    state = apply_unitary(Statevector.zeros(1), gates.hadamard(), [0])
    counts = sample(state, [0], shots=1, seed=3)
    assert list(counts.values()) == [1]
    with pytest.raises(DomainError):
        sample(state, [0], shots=0, seed=3)


def test_sample_distribution_chisquare(rng):
    state = random_state(rng, 3)
    probs = probabilities(state)
    shots = 20000
    counts = sample(state, [0, 1, 2], shots=shots, seed=99)
    observed = np.array([counts.get(k, 0) for k in range(8)])
    _, p_value = chisquare(observed, probs * shots)
    assert p_value > 1e-4


def test_fidelity():
    plus = np.array([1, 1]) / np.sqrt(2)
    assert fidelity(plus, 1j * plus) == pytest.approx(1.0)
    assert fidelity([1, 0], [0, 1]) == 0.0
    assert fidelity(Statevector([1, 0]), [2, 0]) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        fidelity([1, 0], [1, 0, 0, 0])
    with pytest.raises(DomainError):
        fidelity([0, 0], [1, 0])


def test_outcome_probabilities_sum_to_one(rng):
    for num_qubits in (1, 3, 5):
        for _ in range(10):
            state = random_state(rng, num_qubits)
            for qubit in range(num_qubits):
                p0, p1 = marginal_probabilities(state, [qubit])
                assert p0 + p1 == pytest.approx(1.0, abs=1e-12)
                assert p0 >= 0 and p1 >= 0


@pytest.mark.parametrize("num_qubits", [2, 3, 4])
def test_apply_controlled_on_every_basis_state(rng, num_qubits):
    qubits = list(range(num_qubits))
    for _ in range(5):
        picked = list(rng.permutation(qubits))
        split = int(rng.integers(1, num_qubits))
        controls, targets = picked[:split], picked[split:][:2]
        matrix = unitary_group.rvs(1 << len(targets), random_state=rng)
        dense = dense_operator(matrix, targets, num_qubits, controls)
        for index in range(1 << num_qubits):
            basis = Statevector(np.eye(1 << num_qubits)[index])
            result = apply_controlled(basis, GateMatrix(matrix), controls, targets)
            assert_allclose(result.amplitudes, dense[:, index], atol=1e-12)


@pytest.mark.parametrize(
    "amplitudes",
    [
        np.sqrt(np.arange(1, 9) / 36),
        np.full(8, 1 / np.sqrt(8)) * np.exp(1j * np.arange(8)),
        np.sqrt([0.5, 0.2, 0.1, 0.05, 0.05, 0.04, 0.03, 0.03]),
    ],
)
def test_sample_matches_born_rule_at_scale(amplitudes):
    state = Statevector(amplitudes)
    shots = 1_000_000
    counts = sample(state, [0, 1, 2], shots=shots, seed=2024)
    observed = np.array([counts.get(k, 0) for k in range(8)])
    _, p_value = chisquare(observed, probabilities(state) * shots)
    assert p_value > 1e-4
