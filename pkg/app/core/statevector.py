"""
Dense statevector primitives.

Basis indices are little-endian: qubit k is bit k of the index. Internally an
amplitude array of length 2^q is viewed as a rank-q tensor of shape (2,)*q in
C order, so qubit k lives on tensor axis q-1-k. Gates are contracted onto
their target axes; the full 2^q x 2^q operator is never built.
"""
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np
import structlog

from app.core.config import get_settings
from app.core.exceptions import DomainError, GateValidationError, ImpossibleOutcomeError
from app.schemas.layout import RegisterLayout

logger = structlog.get_logger(__name__)


class GateMatrix:
    """A 2^k x 2^k unitary, validated once at construction"""

    __slots__ = ("_matrix", "num_qubits", "name")

    def __init__(self, matrix, name: str = "unitary", tolerance: Optional[float] = None):
        m = np.array(matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise GateValidationError(f"{name}: gate matrix must be square, got shape {m.shape}")
        dim = m.shape[0]
        if dim < 2 or dim & (dim - 1):
            raise GateValidationError(f"{name}: gate dimension must be a power of two >= 2, got {dim}")
        if not np.all(np.isfinite(m)):
            raise GateValidationError(f"{name}: gate matrix has non-finite entries")

        tol = tolerance if tolerance is not None else get_settings().UNITARITY_TOLERANCE
        deviation = float(np.max(np.abs(m.conj().T @ m - np.eye(dim))))
        if deviation >= tol:
            raise GateValidationError(
                f"{name} is not unitary (max |M^dag M - I| = {deviation:.3e}, tolerance {tol:.0e})"
            )

        m.setflags(write=False)
        self._matrix = m
        self.num_qubits = dim.bit_length() - 1
        self.name = name

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def dimension(self) -> int:
        return self._matrix.shape[0]

    def __repr__(self) -> str:
        return f"GateMatrix(name={self.name!r}, num_qubits={self.num_qubits})"


class Statevector:
    """
    Unit-norm amplitude vector over 2^q basis states.

    Instances are immutable: the amplitude buffer is read-only and every
    operation in this module returns a new Statevector.
    """

    __slots__ = ("_amplitudes", "num_qubits", "layout")

    def __init__(self, amplitudes, layout: Optional[RegisterLayout] = None):
        amps = np.array(amplitudes, dtype=np.complex128)
        if amps.ndim != 1:
            raise DomainError(f"amplitudes must be one-dimensional, got shape {amps.shape}")
        dim = amps.shape[0]
        if dim < 2 or dim & (dim - 1):
            raise DomainError(f"statevector length must be a power of two >= 2, got {dim}")

        num_qubits = dim.bit_length() - 1
        settings = get_settings()
        if num_qubits > settings.MAX_QUBITS:
            raise DomainError(f"{num_qubits} qubits exceeds the limit of {settings.MAX_QUBITS}")
        if layout is not None and layout.total_qubits != num_qubits:
            raise DomainError(
                f"layout expects {layout.total_qubits} qubits but the vector holds {num_qubits}"
            )

        norm_sq = float(np.vdot(amps, amps).real)
        if abs(norm_sq - 1.0) > settings.NORM_TOLERANCE:
            raise DomainError(f"statevector is not normalized (|psi|^2 = {norm_sq:.12f})")

        amps.setflags(write=False)
        self._amplitudes = amps
        self.num_qubits = num_qubits
        self.layout = layout

    @classmethod
    def zeros(cls, num_qubits: int) -> "Statevector":
        """|0...0> on a bare register"""
        if num_qubits < 1:
            raise DomainError("num_qubits must be positive")
        amps = np.zeros(1 << num_qubits, dtype=np.complex128)
        amps[0] = 1.0
        return cls(amps)

    @property
    def amplitudes(self) -> np.ndarray:
        return self._amplitudes

    @property
    def dimension(self) -> int:
        return self._amplitudes.shape[0]

    def norm_squared(self) -> float:
        return float(np.vdot(self._amplitudes, self._amplitudes).real)

    def with_amplitudes(self, amplitudes) -> "Statevector":
        """New state on the same layout"""
        return Statevector(amplitudes, self.layout)

    def __repr__(self) -> str:
        return f"Statevector(num_qubits={self.num_qubits}, layout={self.layout!r})"


StateLike = Union[Statevector, np.ndarray, Sequence[complex]]


def _axis(num_qubits: int, qubit: int) -> int:
    return num_qubits - 1 - qubit


def _check_qubits(qubits: Sequence[int], num_qubits: int, role: str) -> None:
    for q in qubits:
        if not isinstance(q, (int, np.integer)) or not 0 <= q < num_qubits:
            raise DomainError(f"{role} qubit {q!r} out of range for a {num_qubits}-qubit state")
    if len(set(qubits)) != len(qubits):
        raise DomainError(f"duplicate {role} qubits: {list(qubits)}")


def _contract(tensor: np.ndarray, matrix: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    """Apply `matrix` to tensor `axes`; axes[j] carries bit j of the matrix index"""
    m = len(axes)
    gate = matrix.reshape((2,) * (2 * m))
    # gate tensor axes are MSB first: axis i <-> bit m-1-i
    state_axes = [axes[m - 1 - i] for i in range(m)]
    out = np.tensordot(gate, tensor, axes=(list(range(m, 2 * m)), state_axes))
    return np.moveaxis(out, list(range(m)), state_axes)


def _as_gate(gate) -> GateMatrix:
    return gate if isinstance(gate, GateMatrix) else GateMatrix(gate)


def init_basis_state(layout: RegisterLayout, index: int) -> Statevector:
    """Computational basis state |index> on an HHL layout"""
    if not 0 <= index < layout.dimension:
        raise DomainError(f"basis index {index} out of range [0, {layout.dimension})")
    amps = np.zeros(layout.dimension, dtype=np.complex128)
    amps[index] = 1.0
    return Statevector(amps, layout)


def apply_unitary(state: Statevector, gate: GateMatrix, targets: Sequence[int]) -> Statevector:
    """Apply `gate` to `targets` (targets[j] is bit j of the gate's index), identity elsewhere"""
    gate = _as_gate(gate)
    targets = list(targets)
    q = state.num_qubits
    _check_qubits(targets, q, "target")
    if gate.num_qubits != len(targets):
        raise DomainError(f"{gate.name} acts on {gate.num_qubits} qubit(s) but {len(targets)} target(s) given")

    tensor = state.amplitudes.reshape((2,) * q)
    out = _contract(tensor, gate.matrix, [_axis(q, t) for t in targets])
    return state.with_amplitudes(out.reshape(-1))


def apply_controlled(
    state: Statevector,
    gate: GateMatrix,
    controls: Sequence[int],
    targets: Sequence[int],
) -> Statevector:
    """Apply `gate` on `targets` only on the subspace where every control qubit is |1>"""
    gate = _as_gate(gate)
    controls, targets = list(controls), list(targets)
    q = state.num_qubits
    if set(controls) & set(targets):
        raise DomainError(f"controls {controls} and targets {targets} overlap")
    _check_qubits(controls, q, "control")
    _check_qubits(targets, q, "target")
    if gate.num_qubits != len(targets):
        raise DomainError(f"{gate.name} acts on {gate.num_qubits} qubit(s) but {len(targets)} target(s) given")
    if not controls:
        return apply_unitary(state, gate, targets)

    tensor = state.amplitudes.reshape((2,) * q).copy()
    selector = [slice(None)] * q
    for c in controls:
        selector[_axis(q, c)] = 1
    selector = tuple(selector)

    # Axes of the control-fixed view, in tensor order (qubit q-1 first)
    remaining = [qb for qb in range(q - 1, -1, -1) if qb not in set(controls)]
    sub_axis = {qb: i for i, qb in enumerate(remaining)}
    tensor[selector] = _contract(tensor[selector], gate.matrix, [sub_axis[t] for t in targets])
    return state.with_amplitudes(tensor.reshape(-1))


def probabilities(state: Statevector) -> np.ndarray:
    return np.abs(state.amplitudes) ** 2


def marginal_probabilities(state: Statevector, qubits: Sequence[int]) -> np.ndarray:
    """Distribution over the listed qubits (qubits[j] is bit j of the outcome), others traced out"""
    qubits = list(qubits)
    if not qubits:
        raise DomainError("qubit list must not be empty")
    _check_qubits(qubits, state.num_qubits, "measured")

    index = np.arange(state.dimension)
    outcome = np.zeros(state.dimension, dtype=np.int64)
    for j, q in enumerate(qubits):
        outcome |= ((index >> q) & 1) << j
    return np.bincount(outcome, weights=probabilities(state), minlength=1 << len(qubits))


def postselect(state: Statevector, qubit: int, outcome: int) -> Tuple[Statevector, float]:
    """Collapse `qubit` onto `outcome` and renormalize; returns (state, pre-collapse probability)"""
    _check_qubits([qubit], state.num_qubits, "post-selected")
    if outcome not in (0, 1):
        raise DomainError(f"outcome must be 0 or 1, got {outcome!r}")

    mask = ((np.arange(state.dimension) >> qubit) & 1) == outcome
    kept = np.where(mask, state.amplitudes, 0.0)
    probability = float(np.vdot(kept, kept).real)
    if probability < get_settings().IMPOSSIBLE_OUTCOME_TOLERANCE:
        raise ImpossibleOutcomeError(
            f"outcome {outcome} on qubit {qubit} has probability {probability:.3e}"
        )

    logger.debug("postselect", qubit=qubit, outcome=outcome, probability=probability)
    return state.with_amplitudes(kept / np.sqrt(probability)), min(probability, 1.0)


def make_generator(seed: int, algorithm: Optional[str] = None) -> np.random.Generator:
    """Seeded generator built from a named numpy bit generator"""
    algorithm = algorithm or get_settings().SAMPLER_ALGORITHM
    bit_generator = getattr(np.random, algorithm)
    return np.random.Generator(bit_generator(seed))


def sample(
    state: Statevector,
    qubits: Sequence[int],
    shots: int,
    seed: int,
    algorithm: Optional[str] = None,
) -> Dict[int, int]:
    """Measure the listed qubits `shots` times; returns outcome -> count for observed outcomes"""
    if shots < 1:
        raise DomainError(f"shots must be >= 1, got {shots}")
    probs = marginal_probabilities(state, qubits)
    probs = probs / probs.sum()

    counts = make_generator(seed, algorithm).multinomial(shots, probs)
    return {int(k): int(v) for k, v in enumerate(counts) if v > 0}


def _as_array(value: StateLike) -> np.ndarray:
    if isinstance(value, Statevector):
        return value.amplitudes
    return np.asarray(value, dtype=np.complex128).reshape(-1)


def fidelity(a: StateLike, b: StateLike) -> float:
    """|<a|b>|^2 of normalized inputs; 1 iff equal up to global phase"""
    va, vb = _as_array(a), _as_array(b)
    if va.shape != vb.shape:
        raise DomainError(f"dimension mismatch: {va.shape[0]} vs {vb.shape[0]}")
    na, nb = np.linalg.norm(va), np.linalg.norm(vb)
    if na == 0 or nb == 0:
        raise DomainError("fidelity of a zero vector is undefined")
    overlap = abs(np.vdot(va, vb)) ** 2 / (na * nb) ** 2
    return float(min(max(overlap, 0.0), 1.0))

