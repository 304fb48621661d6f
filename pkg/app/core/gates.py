"""
Named gates and Fourier transforms.

Sign convention: iqft(n) has entries e^{-2 pi i y k / N} / sqrt(N) and qft(n)
is its conjugate transpose (e^{+2 pi i y k / N}). Some references call the
former the QFT; the emitted QASM follows the decomposition in qft_circuit,
which realizes exactly qft(n) on little-endian qubits.
"""
import math
from typing import List, Sequence

import numpy as np

from app.core.config import get_settings
from app.core.exceptions import DomainError
from app.core.statevector import GateMatrix
from app.schemas.circuit import GateOp
from app.schemas.encoding import U3Params

SQRT2_INV = 1.0 / math.sqrt(2.0)


def _finite(value: float, what: str) -> float:
    if not math.isfinite(value):
        raise DomainError(f"{what} must be finite, got {value!r}")
    return float(value)


def hadamard() -> GateMatrix:
    return GateMatrix([[SQRT2_INV, SQRT2_INV], [SQRT2_INV, -SQRT2_INV]], name="h")


def pauli_x() -> GateMatrix:
    return GateMatrix([[0, 1], [1, 0]], name="x")


def ry(theta: float) -> GateMatrix:
    theta = _finite(theta, "theta")
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return GateMatrix([[c, -s], [s, c]], name=f"ry({theta:.6g})")


def rz(theta: float) -> GateMatrix:
    theta = _finite(theta, "theta")
    return GateMatrix(np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)]), name=f"rz({theta:.6g})")


def phase(lam: float) -> GateMatrix:
    """diag(1, e^{i lam}); u1 in QASM 2.0"""
    lam = _finite(lam, "lambda")
    return GateMatrix(np.diag([1.0, np.exp(1j * lam)]), name=f"u1({lam:.6g})")


def swap() -> GateMatrix:
    return GateMatrix([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], name="swap")


def u3_matrix(p: U3Params) -> GateMatrix:
    c, s = math.cos(p.theta / 2), math.sin(p.theta / 2)
    g = p.gamma
    matrix = [
        [np.exp(1j * g) * c, -np.exp(1j * (g + p.lam)) * s],
        [np.exp(1j * (g + p.phi)) * s, np.exp(1j * (g + p.phi + p.lam)) * c],
    ]
    return GateMatrix(matrix, name="u3")


def _fourier(n: int, sign: int) -> np.ndarray:
    limit = get_settings().MAX_FOURIER_QUBITS
    if not 1 <= n <= limit:
        raise DomainError(f"dense Fourier transform supports 1..{limit} qubits, got {n}")
    size = 1 << n
    y, k = np.meshgrid(np.arange(size), np.arange(size), indexing="ij")
    return np.exp(sign * 2j * np.pi * y * k / size) / math.sqrt(size)


def iqft(n: int) -> GateMatrix:
    return GateMatrix(_fourier(n, -1), name=f"iqft{n}")


def qft(n: int) -> GateMatrix:
    return GateMatrix(_fourier(n, +1), name=f"qft{n}")


def qft_circuit(qubits: Sequence[int], inverse: bool = False) -> List[GateOp]:
    """
    H / controlled-phase / swap network equal to qft(len(qubits)) on `qubits`
    (qubits[j] is bit j); the inverse is the reversed network with negated phases.
    """
    qubits = list(qubits)
    n = len(qubits)
    if n < 1:
        raise DomainError("qft_circuit needs at least one qubit")

    ops: List[GateOp] = []
    for j in reversed(range(n)):
        ops.append(GateOp(name="h", qubits=[qubits[j]]))
        for k in reversed(range(j)):
            ops.append(GateOp(name="cp", params=[math.pi / 2 ** (j - k)], qubits=[qubits[k], qubits[j]]))
    for i in range(n // 2):
        ops.append(GateOp(name="swap", qubits=[qubits[i], qubits[n - 1 - i]]))

    if inverse:
        ops = [op.inverse() for op in reversed(ops)]
    return ops
