from typing import List, Tuple
from pydantic import BaseModel, ConfigDict, Field


class RegisterLayout(BaseModel):
    """Qubit map of an HHL register: ancilla = qubit 0 (LSB), clock = 1..n, b-register = n+1..n+nb (MSB)"""

    nb: int = Field(..., ge=1, le=20, description="b-register qubits")
    n: int = Field(..., ge=1, le=20, description="clock qubits")

    model_config = ConfigDict(frozen=True)

    @property
    def total_qubits(self) -> int:
        return self.nb + self.n + 1

    @property
    def dimension(self) -> int:
        return 1 << self.total_qubits

    @property
    def ancilla(self) -> int:
        return 0

    @property
    def clock_qubits(self) -> List[int]:
        # clock_qubits[k] is c_k and controls U^(2^k)
        return list(range(1, self.n + 1))

    @property
    def b_qubits(self) -> List[int]:
        return list(range(self.n + 1, self.n + self.nb + 1))

    @property
    def measured_qubits(self) -> List[int]:
        """Ancilla first, then the b-register: the classical-bit order of the emitted circuit"""
        return [self.ancilla] + self.b_qubits

    def basis_index(self, b: int, c: int, a: int) -> int:
        """Index of |b c a> (little-endian: |1001> with nb=1, n=2 is 9)"""
        return a + (c << 1) + (b << (self.n + 1))

    def split_index(self, index: int) -> Tuple[int, int, int]:
        a = index & 1
        c = (index >> 1) & ((1 << self.n) - 1)
        b = index >> (self.n + 1)
        return b, c, a

    def ket_label(self, index: int) -> str:
        """Bit string in |b c a> order, MSB first, e.g. |1000>"""
        b, c, a = self.split_index(index)
        return f"|{b:0{self.nb}b}{c:0{self.n}b}{a}>"
