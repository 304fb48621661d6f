import math
from typing import List, Literal

from pydantic import BaseModel, Field, field_validator, model_validator

GateName = Literal["h", "x", "ry", "rz", "u1", "cu3", "cry", "cp", "swap", "measure", "qft", "iqft"]

# qubit operand count and parameter count per gate; None = any number of qubits
GATE_ARITY = {
    "h": (1, 0), "x": (1, 0), "ry": (1, 1), "rz": (1, 1), "u1": (1, 1),
    "cu3": (2, 3), "cry": (2, 1), "cp": (2, 1), "swap": (2, 0),
    "measure": (1, 0), "qft": (None, 0), "iqft": (None, 0),
}


class GateOp(BaseModel):
    """One circuit instruction; controlled gates list the control qubit first"""

    name: GateName
    params: List[float] = Field(default_factory=list)
    qubits: List[int] = Field(..., min_length=1)
    clbits: List[int] = Field(default_factory=list)

    @field_validator("params")
    @classmethod
    def finite_params(cls, v):
        if any(not math.isfinite(p) for p in v):
            raise ValueError("gate parameters must be finite")
        return v

    @model_validator(mode="after")
    def check_arity(self):
        n_qubits, n_params = GATE_ARITY[self.name]
        if n_qubits is not None and len(self.qubits) != n_qubits:
            raise ValueError(f"{self.name} takes {n_qubits} qubit(s), got {len(self.qubits)}")
        if len(self.params) != n_params:
            raise ValueError(f"{self.name} takes {n_params} parameter(s), got {len(self.params)}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"{self.name} operands must be distinct")
        if (self.name == "measure") != bool(self.clbits):
            raise ValueError("exactly the measure instruction carries a classical bit")
        return self

    def inverse(self) -> "GateOp":
        if self.name in ("h", "x", "swap"):
            return self
        if self.name in ("ry", "rz", "u1", "cry", "cp"):
            return self.model_copy(update={"params": [-self.params[0]]})
        if self.name == "cu3":
            theta, phi, lam = self.params
            return self.model_copy(update={"params": [-theta, -lam, -phi]})
        if self.name in ("qft", "iqft"):
            return self.model_copy(update={"name": "iqft" if self.name == "qft" else "qft"})
        raise ValueError(f"{self.name} has no inverse")


class CircuitIR(BaseModel):
    """Ordered gate list over a flat qubit register and a classical register"""

    num_qubits: int = Field(..., ge=1)
    num_clbits: int = Field(..., ge=0)
    gates: List[GateOp] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_operands(self):
        for position, op in enumerate(self.gates):
            if any(not 0 <= q < self.num_qubits for q in op.qubits):
                raise ValueError(f"gate {position} ({op.name}) addresses a qubit outside q[{self.num_qubits}]")
            if any(not 0 <= c < self.num_clbits for c in op.clbits):
                raise ValueError(f"gate {position} ({op.name}) addresses a bit outside c[{self.num_clbits}]")
        return self

    def count(self, name: str) -> int:
        return sum(1 for op in self.gates if op.name == name)
