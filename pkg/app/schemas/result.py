from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from app.core.statevector import Statevector
from app.schemas.encoding import EncodingPlan
from app.schemas.layout import RegisterLayout

# (label, description) of the ten checkpoints of an HHL run
STAGE_LABELS = [
    ("Ψ0", "initial state"),
    ("Ψ1", "state preparation"),
    ("Ψ2", "clock superposition"),
    ("Ψ3", "controlled evolution"),
    ("Ψ4", "inverse QFT"),
    ("Ψ5", "ancilla rotation"),
    ("Ψ6", "ancilla measurement (post-selected)"),
    ("Ψ7", "QFT"),
    ("Ψ8", "inverse controlled evolution"),
    ("Ψ9", "Hadamard layer (pre-measurement)"),
]


def stage_name(stage: int) -> str:
    label, description = STAGE_LABELS[stage]
    return f"{label} {description}"


class StageSnapshot(BaseModel):
    stage: int = Field(..., ge=0, le=9)
    label: str
    description: str
    state: Statevector

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


class StageTrace(BaseModel):
    """Ψ0..Ψ9 snapshots of one run, plus the post-selected final state"""

    snapshots: List[StageSnapshot]
    postselected_final: Statevector
    success_probability: float = Field(..., gt=0, le=1)
    layout: RegisterLayout

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    def __len__(self) -> int:
        return len(self.snapshots)

    def __getitem__(self, stage: int) -> Statevector:
        return self.snapshots[stage].state

    @property
    def labels(self) -> List[str]:
        return [s.label for s in self.snapshots]


class HHLResult(BaseModel):
    solution_amplitudes: np.ndarray = Field(..., description="normalized |x> read from the b-register")
    success_probability: float = Field(..., gt=0, le=1)
    outcome_ratios: List[float] = Field(..., description="|x_j|^2 relative to the first nonzero component")
    classical_solution: np.ndarray = Field(..., description="A^-1 b")
    fidelity: float = Field(..., ge=0, le=1)
    clock_residual: float = Field(..., ge=0, description="mass outside clock=0 after uncomputation")
    final_state: Statevector
    plan: EncodingPlan
    ancilla_mode: str
    trace: Optional[StageTrace] = None

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.solution_amplitudes) ** 2

    def ratio_string(self, digits: int = 6) -> str:
        """e.g. 1:9.000000 for the worked example"""
        reference = next(i for i, r in enumerate(self.outcome_ratios) if r > 0)
        return ":".join(
            "1" if i == reference else f"{r:.{digits}f}" for i, r in enumerate(self.outcome_ratios)
        )


class SampleCounts(BaseModel):
    """
    Shot counts over the measured qubits.

    Outcome bit 0 is the ancilla and bits 1..nb the b-register, the same
    order as the classical register of the emitted circuit.
    """

    counts: Dict[int, int]
    shots: int = Field(..., ge=1)
    seed: int
    algorithm: str
    layout: RegisterLayout

    model_config = ConfigDict(frozen=True)

    @staticmethod
    def split_outcome(outcome: int):
        """(b-register value, ancilla bit)"""
        return outcome >> 1, outcome & 1

    def frequency(self, outcome: int) -> float:
        return self.counts.get(outcome, 0) / self.shots

    def outcomes(self) -> List[int]:
        """Every possible outcome, observed or not, in index order"""
        return list(range(1 << (self.layout.nb + 1)))

    def conditional_b(self, ancilla: int = 1) -> Dict[int, float]:
        """Empirical P(b | ancilla); empty when the ancilla value was never observed"""
        kept = {o >> 1: c for o, c in self.counts.items() if o & 1 == ancilla}
        total = sum(kept.values())
        if total == 0:
            return {}
        return {b: kept.get(b, 0) / total for b in range(1 << self.layout.nb)}
