from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.schemas.encoding import SolveOptions
from app.schemas.problem import ProblemDefinition


class CliConfig(BaseModel):
    """Validated command-line arguments of one invocation"""

    subcommand: Literal["trace", "solve", "sample", "emit-qasm"]
    input: Path
    shots: int = Field(default=1024, ge=1)
    seed: int = Field(default=2024, ge=0)
    format: Literal["human", "csv"] = "human"
    ancilla_mode: Literal["exact", "per-qubit"] = "exact"
    encoding_mode: Optional[Literal["exact", "rounded"]] = Field(
        default=None, description="overrides the mode given in the problem file"
    )
    output: Optional[Path] = None
    replay: Optional[Path] = None

    model_config = ConfigDict(frozen=True)

    @field_validator("input", "replay")
    @classmethod
    def readable(cls, v):
        if v is not None and not v.is_file():
            raise ValueError(f"{v} is not a readable file")
        return v

    def solve_options(self, problem: ProblemDefinition, include_trace: bool = False) -> SolveOptions:
        return SolveOptions(
            ancilla_mode=self.ancilla_mode,
            encoding_mode=self.encoding_mode or problem.mode,
            C=problem.C,
            include_trace=include_trace,
        )

    def qasm_path(self) -> Path:
        return self.output or self.input.with_suffix(".qasm")
