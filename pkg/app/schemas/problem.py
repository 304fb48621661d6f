from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.core.config import get_settings


class HermitianSystem(BaseModel):
    """The pair (A, b) of A x = b with A Hermitian of size 2^nb"""

    A: np.ndarray
    b: np.ndarray

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @field_validator("A", mode="before")
    @classmethod
    def validate_matrix(cls, v):
        a = np.array(v, dtype=np.complex128)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"A must be a square matrix, got shape {a.shape}")
        size = a.shape[0]
        if size < 2 or size & (size - 1):
            raise ValueError(f"A must be 2^nb x 2^nb with nb >= 1, got {size}x{size}")
        if not np.all(np.isfinite(a)):
            raise ValueError("A has non-finite entries")
        a.setflags(write=False)
        return a

    @field_validator("b", mode="before")
    @classmethod
    def validate_vector(cls, v):
        b = np.array(v, dtype=np.complex128).reshape(-1)
        if not np.all(np.isfinite(b)):
            raise ValueError("b has non-finite entries")
        if np.linalg.norm(b) == 0:
            raise ValueError("b must be nonzero")
        b.setflags(write=False)
        return b

    @model_validator(mode="after")
    def check_system(self):
        if self.b.shape[0] != self.A.shape[0]:
            raise ValueError(f"b has length {self.b.shape[0]} but A is {self.A.shape[0]}x{self.A.shape[0]}")
        deviation = float(np.max(np.abs(self.A - self.A.conj().T)))
        if deviation >= get_settings().HERMITIAN_TOLERANCE:
            raise ValueError(f"A is not Hermitian (max |A - A^dag| = {deviation:.3e})")
        return self

    @property
    def size(self) -> int:
        return self.A.shape[0]

    @property
    def nb(self) -> int:
        return self.size.bit_length() - 1

    @property
    def normalized_b(self) -> np.ndarray:
        return self.b / np.linalg.norm(self.b)


class ProblemDefinition(BaseModel):
    """Contents of a problem-definition file"""

    nb: int = Field(..., ge=1, le=10)
    n: int = Field(..., ge=1, le=12)
    system: HermitianSystem
    C: Optional[float] = Field(default=None, gt=0)
    mode: Literal["exact", "rounded"] = "exact"

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @model_validator(mode="after")
    def check_register_size(self):
        if self.system.nb != self.nb:
            raise ValueError(f"nb={self.nb} but A is {self.system.size}x{self.system.size}")
        return self
