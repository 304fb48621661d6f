import math
from typing import List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

TWO_PI = 2.0 * math.pi


def wrap_angle(value: float) -> float:
    """Map an angle into (-pi, pi]"""
    return math.pi - ((math.pi - value) % TWO_PI)


class U3Params(BaseModel):
    """
    Parameters of e^{i gamma} U3(theta, phi, lam).

    theta is kept in [0, 2pi); phi, lam and gamma in (-pi, pi]. Moving theta
    by 2pi flips the sign of the matrix, so an odd number of wraps adds pi to
    gamma and the synthesized matrix is unchanged.
    """

    theta: float = Field(..., allow_inf_nan=False)
    phi: float = Field(..., allow_inf_nan=False)
    lam: float = Field(..., allow_inf_nan=False)
    gamma: float = Field(default=0.0, allow_inf_nan=False)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="before")
    @classmethod
    def canonicalize(cls, data):
        if not isinstance(data, dict):
            return data
        data = dict(data)
        theta = float(data.get("theta", 0.0))
        gamma = float(data.get("gamma", 0.0))
        if math.isfinite(theta) and math.isfinite(gamma):
            wraps = math.floor(theta / TWO_PI)
            data["theta"] = theta - wraps * TWO_PI
            if wraps % 2:
                gamma += math.pi
            data["gamma"] = gamma
        return data

    @field_validator("phi", "lam", "gamma")
    @classmethod
    def wrap_phase(cls, v):
        return wrap_angle(v)

    @field_validator("theta")
    @classmethod
    def clamp_theta(cls, v):
        # theta - floor(theta/2pi)*2pi can land on 2pi through rounding
        return 0.0 if v >= TWO_PI else v


class EncodingPlan(BaseModel):
    """Eigendecomposition of A together with the clock encoding chosen for it"""

    eigenvalues: List[float] = Field(..., min_length=1, description="ascending")
    eigenvectors: np.ndarray = Field(..., description="orthonormal columns u_j")
    t: float = Field(..., gt=0, description="evolution time")
    n: int = Field(..., ge=1, description="clock qubits")
    lambda_tilde: List[int] = Field(..., description="encoded eigenvalues")
    C: float = Field(..., gt=0, description="ancilla rotation constant")
    mode: Literal["exact", "rounded"] = "exact"
    relative_errors: List[float] = Field(default_factory=list, description="per-eigenvalue encoding error")

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    @property
    def N(self) -> int:
        return 1 << self.n

    @property
    def exact(self) -> bool:
        return self.mode == "exact"

    @property
    def nb(self) -> int:
        return int(self.eigenvectors.shape[0]).bit_length() - 1

    @property
    def scaled_eigenvalues(self) -> List[float]:
        """N * lambda_j * t / 2pi before rounding"""
        return [self.N * lam * self.t / TWO_PI for lam in self.eigenvalues]

    @model_validator(mode="after")
    def check_encoding(self):
        if len(self.lambda_tilde) != len(self.eigenvalues):
            raise ValueError("one encoded value per eigenvalue is required")
        if any(not 1 <= lt <= self.N - 1 for lt in self.lambda_tilde):
            raise ValueError(f"encoded eigenvalues must lie in [1, {self.N - 1}]")
        if self.C > min(self.lambda_tilde):
            raise ValueError(f"C={self.C} exceeds the smallest encoded eigenvalue {min(self.lambda_tilde)}")
        return self

    def describe(self) -> dict:
        return {
            "eigenvalues": self.eigenvalues,
            "t": self.t,
            "n": self.n,
            "lambda_tilde": self.lambda_tilde,
            "C": self.C,
            "mode": self.mode,
            "max_relative_error": max(self.relative_errors, default=0.0),
        }


class SolveOptions(BaseModel):
    ancilla_mode: Literal["exact", "per-qubit"] = "exact"
    encoding_mode: Literal["exact", "rounded"] = "exact"
    C: Optional[float] = Field(default=None, gt=0)
    include_trace: bool = False
    measure_before_uncompute: bool = False


class ClockEncoding(BaseModel):
    """Evolution time and integer clock values chosen for a spectrum"""

    t: float = Field(..., gt=0)
    lambda_tilde: List[int]
    relative_errors: List[float]
    mode: Literal["exact", "rounded"]
