import math
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np
import structlog

from app.core.config import get_settings
from app.core.exceptions import (
    ArcsinDomainError,
    DomainError,
    EncodingCollisionError,
    EncodingInfeasibleError,
    HermitianValidationError,
    HHLError,
    NonPositiveSpectrumError,
)
from app.core.statevector import GateMatrix
from app.schemas.encoding import ClockEncoding, EncodingPlan, U3Params, TWO_PI
from app.schemas.problem import HermitianSystem

logger = structlog.get_logger(__name__)


class EncodingService:
    """Hamiltonian encoding: spectrum of A, clock encoding, U^(2^k) = e^{i A t 2^k} and CU3 parameters"""

    def __init__(self):
        self.settings = get_settings()
        # below this magnitude a matrix entry or eigenvector component counts as zero
        self.zero_tolerance = 1e-12

    def eig_hermitian(self, A) -> Tuple[np.ndarray, np.ndarray]:
        """
        Ascending eigenvalues and orthonormal eigenvectors (columns) of a Hermitian matrix.

        Each eigenvector is rotated so its first nonzero component is real
        positive; this fixes the arbitrary phase numpy leaves on the columns.
        """
        a = np.asarray(A, dtype=np.complex128)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise HermitianValidationError(f"expected a square matrix, got shape {a.shape}")
        deviation = float(np.max(np.abs(a - a.conj().T)))
        if deviation >= self.settings.HERMITIAN_TOLERANCE:
            raise HermitianValidationError(f"matrix is not Hermitian (max |A - A^dag| = {deviation:.3e})")

        eigenvalues, eigenvectors = np.linalg.eigh(a)
        eigenvectors = eigenvectors.copy()
        for j in range(eigenvectors.shape[1]):
            column = eigenvectors[:, j]
            lead = np.flatnonzero(np.abs(column) > self.zero_tolerance)[0]
            eigenvectors[:, j] = column * (abs(column[lead]) / column[lead])
        return eigenvalues.real.astype(float), eigenvectors

    def choose_time_and_clock(self, eigenvalues: Sequence[float], n: int, mode: str = "exact") -> ClockEncoding:
        """
        Pick t so that lambda~_j = N lambda_j t / 2pi are integers in [1, N-1].

        exact: eigenvalue ratios are rationalized by continued fractions with
        denominators bounded by N; the smallest lambda~_min that clears every
        denominator gives the smallest feasible t.
        rounded: lambda_min maps to 1 exactly and the rest are rounded, with
        the relative error of each reported.
        """
        if n < 1:
            raise DomainError(f"clock register needs at least one qubit, got n={n}")
        if mode not in ("exact", "rounded"):
            raise DomainError(f"unknown encoding mode {mode!r}")
        lams = np.asarray(eigenvalues, dtype=float)
        if np.any(lams <= 0):
            raise NonPositiveSpectrumError(
                f"encoding needs a strictly positive spectrum, got eigenvalues {lams.tolist()}"
            )

        N = 1 << n
        if mode == "rounded":
            return self._rounded_encoding(lams, N)

        tol = self.settings.ENCODING_TOLERANCE
        lam_min = float(lams.min())
        ratios = lams / lam_min
        fractions = [Fraction(float(r)).limit_denominator(N) for r in ratios]

        encoding = None
        if all(abs(r - float(f)) <= tol * r for r, f in zip(ratios, fractions)):
            smallest = math.lcm(*(f.denominator for f in fractions))
            scale = smallest / lam_min
            scaled = scale * lams
            tilde = np.rint(scaled).astype(int)
            if np.max(np.abs(scaled - tilde)) <= tol and tilde.max() <= N - 1:
                encoding = ClockEncoding(
                    t=TWO_PI * scale / N,
                    lambda_tilde=tilde.tolist(),
                    relative_errors=[0.0] * len(tilde),
                    mode="exact",
                )

        if encoding is None:
            try:
                best = self._rounded_encoding(lams, N)
            except (EncodingInfeasibleError, EncodingCollisionError):
                best = None
            raise EncodingInfeasibleError(
                f"eigenvalues {lams.tolist()} cannot be encoded exactly with n={n} clock qubits"
                + (f"; best rounded encoding: lambda~={best.lambda_tilde}" if best else ""),
                best_plan=best,
            )

        self._check_collisions(encoding.lambda_tilde, lams)
        logger.debug("clock_encoding", mode="exact", t=encoding.t, lambda_tilde=encoding.lambda_tilde)
        return encoding

    def _rounded_encoding(self, lams: np.ndarray, N: int) -> ClockEncoding:
        scale = 1.0 / float(lams.min())
        scaled = scale * lams
        tilde = np.rint(scaled).astype(int)
        if tilde.max() > N - 1:
            raise EncodingInfeasibleError(
                f"largest encoded eigenvalue {int(tilde.max())} exceeds N-1={N - 1}; use more clock qubits"
            )
        self._check_collisions(tilde.tolist(), lams)
        errors = (np.abs(tilde - scaled) / scaled).tolist()
        logger.warning("rounded_encoding", lambda_tilde=tilde.tolist(), max_relative_error=max(errors))
        return ClockEncoding(t=TWO_PI * scale / N, lambda_tilde=tilde.tolist(), relative_errors=errors, mode="rounded")

    @staticmethod
    def _check_collisions(tilde: List[int], lams: np.ndarray) -> None:
        seen = {}
        for value, lam in zip(tilde, lams):
            if value in seen:
                raise EncodingCollisionError(
                    f"eigenvalues {seen[value]:.6g} and {lam:.6g} both encode to lambda~={value}"
                )
            seen[value] = float(lam)

    def build_plan(
        self,
        system: HermitianSystem,
        n: int,
        mode: str = "exact",
        C: Optional[float] = None,
    ) -> EncodingPlan:
        """Eigendecomposition plus clock encoding plus rotation constant C (default min lambda~)"""
        eigenvalues, eigenvectors = self.eig_hermitian(system.A)
        try:
            encoding = self.choose_time_and_clock(eigenvalues, n, mode)
        except EncodingInfeasibleError as exc:
            if exc.best_plan is not None:
                try:
                    exc.best_plan = self._assemble(eigenvalues, eigenvectors, exc.best_plan, n, C)
                except (HHLError, ValueError):
                    exc.best_plan = None
            raise

        plan = self._assemble(eigenvalues, eigenvectors, encoding, n, C)
        logger.info("encoding_plan", **plan.describe())
        return plan

    @staticmethod
    def _assemble(eigenvalues, eigenvectors, encoding: ClockEncoding, n: int, C: Optional[float]) -> EncodingPlan:
        smallest = min(encoding.lambda_tilde)
        C = float(smallest) if C is None else float(C)
        if not 0 < C <= smallest:
            raise ArcsinDomainError(f"C={C} must lie in (0, {smallest}] (smallest encoded eigenvalue)")
        return EncodingPlan(
            eigenvalues=[float(x) for x in eigenvalues],
            eigenvectors=eigenvectors,
            t=encoding.t,
            n=n,
            lambda_tilde=encoding.lambda_tilde,
            C=C,
            mode=encoding.mode,
            relative_errors=encoding.relative_errors,
        )

    def unitary_from_hamiltonian(self, plan: EncodingPlan, power: int = 1, inverse: bool = False) -> GateMatrix:
        """V diag(e^{+-i lambda_j t power}) V^dag, exponentiated in the eigenbasis"""
        if power < 1:
            raise DomainError(f"power must be a positive integer, got {power}")
        sign = -1.0 if inverse else 1.0
        phases = np.exp(sign * 1j * np.asarray(plan.eigenvalues) * plan.t * power)
        V = plan.eigenvectors
        name = f"U^{'-' if inverse else ''}{power}"
        return GateMatrix((V * phases) @ V.conj().T, name=name)

    def cu3_params_from_unitary(self, U) -> U3Params:
        """
        Parameters (theta, phi, lam, gamma) with u3_matrix(params) == U.

        gamma follows the phase of U00; when U00 vanishes lam is fixed to 0
        and gamma is read from U01, when U10 vanishes phi is fixed to 0.
        """
        gate = U if isinstance(U, GateMatrix) else GateMatrix(U, name="U")
        if gate.num_qubits != 1:
            raise DomainError(f"CU3 parameters need a 2x2 unitary, got {gate.dimension}x{gate.dimension}")
        (a00, a01), (a10, a11) = gate.matrix

        theta = 2.0 * math.atan2(abs(a10), abs(a00))
        if abs(a00) > self.zero_tolerance:
            gamma = float(np.angle(a00))
            if abs(a10) > self.zero_tolerance:
                phi = float(np.angle(a10)) - gamma
                lam = float(np.angle(-a01)) - gamma
            else:
                phi = 0.0
                lam = float(np.angle(a11)) - gamma
        else:
            lam = 0.0
            gamma = float(np.angle(-a01))
            phi = float(np.angle(a10)) - gamma

        return U3Params(theta=theta, phi=phi, lam=lam, gamma=gamma)


# Global instance
encoding_service = EncodingService()
