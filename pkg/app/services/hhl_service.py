import math
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import structlog

from app.core import gates
from app.core.config import get_settings
from app.core.exceptions import (
    ArcsinDomainError,
    DecompositionInvalidError,
    DomainError,
    HHLError,
    ImpossibleOutcomeError,
    StageError,
    UnsupportedEmissionError,
)
from app.core.statevector import (
    Statevector,
    apply_controlled,
    apply_unitary,
    fidelity,
    init_basis_state,
    marginal_probabilities,
    postselect,
    sample,
)
from app.schemas.circuit import GateOp
from app.schemas.encoding import EncodingPlan, SolveOptions
from app.schemas.layout import RegisterLayout
from app.schemas.problem import HermitianSystem
from app.schemas.result import (
    STAGE_LABELS,
    HHLResult,
    SampleCounts,
    StageSnapshot,
    StageTrace,
    stage_name,
)
from app.services.encoding_service import encoding_service

logger = structlog.get_logger(__name__)


class HHLSolver:
    """Runs the HHL stages over the statevector core and collects results"""

    def __init__(self):
        self.settings = get_settings()
        # amplitude magnitudes below this are treated as zero when synthesizing state preparation
        self.zero_tolerance = 1e-12

    # ------------------------------------------------------------------
    # State preparation
    # ------------------------------------------------------------------

    @staticmethod
    def _layout(state: Statevector) -> RegisterLayout:
        if state.layout is None:
            raise DomainError("HHL stages need a state built on a register layout")
        return state.layout

    def prepare_b(self, state: Statevector, b: Sequence[complex]) -> Statevector:
        """Load normalized b into the b-register by amplitude injection"""
        layout = self._layout(state)
        vector = np.asarray(b, dtype=np.complex128).reshape(-1)
        if vector.shape[0] != 1 << layout.nb:
            raise DomainError(f"b has length {vector.shape[0]}, the b-register holds {1 << layout.nb} amplitudes")
        norm = np.linalg.norm(vector)
        if norm == 0:
            raise DomainError("b must be nonzero")
        if abs(abs(state.amplitudes[0]) - 1.0) > self.settings.NORM_TOLERANCE:
            raise DomainError("state preparation expects the all-zeros basis state")

        amps = np.zeros(layout.dimension, dtype=np.complex128)
        for j, beta in enumerate(vector / norm):
            amps[layout.basis_index(j, 0, 0)] = beta
        return state.with_amplitudes(amps)

    def prepare_b_circuit(self, b: Sequence[complex], qubit: int) -> List[GateOp]:
        """X, or RY then RZ, taking |0> on `qubit` to normalized b up to global phase (nb = 1)"""
        vector = np.asarray(b, dtype=np.complex128).reshape(-1)
        if vector.shape[0] != 2:
            raise UnsupportedEmissionError(
                f"gate-level state preparation supports a single b qubit, got {vector.shape[0]} amplitudes"
            )
        norm = np.linalg.norm(vector)
        if norm == 0:
            raise DomainError("b must be nonzero")
        beta0, beta1 = vector / norm

        if abs(beta0) < self.zero_tolerance:
            return [GateOp(name="x", qubits=[qubit])]
        if abs(beta1) < self.zero_tolerance:
            return []

        ops = [GateOp(name="ry", params=[2.0 * math.atan2(abs(beta1), abs(beta0))], qubits=[qubit])]
        relative = float(np.angle(beta1) - np.angle(beta0))
        if abs(relative) > self.zero_tolerance:
            ops.append(GateOp(name="rz", params=[relative], qubits=[qubit]))
        return ops

    # ------------------------------------------------------------------
    # Phase estimation
    # ------------------------------------------------------------------

    @staticmethod
    def hadamard_layer(state: Statevector) -> Statevector:
        layout = HHLSolver._layout(state)
        h = gates.hadamard()
        for q in layout.clock_qubits:
            state = apply_unitary(state, h, [q])
        return state

    @staticmethod
    def controlled_evolution(state: Statevector, plan: EncodingPlan, inverse: bool = False) -> Statevector:
        """Clock qubit k controls U^(2^k) (U^(-2^k) when inverse) on the b-register"""
        layout = HHLSolver._layout(state)
        for k, control in enumerate(layout.clock_qubits):
            power = encoding_service.unitary_from_hamiltonian(plan, power=1 << k, inverse=inverse)
            state = apply_controlled(state, power, [control], layout.b_qubits)
        return state

    @staticmethod
    def clock_fourier(state: Statevector, inverse: bool) -> Statevector:
        """Dense IQFT (inverse=True) or QFT on the clock register"""
        layout = HHLSolver._layout(state)
        transform = gates.iqft(layout.n) if inverse else gates.qft(layout.n)
        return apply_unitary(state, transform, layout.clock_qubits)

    def qpe_forward(self, state: Statevector, plan: EncodingPlan) -> Statevector:
        layout = self._layout(state)
        if abs(marginal_probabilities(state, layout.clock_qubits)[0] - 1.0) > self.settings.NORM_TOLERANCE:
            raise DomainError("phase estimation expects the clock register in |0...0>")
        state = self.hadamard_layer(state)
        state = self.controlled_evolution(state, plan)
        return self.clock_fourier(state, inverse=True)

    def iqpe_uncompute(self, state: Statevector, plan: EncodingPlan) -> Statevector:
        state = self.clock_fourier(state, inverse=False)
        state = self.controlled_evolution(state, plan, inverse=True)
        return self.hadamard_layer(state)

    # ------------------------------------------------------------------
    # Ancilla rotation
    # ------------------------------------------------------------------

    def populated_clock_values(self, state: Statevector) -> List[int]:
        layout = self._layout(state)
        mass = marginal_probabilities(state, layout.clock_qubits)
        return [int(c) for c in np.flatnonzero(mass > self.settings.POPULATION_TOLERANCE)]

    def rotated_clock_values(self, values: Sequence[int], plan: EncodingPlan) -> List[int]:
        """Clock values that receive a rotation; leakage below C is skipped for rounded plans"""
        below = [c for c in values if c < plan.C]
        if below:
            if plan.exact:
                raise ArcsinDomainError(f"clock values {below} are populated but lie below C={plan.C}")
            logger.warning("ancilla_rotation_skipped", clock_values=below, C=plan.C)
        return [c for c in values if c >= plan.C]

    def rotation_weights(self, plan: EncodingPlan, clock_values: Sequence[int]) -> np.ndarray:
        """
        Per-clock-qubit RY angles theta_k with sum_k theta_k c_k = 2 arcsin(C / c)
        on every listed clock value c.
        """
        values = list(clock_values)
        if not values:
            return np.zeros(plan.n)
        bits = np.array([[(c >> k) & 1 for k in range(plan.n)] for c in values], dtype=float)
        targets = np.array([2.0 * math.asin(plan.C / c) for c in values])
        weights, *_ = np.linalg.lstsq(bits, targets, rcond=None)
        residual = float(np.max(np.abs(bits @ weights - targets)))
        if residual > self.settings.DECOMPOSITION_TOLERANCE:
            raise DecompositionInvalidError(
                f"no per-qubit rotation weights reproduce the angles for clock values {values} "
                f"(residual {residual:.3e}); use the exact ancilla mode"
            )
        return weights

    def ancilla_rotation(self, state: Statevector, plan: EncodingPlan, mode: str = "exact") -> Statevector:
        layout = self._layout(state)
        if marginal_probabilities(state, [layout.ancilla])[1] > self.settings.NORM_TOLERANCE:
            raise DomainError("ancilla rotation expects the ancilla in |0>")

        values = self.rotated_clock_values(self.populated_clock_values(state), plan)
        logger.debug("ancilla_rotation", mode=mode, clock_values=values, C=plan.C)

        if mode == "per-qubit":
            weights = self.rotation_weights(plan, values)
            for control, theta in zip(layout.clock_qubits, weights):
                if theta != 0.0:
                    state = apply_controlled(state, gates.ry(float(theta)), [control], [layout.ancilla])
            return state
        if mode != "exact":
            raise DomainError(f"unknown ancilla mode {mode!r}")

        # every clock value c >= C, populated or not
        x = gates.pauli_x()
        for c in range(1, plan.N):
            if c < plan.C:
                continue
            zeros = [q for k, q in enumerate(layout.clock_qubits) if not (c >> k) & 1]
            for q in zeros:
                state = apply_unitary(state, x, [q])
            rotation = gates.ry(2.0 * math.asin(plan.C / c))
            state = apply_controlled(state, rotation, layout.clock_qubits, [layout.ancilla])
            for q in zeros:
                state = apply_unitary(state, x, [q])
        return state

    def postselect_ancilla(self, state: Statevector):
        layout = self._layout(state)
        try:
            return postselect(state, layout.ancilla, 1)
        except ImpossibleOutcomeError as exc:
            raise ImpossibleOutcomeError(f"{exc.detail}; the ancilla never reads 1, check C") from exc

    # ------------------------------------------------------------------
    # Results
    # ------------------------------------------------------------------

    @staticmethod
    def classical_solve(system: HermitianSystem) -> np.ndarray:
        try:
            return np.linalg.solve(system.A, system.b)
        except np.linalg.LinAlgError as exc:
            raise DomainError(f"A is singular: {exc}") from exc

    @staticmethod
    def clock_residual(state: Statevector) -> float:
        """Mass outside clock = |0...0>"""
        layout = HHLSolver._layout(state)
        return float(max(1.0 - marginal_probabilities(state, layout.clock_qubits)[0], 0.0))

    @staticmethod
    def read_solution(state: Statevector) -> np.ndarray:
        """b-register amplitudes on the clock = 0, ancilla = 1 slice, renormalized"""
        layout = HHLSolver._layout(state)
        x = np.array([state.amplitudes[layout.basis_index(j, 0, 1)] for j in range(1 << layout.nb)])
        norm = np.linalg.norm(x)
        if norm == 0:
            raise ImpossibleOutcomeError("the clock = 0, ancilla = 1 slice is empty")
        return x / norm

    @staticmethod
    def expected_success_probability(system: HermitianSystem, plan: EncodingPlan) -> float:
        """sum_j |<u_j|b> C / lambda~_j|^2 for normalized b"""
        coefficients = plan.eigenvectors.conj().T @ system.normalized_b
        return float(sum(abs(beta * plan.C / lt) ** 2 for beta, lt in zip(coefficients, plan.lambda_tilde)))

    @staticmethod
    def outcome_ratios(x: np.ndarray) -> List[float]:
        probs = np.abs(x) ** 2
        reference = probs[np.flatnonzero(probs > 1e-30)[0]]
        return [float(p / reference) for p in probs]

    # ------------------------------------------------------------------
    # Pipeline
    # ------------------------------------------------------------------

    @staticmethod
    def _stage(stage: int, fn: Callable, *args):
        logger.debug("stage", stage=STAGE_LABELS[stage][0], description=STAGE_LABELS[stage][1])
        try:
            return fn(*args)
        except StageError:
            raise
        except HHLError as exc:
            raise StageError(stage_name(stage), exc) from exc

    def _run(self, system: HermitianSystem, plan: EncodingPlan, options: SolveOptions) -> Dict:
        """Ψ0..Ψ5, Ψ6 = post-selected Ψ5, Ψ7..Ψ9 from the unmeasured Ψ5"""
        layout = RegisterLayout(nb=system.nb, n=plan.n)
        psi = [init_basis_state(layout, 0)]
        psi.append(self._stage(1, self.prepare_b, psi[0], system.b))
        psi.append(self._stage(2, self.hadamard_layer, psi[1]))
        psi.append(self._stage(3, self.controlled_evolution, psi[2], plan))
        psi.append(self._stage(4, self.clock_fourier, psi[3], True))
        psi.append(self._stage(5, self.ancilla_rotation, psi[4], plan, options.ancilla_mode))
        measured, probability = self._stage(6, self.postselect_ancilla, psi[5])
        psi.append(measured)
        psi.append(self._stage(7, self.clock_fourier, psi[5], False))
        psi.append(self._stage(8, self.controlled_evolution, psi[7], plan, True))
        psi.append(self._stage(9, self.hadamard_layer, psi[8]))

        if options.measure_before_uncompute:
            final = self._stage(9, self.iqpe_uncompute, measured, plan)
        else:
            final, probability = self._stage(9, self.postselect_ancilla, psi[9])

        logger.info("hhl_run", success_probability=probability, clock_residual=self.clock_residual(final))
        return {"states": psi, "final": final, "probability": probability, "layout": layout}

    def _plan(self, system: HermitianSystem, n: int, C: Optional[float], options: SolveOptions) -> EncodingPlan:
        return encoding_service.build_plan(system, n, mode=options.encoding_mode, C=C if C is not None else options.C)

    @staticmethod
    def _trace(run: Dict) -> StageTrace:
        snapshots = [
            StageSnapshot(stage=k, label=label, description=description, state=run["states"][k])
            for k, (label, description) in enumerate(STAGE_LABELS)
        ]
        return StageTrace(
            snapshots=snapshots,
            postselected_final=run["final"],
            success_probability=run["probability"],
            layout=run["layout"],
        )

    def solve(
        self,
        system: HermitianSystem,
        n: int,
        C: Optional[float] = None,
        options: Optional[SolveOptions] = None,
    ) -> HHLResult:
        options = options or SolveOptions()
        plan = self._plan(system, n, C, options)
        run = self._run(system, plan, options)

        final = run["final"]
        x = self.read_solution(final)
        classical = self.classical_solve(system)
        result = HHLResult(
            solution_amplitudes=x,
            success_probability=run["probability"],
            outcome_ratios=self.outcome_ratios(x),
            classical_solution=classical,
            fidelity=fidelity(x, classical),
            clock_residual=self.clock_residual(final),
            final_state=final,
            plan=plan,
            ancilla_mode=options.ancilla_mode,
            trace=self._trace(run) if options.include_trace else None,
        )
        logger.info("hhl_solve", fidelity=result.fidelity, ratios=result.outcome_ratios)
        return result

    def trace_run(
        self,
        system: HermitianSystem,
        n: int,
        C: Optional[float] = None,
        options: Optional[SolveOptions] = None,
    ) -> StageTrace:
        options = options or SolveOptions()
        plan = self._plan(system, n, C, options)
        return self._trace(self._run(system, plan, options))

    def sample(
        self,
        system: HermitianSystem,
        n: int,
        shots: int,
        seed: int,
        C: Optional[float] = None,
        options: Optional[SolveOptions] = None,
    ) -> SampleCounts:
        """Measure ancilla and b-register of the pre-measurement Ψ9 `shots` times"""
        options = options or SolveOptions()
        plan = self._plan(system, n, C, options)
        run = self._run(system, plan, options)
        layout = run["layout"]

        algorithm = self.settings.SAMPLER_ALGORITHM
        counts = sample(run["states"][9], layout.measured_qubits, shots, seed, algorithm)
        logger.info("hhl_sample", shots=shots, seed=seed, algorithm=algorithm, outcomes=len(counts))
        return SampleCounts(counts=counts, shots=shots, seed=seed, algorithm=algorithm, layout=layout)


# Global instance
hhl_solver = HHLSolver()
