import math
import re
from typing import List, Optional

import structlog

from app.core import gates
from app.core.exceptions import DomainError, EmissionError, QasmParseError, UnsupportedEmissionError
from app.core.statevector import Statevector, apply_controlled, apply_unitary, init_basis_state
from app.schemas.circuit import CircuitIR, GateOp
from app.schemas.encoding import EncodingPlan, SolveOptions, U3Params, wrap_angle
from app.schemas.layout import RegisterLayout
from app.schemas.problem import HermitianSystem
from app.services.encoding_service import encoding_service
from app.services.hhl_service import hhl_solver

logger = structlog.get_logger(__name__)

QASM_HEADER = ['OPENQASM 2.0;', 'include "qelib1.inc";']

# IR name -> qelib1.inc spelling; qft/iqft have none
QASM_NAMES = {
    "h": "h", "x": "x", "ry": "ry", "rz": "rz", "u1": "u1",
    "cu3": "cu3", "cry": "cry", "cp": "cu1", "swap": "swap", "measure": "measure",
}
IR_NAMES = {qasm: ir for ir, qasm in QASM_NAMES.items()}

SNAP_TOLERANCE = 1e-12
MAX_PI_DENOMINATOR = 16

_PI_EXPR = re.compile(r"^(-)?(?:(\d+)\*)?pi(?:/(\d+))?$")
_GATE_LINE = re.compile(r"^([a-z][a-z0-9]*)(?:\(([^)]*)\))?\s+(.+?)\s*;$")
_MEASURE_LINE = re.compile(r"^measure\s+q\[(\d+)\]\s*->\s*c\[(\d+)\]\s*;$")
_REG_LINE = re.compile(r"^(qreg|creg)\s+([a-z]+)\[(\d+)\]\s*;$")
_OPERAND = re.compile(r"^q\[(\d+)\]$")


def _pi_fraction(value: float):
    """(p, q) with p*pi/q == value exactly, smallest q first; None when no such pair exists"""
    for q in range(1, MAX_PI_DENOMINATOR + 1):
        p = round(value * q / math.pi)
        if p * math.pi / q == value and math.gcd(p, q) == 1:
            return p, q
    return None


def snap_angle(value: float) -> float:
    """Replace angles within SNAP_TOLERANCE of p*pi/q (q <= 16) by exactly p*pi/q"""
    if abs(value) <= SNAP_TOLERANCE:
        return 0.0
    for q in range(1, MAX_PI_DENOMINATOR + 1):
        p = round(value * q / math.pi)
        if p != 0 and abs(value - p * math.pi / q) <= SNAP_TOLERANCE:
            return p * math.pi / q
    return value


def format_angle(value: float) -> str:
    if value == 0.0:
        return "0"
    fraction = _pi_fraction(value)
    if fraction is None:
        return format(value, ".17g")
    p, q = fraction
    text = "pi" if abs(p) == 1 else f"{abs(p)}*pi"
    if q != 1:
        text += f"/{q}"
    return f"-{text}" if p < 0 else text


def parse_angle(text: str) -> float:
    match = _PI_EXPR.match(text.strip())
    if match is None:
        return float(text)
    sign, p, q = match.groups()
    value = int(p or 1) * math.pi / int(q or 1)
    return -value if sign else value


class QasmService:
    """Builds the HHL circuit as an IR, serializes it to OpenQASM 2.0, and reads it back"""

    def _snapped(self, name: str, params: List[float], qubits: List[int]) -> GateOp:
        return GateOp(name=name, params=[snap_angle(p) for p in params], qubits=qubits)

    def _controlled_u3(self, params: U3Params, control: int, target: int) -> List[GateOp]:
        # snapping can land a phase on -pi; keep it in (-pi, pi]
        phi, lam = wrap_angle(snap_angle(params.phi)), wrap_angle(snap_angle(params.lam))
        ops = [GateOp(name="cu3", params=[snap_angle(params.theta), phi, lam], qubits=[control, target])]
        gamma = wrap_angle(snap_angle(params.gamma))
        if gamma != 0.0:
            # controlled global phase e^{i gamma}
            ops.append(GateOp(name="u1", params=[gamma], qubits=[control]))
        return ops

    def build_circuit_ir(
        self,
        system: HermitianSystem,
        plan: EncodingPlan,
        options: Optional[SolveOptions] = None,
    ) -> CircuitIR:
        """
        HHL circuit for a single-qubit b-register: state preparation, H layer,
        cu3 powers, IQFT, cry rotations, QFT, inverse cu3 powers, H layer and
        measurement of the ancilla (c[0]) and the b-register (c[1..]).
        """
        if system.nb != 1:
            raise UnsupportedEmissionError(f"emission supports nb = 1 (cu3-expressible U), got nb = {system.nb}")
        if not plan.exact:
            raise UnsupportedEmissionError("emission requires an exactly encoded plan")
        if options is not None and options.ancilla_mode != "per-qubit":
            logger.info("qasm_ancilla_mode", requested=options.ancilla_mode, emitted="per-qubit")

        layout = RegisterLayout(nb=1, n=plan.n)
        b_qubit = layout.b_qubits[0]
        clock = layout.clock_qubits

        ops: List[GateOp] = [
            self._snapped(op.name, op.params, op.qubits) for op in hhl_solver.prepare_b_circuit(system.b, b_qubit)
        ]
        ops += [GateOp(name="h", qubits=[q]) for q in clock]
        for k, control in enumerate(clock):
            power = encoding_service.unitary_from_hamiltonian(plan, power=1 << k)
            ops += self._controlled_u3(encoding_service.cu3_params_from_unitary(power), control, b_qubit)
        ops += [self._snapped(op.name, op.params, op.qubits) for op in gates.qft_circuit(clock, inverse=True)]

        estimated = hhl_solver.qpe_forward(hhl_solver.prepare_b(init_basis_state(layout, 0), system.b), plan)
        values = hhl_solver.rotated_clock_values(hhl_solver.populated_clock_values(estimated), plan)
        weights = hhl_solver.rotation_weights(plan, values)
        for control, theta in zip(clock, weights):
            theta = snap_angle(float(theta))
            if theta != 0.0:
                ops.append(GateOp(name="cry", params=[theta], qubits=[control, layout.ancilla]))

        ops += [self._snapped(op.name, op.params, op.qubits) for op in gates.qft_circuit(clock)]
        for k in reversed(range(plan.n)):
            power = encoding_service.unitary_from_hamiltonian(plan, power=1 << k, inverse=True)
            ops += self._controlled_u3(encoding_service.cu3_params_from_unitary(power), clock[k], b_qubit)
        ops += [GateOp(name="h", qubits=[q]) for q in clock]
        ops += [
            GateOp(name="measure", qubits=[q], clbits=[i]) for i, q in enumerate(layout.measured_qubits)
        ]

        ir = CircuitIR(num_qubits=layout.total_qubits, num_clbits=layout.nb + 1, gates=ops)
        logger.info("circuit_ir", qubits=ir.num_qubits, gates=len(ir.gates), cry=ir.count("cry"))
        return ir

    def emit_qasm(self, ir: CircuitIR) -> str:
        lines = list(QASM_HEADER)
        lines.append(f"qreg q[{ir.num_qubits}];")
        if ir.num_clbits:
            lines.append(f"creg c[{ir.num_clbits}];")

        for op in ir.gates:
            name = QASM_NAMES.get(op.name)
            if name is None:
                raise EmissionError(f"gate {op.name!r} has no OpenQASM 2.0 spelling", gate=op.name)
            if op.name == "measure":
                lines.append(f"measure q[{op.qubits[0]}] -> c[{op.clbits[0]}];")
                continue
            params = f"({','.join(format_angle(p) for p in op.params)})" if op.params else ""
            operands = ",".join(f"q[{q}]" for q in op.qubits)
            lines.append(f"{name}{params} {operands};")

        logger.debug("qasm_emitted", statements=len(ir.gates))
        return "\n".join(lines) + "\n"

    def parse_qasm(self, text: str) -> CircuitIR:
        """Read back QASM text in the subset emit_qasm writes"""
        num_qubits: Optional[int] = None
        num_clbits = 0
        ops: List[GateOp] = []

        for number, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("//", 1)[0].strip()
            if not line or line in QASM_HEADER:
                continue

            register = _REG_LINE.match(line)
            if register:
                kind, name, size = register.groups()
                if (kind, name) == ("qreg", "q"):
                    num_qubits = int(size)
                elif (kind, name) == ("creg", "c"):
                    num_clbits = int(size)
                else:
                    raise QasmParseError(f"unsupported register declaration {line!r}", number)
                continue

            measure = _MEASURE_LINE.match(line)
            if measure:
                ops.append(GateOp(name="measure", qubits=[int(measure.group(1))], clbits=[int(measure.group(2))]))
                continue

            gate = _GATE_LINE.match(line)
            if gate is None:
                raise QasmParseError(f"cannot parse {line!r}", number)
            name, params, operands = gate.groups()
            if name not in IR_NAMES or name == "measure":
                raise QasmParseError(f"gate {name!r} is outside the supported subset", number)
            qubits = []
            for operand in operands.split(","):
                match = _OPERAND.match(operand.strip())
                if match is None:
                    raise QasmParseError(f"bad operand {operand.strip()!r}", number)
                qubits.append(int(match.group(1)))
            try:
                values = [parse_angle(p) for p in params.split(",")] if params else []
                ops.append(GateOp(name=IR_NAMES[name], params=values, qubits=qubits))
            except ValueError as exc:
                raise QasmParseError(str(exc), number) from exc

        if num_qubits is None:
            raise QasmParseError("missing qreg declaration")
        try:
            return CircuitIR(num_qubits=num_qubits, num_clbits=num_clbits, gates=ops)
        except ValueError as exc:
            raise QasmParseError(str(exc)) from exc

    def replay(self, ir: CircuitIR, layout: Optional[RegisterLayout] = None) -> Statevector:
        """Simulate the IR from |0...0>; measurements are skipped so the pre-measurement state is returned"""
        if layout is not None:
            state = init_basis_state(layout, 0)
        else:
            state = Statevector.zeros(ir.num_qubits)
        return self.replay_from(state, ir)

    def replay_from(self, state: Statevector, ir: CircuitIR) -> Statevector:
        if state.num_qubits != ir.num_qubits:
            raise DomainError(f"circuit acts on {ir.num_qubits} qubits, the state has {state.num_qubits}")
        for op in ir.gates:
            state = self.apply_op(state, op)
        return state

    @staticmethod
    def apply_op(state: Statevector, op: GateOp) -> Statevector:
        q = op.qubits
        if op.name == "measure":
            return state
        if op.name == "h":
            return apply_unitary(state, gates.hadamard(), q)
        if op.name == "x":
            return apply_unitary(state, gates.pauli_x(), q)
        if op.name == "ry":
            return apply_unitary(state, gates.ry(op.params[0]), q)
        if op.name == "rz":
            return apply_unitary(state, gates.rz(op.params[0]), q)
        if op.name == "u1":
            return apply_unitary(state, gates.phase(op.params[0]), q)
        if op.name == "swap":
            return apply_unitary(state, gates.swap(), q)
        if op.name == "cu3":
            theta, phi, lam = op.params
            return apply_controlled(state, gates.u3_matrix(U3Params(theta=theta, phi=phi, lam=lam)), q[:1], q[1:])
        if op.name == "cry":
            return apply_controlled(state, gates.ry(op.params[0]), q[:1], q[1:])
        if op.name == "cp":
            return apply_controlled(state, gates.phase(op.params[0]), q[:1], q[1:])
        if op.name in ("qft", "iqft"):
            transform = gates.qft(len(q)) if op.name == "qft" else gates.iqft(len(q))
            return apply_unitary(state, transform, q)
        raise EmissionError(f"gate {op.name!r} cannot be replayed", gate=op.name)


# Global instance
qasm_service = QasmService()
