from typing import Optional, Any

# Stable CLI exit codes
EXIT_OK = 0
EXIT_INPUT_ERROR = 2
EXIT_IO_ERROR = 3
EXIT_ENCODING_INFEASIBLE = 4


class HHLError(Exception):
    """Base error; `exit_code` plays the role an HTTP status code plays for an API"""

    exit_code: int = EXIT_INPUT_ERROR

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class DomainError(HHLError):
    """Index, dimension or argument outside the operation's domain"""


class GateValidationError(DomainError):
    """Matrix failed the unitarity check"""


class ImpossibleOutcomeError(HHLError):
    """Post-selection on a branch with (numerically) zero probability"""


class HermitianValidationError(HHLError):
    """Input system is not a valid Hermitian problem"""


class ProblemParseError(HHLError):
    """Problem-definition file does not follow the grammar"""

    def __init__(self, detail: str, field: Optional[str] = None):
        super().__init__(detail)
        self.field = field


class EncodingCollisionError(HHLError):
    """Two eigenvalues were encoded into the same clock integer"""


class NonPositiveSpectrumError(HHLError):
    """Encoding requires a strictly positive spectrum"""


class EncodingInfeasibleError(HHLError):
    """Exact encoding impossible for the requested clock size"""

    exit_code = EXIT_ENCODING_INFEASIBLE

    def __init__(self, detail: str, best_plan: Any = None):
        super().__init__(detail)
        self.best_plan = best_plan


class ArcsinDomainError(HHLError):
    """A populated clock value is smaller than the rotation constant C"""


class DecompositionInvalidError(HHLError):
    """No per-qubit controlled-RY weights reproduce the required angles"""


class UnsupportedEmissionError(HHLError):
    """Circuit cannot be expressed with the emitter's gate set"""


class EmissionError(HHLError):
    """IR gate has no OpenQASM 2.0 spelling"""

    def __init__(self, detail: str, gate: Optional[str] = None):
        super().__init__(detail)
        self.gate = gate


class QasmParseError(HHLError):
    """QASM text outside the subset the emitter produces"""

    def __init__(self, detail: str, line: Optional[int] = None):
        super().__init__(detail if line is None else f"line {line}: {detail}")
        self.line = line


class OutputError(HHLError):
    """Writing an output file failed"""

    exit_code = EXIT_IO_ERROR


class StageError(HHLError):
    """Failure inside one HHL stage, labelled with the stage that raised it"""

    def __init__(self, stage: str, cause: HHLError):
        super().__init__(f"{stage}: {cause.detail}")
        self.stage = stage
        self.cause = cause
        self.exit_code = cause.exit_code
