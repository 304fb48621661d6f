import re
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Union

import structlog
from pydantic import ValidationError

from app.core.exceptions import HermitianValidationError, ProblemParseError
from app.schemas.problem import HermitianSystem, ProblemDefinition

logger = structlog.get_logger(__name__)

REQUIRED_FIELDS = ("nb", "n", "A", "b")
OPTIONAL_FIELDS = ("C", "mode")

_RATIONAL = re.compile(r"^[+-]?\d+/\d+$")


def _first_error(exc: ValidationError) -> str:
    error = exc.errors()[0]
    location = ".".join(str(part) for part in error.get("loc", ()))
    return f"{location}: {error['msg']}" if location else error["msg"]


class ProblemService:
    """Reads and writes problem-definition files (grammar in docs/README.md)"""

    def parse_entry(self, text: str, field: str) -> complex:
        """`re`, `re+imj`, `imj` or a rational `p/q`"""
        token = re.sub(r"\s+", "", text)
        if not token:
            raise ProblemParseError(f"{field}: empty entry", field=field)
        try:
            if _RATIONAL.match(token):
                return complex(float(Fraction(token)))
            return complex(token)
        except (ValueError, ZeroDivisionError) as exc:
            raise ProblemParseError(f"{field}: cannot parse entry {text.strip()!r}", field=field) from exc

    def parse_vector(self, text: str, field: str) -> List[complex]:
        return [self.parse_entry(entry, field) for entry in text.split(",")]

    def parse_matrix(self, text: str, field: str = "A") -> List[List[complex]]:
        rows = [self.parse_vector(row, field) for row in text.split(";") if row.strip()]
        if not rows:
            raise ProblemParseError(f"{field}: matrix has no rows", field=field)
        if len({len(row) for row in rows}) != 1:
            raise ProblemParseError(f"{field}: rows have different lengths", field=field)
        return rows

    def _parse_int(self, text: str, field: str) -> int:
        try:
            return int(text.strip())
        except ValueError as exc:
            raise ProblemParseError(f"{field}: expected an integer, got {text.strip()!r}", field=field) from exc

    def _fields(self, text: str) -> Dict[str, str]:
        fields: Dict[str, str] = {}
        for number, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition(":")
            key = key.strip()
            if not sep:
                raise ProblemParseError(f"line {number}: expected 'key: value', got {line!r}")
            if key not in REQUIRED_FIELDS + OPTIONAL_FIELDS:
                raise ProblemParseError(f"line {number}: unknown field {key!r}", field=key)
            if key in fields:
                raise ProblemParseError(f"line {number}: duplicate field {key!r}", field=key)
            fields[key] = value.strip()
        return fields

    def parse_problem(self, text: str) -> ProblemDefinition:
        fields = self._fields(text)
        for name in REQUIRED_FIELDS:
            if name not in fields:
                raise ProblemParseError(f"missing required field {name!r}", field=name)

        nb = self._parse_int(fields["nb"], "nb")
        n = self._parse_int(fields["n"], "n")
        A = self.parse_matrix(fields["A"])
        b = self.parse_vector(fields["b"], "b")

        C = None
        if fields.get("C"):
            C = self.parse_entry(fields["C"], "C")
            if C.imag != 0:
                raise ProblemParseError("C: must be real", field="C")
            C = C.real

        try:
            system = HermitianSystem(A=A, b=b)
        except ValidationError as exc:
            raise HermitianValidationError(_first_error(exc)) from exc
        try:
            problem = ProblemDefinition(nb=nb, n=n, system=system, C=C, mode=fields.get("mode") or "exact")
        except ValidationError as exc:
            raise ProblemParseError(_first_error(exc)) from exc

        logger.debug("problem_parsed", nb=nb, n=n, mode=problem.mode, C=problem.C)
        return problem

    def load_problem(self, path: Union[str, Path]) -> ProblemDefinition:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ProblemParseError(f"cannot read problem file {path}: {exc.strerror or exc}") from exc
        return self.parse_problem(text)

    @staticmethod
    def format_entry(value: complex) -> str:
        value = complex(value)
        if value.imag == 0:
            return repr(value.real)
        sign = "-" if value.imag < 0 else "+"
        return f"{value.real!r}{sign}{abs(value.imag)!r}j"

    def dump_problem(self, problem: ProblemDefinition) -> str:
        """Inverse of parse_problem; floats are written with repr so the round trip is exact"""
        A = problem.system.A
        lines = [
            f"nb: {problem.nb}",
            f"n: {problem.n}",
            "A: " + "; ".join(", ".join(self.format_entry(v) for v in row) for row in A),
            "b: " + ", ".join(self.format_entry(v) for v in problem.system.b),
        ]
        if problem.C is not None:
            lines.append(f"C: {problem.C!r}")
        lines.append(f"mode: {problem.mode}")
        return "\n".join(lines) + "\n"


# Global instance
problem_service = ProblemService()
