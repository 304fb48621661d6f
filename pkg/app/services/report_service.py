from typing import Iterable, List, Optional

import numpy as np
import pandas as pd

from app.core.config import get_settings
from app.core.statevector import Statevector
from app.schemas.layout import RegisterLayout
from app.schemas.result import HHLResult, SampleCounts, StageTrace

TRACE_COLUMNS = ["stage", "label", "index", "ket", "re", "im"]
SOLVE_COLUMNS = [
    "basis_state", "ket", "solution_re", "solution_im", "probability", "ratio", "classical_re", "classical_im",
]
SAMPLE_COLUMNS = ["outcome", "b_register", "ancilla", "count", "frequency"]


class ReportService:
    """Human-readable and CSV renderings of traces, results and counts"""

    def __init__(self):
        self.settings = get_settings()

    # Number formatting

    def _real(self, value: float, decimals: int) -> str:
        text = f"{value:.{decimals}f}"
        # no "-0.0000"
        return text[1:] if text.startswith("-") and float(text) == 0 else text

    def format_amplitude(self, z: complex, decimals: Optional[int] = None) -> str:
        """Fixed-decimal amplitude, e.g. -0.4330 or 0.5000+0.5000j"""
        decimals = decimals or self.settings.HUMAN_DECIMALS
        z = complex(z)
        if abs(z.imag) < self.settings.BRAKET_THRESHOLD:
            return self._real(z.real, decimals)
        sign = "-" if z.imag < 0 else "+"
        return f"{self._real(z.real, decimals)}{sign}{self._real(abs(z.imag), decimals)}j"

    def _short(self, value: float) -> str:
        text = self._real(round(value, self.settings.HUMAN_DECIMALS), self.settings.HUMAN_DECIMALS)
        text = text.rstrip("0")
        return text + "0" if text.endswith(".") else text

    def braket_value(self, z: complex) -> str:
        """Rounded amplitude with trailing zeros dropped: 1.0, 0.25, -0.433"""
        z = complex(z)
        if abs(z.imag) < self.settings.BRAKET_THRESHOLD:
            return self._short(z.real)
        sign = "-" if z.imag < 0 else "+"
        return f"({self._short(z.real)}{sign}{self._short(abs(z.imag))}j)"

    # States

    def braket_lines(self, state: Statevector, layout: Optional[RegisterLayout] = None) -> List[str]:
        layout = layout or state.layout
        lines = []
        for index in np.flatnonzero(np.abs(state.amplitudes) > self.settings.BRAKET_THRESHOLD):
            ket = layout.ket_label(int(index)) if layout else f"|{int(index):0{state.num_qubits}b}>"
            lines.append(f"{ket} : {self.braket_value(state.amplitudes[index])}")
        return lines

    def render_state(self, state: Statevector, title: str, layout: Optional[RegisterLayout] = None) -> str:
        amplitudes = ", ".join(self.format_amplitude(z) for z in state.amplitudes)
        lines = [title, f"  amplitudes: [{amplitudes}]"]
        lines += [f"  {line}" for line in self.braket_lines(state, layout)]
        return "\n".join(lines)

    def render_trace(self, trace: StageTrace) -> str:
        blocks = [
            self.render_state(s.state, f"{s.label} {s.description}", trace.layout) for s in trace.snapshots
        ]
        blocks.append(
            self.render_state(trace.postselected_final, "final state (ancilla = 1, post-selected)", trace.layout)
        )
        blocks.append(f"success probability: {trace.success_probability:.6f}")
        return "\n\n".join(blocks) + "\n"

    def trace_frame(self, trace: StageTrace) -> pd.DataFrame:
        rows = []
        for snapshot in trace.snapshots:
            for index, z in enumerate(snapshot.state.amplitudes):
                rows.append([
                    snapshot.stage, snapshot.label, index, trace.layout.ket_label(index), z.real, z.imag,
                ])
        return pd.DataFrame(rows, columns=TRACE_COLUMNS)

    # Results

    def _vector(self, values: Iterable[complex]) -> str:
        return "[" + ", ".join(self.format_amplitude(z) for z in values) + "]"

    def render_solve(self, result: HHLResult) -> str:
        plan = result.plan
        lines = [
            f"encoding: mode={plan.mode} t={plan.t:.6f} lambda={plan.eigenvalues} "
            f"lambda~={plan.lambda_tilde} C={plan.C:g}",
            f"ancilla mode: {result.ancilla_mode}",
            f"success probability: {result.success_probability:.6f}",
            f"solution amplitudes: {self._vector(result.solution_amplitudes)}",
            f"probabilities: {self._vector(result.probabilities)}",
            f"ratio: {result.ratio_string()}",
            f"classical solution: {self._vector(result.classical_solution)}",
            f"fidelity: {result.fidelity:.6f}",
            f"clock residual: {result.clock_residual:.3e}",
        ]
        if not plan.exact:
            lines.append(f"max relative encoding error: {max(plan.relative_errors):.3e}")
        return "\n".join(lines) + "\n"

    def solve_frame(self, result: HHLResult) -> pd.DataFrame:
        nb = result.plan.nb
        rows = []
        for j, (x, ratio, classical) in enumerate(
            zip(result.solution_amplitudes, result.outcome_ratios, result.classical_solution)
        ):
            rows.append([j, f"|{j:0{nb}b}>", x.real, x.imag, abs(x) ** 2, ratio, classical.real, classical.imag])
        return pd.DataFrame(rows, columns=SOLVE_COLUMNS)

    # Counts

    def sample_frame(self, counts: SampleCounts) -> pd.DataFrame:
        rows = []
        for outcome in counts.outcomes():
            b, a = counts.split_outcome(outcome)
            rows.append([outcome, b, a, counts.counts.get(outcome, 0), counts.frequency(outcome)])
        return pd.DataFrame(rows, columns=SAMPLE_COLUMNS)

    def render_sample(self, counts: SampleCounts) -> str:
        nb = counts.layout.nb
        lines = [f"generator: {counts.algorithm} seed={counts.seed} shots={counts.shots}", "b a  count  frequency"]
        for outcome in counts.outcomes():
            b, a = counts.split_outcome(outcome)
            lines.append(
                f"{b:0{nb}b} {a}  {counts.counts.get(outcome, 0)}  {counts.frequency(outcome):.6f}"
            )
        conditional = counts.conditional_b(1)
        if conditional:
            parts = ", ".join(f"P(b={b:0{nb}b}|a=1)={p:.6f}" for b, p in conditional.items())
            lines.append(f"conditional: {parts}")
        else:
            lines.append("conditional: ancilla = 1 never observed")
        return "\n".join(lines) + "\n"

    # CSV

    def to_csv(self, frame: pd.DataFrame) -> str:
        digits = self.settings.CSV_SIGNIFICANT_DIGITS
        return frame.to_csv(index=False, float_format=f"%.{digits}g", lineterminator="\n")


# Global instance
report_service = ReportService()
