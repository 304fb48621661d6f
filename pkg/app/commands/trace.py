import structlog

from app.core.exceptions import QasmParseError
from app.core.statevector import fidelity
from app.schemas.cli import CliConfig
from app.services.hhl_service import hhl_solver
from app.services.problem_service import problem_service
from app.services.qasm_service import qasm_service
from app.services.report_service import report_service

logger = structlog.get_logger(__name__)


def cmd_trace(config: CliConfig) -> str:
    """Ψ0..Ψ9 of the problem, optionally followed by the replay of an emitted circuit"""
    problem = problem_service.load_problem(config.input)
    trace = hhl_solver.trace_run(problem.system, problem.n, problem.C, config.solve_options(problem))

    if config.format == "csv":
        if config.replay is not None:
            logger.warning("replay_ignored", reason="replay is only rendered in human format")
        return report_service.to_csv(report_service.trace_frame(trace))

    text = report_service.render_trace(trace)
    if config.replay is not None:
        try:
            source = config.replay.read_text(encoding="utf-8")
        except OSError as exc:
            raise QasmParseError(f"cannot read {config.replay}: {exc.strerror or exc}") from exc
        replayed = qasm_service.replay(qasm_service.parse_qasm(source), trace.layout)
        text += "\n" + report_service.render_state(replayed, f"replay of {config.replay.name}") + "\n"
        text += f"fidelity vs Ψ9: {fidelity(replayed, trace[9]):.12f}\n"
    return text
