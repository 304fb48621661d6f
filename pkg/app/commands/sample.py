from app.schemas.cli import CliConfig
from app.services.hhl_service import hhl_solver
from app.services.problem_service import problem_service
from app.services.report_service import report_service


def cmd_sample(config: CliConfig) -> str:
    """Shot counts over (b-register, ancilla), deterministic per seed"""
    problem = problem_service.load_problem(config.input)
    counts = hhl_solver.sample(
        problem.system, problem.n, config.shots, config.seed, problem.C, config.solve_options(problem)
    )
    if config.format == "csv":
        return report_service.to_csv(report_service.sample_frame(counts))
    return report_service.render_sample(counts)
