from app.schemas.cli import CliConfig
from app.services.hhl_service import hhl_solver
from app.services.problem_service import problem_service
from app.services.report_service import report_service


def cmd_solve(config: CliConfig) -> str:
    problem = problem_service.load_problem(config.input)
    result = hhl_solver.solve(problem.system, problem.n, problem.C, config.solve_options(problem))
    if config.format == "csv":
        return report_service.to_csv(report_service.solve_frame(result))
    return report_service.render_solve(result)
