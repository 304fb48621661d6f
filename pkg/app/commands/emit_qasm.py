from app.commands import write_output
from app.schemas.cli import CliConfig
from app.services.encoding_service import encoding_service
from app.services.problem_service import problem_service
from app.services.qasm_service import qasm_service


def cmd_emit_qasm(config: CliConfig) -> str:
    """Write the OpenQASM 2.0 circuit next to the input (or to --output); returns a status line"""
    problem = problem_service.load_problem(config.input)
    options = config.solve_options(problem)
    plan = encoding_service.build_plan(problem.system, problem.n, mode=options.encoding_mode, C=problem.C)
    ir = qasm_service.build_circuit_ir(problem.system, plan, options)

    path = config.qasm_path()
    write_output(qasm_service.emit_qasm(ir), path)
    return f"wrote {len(ir.gates)} instructions on {ir.num_qubits} qubits to {path}\n"
