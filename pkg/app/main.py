import argparse
import sys
from typing import Callable, Dict, List, Optional

import structlog
from dotenv import load_dotenv
from pydantic import ValidationError

from app.commands import write_output
from app.commands.emit_qasm import cmd_emit_qasm
from app.commands.sample import cmd_sample
from app.commands.solve import cmd_solve
from app.commands.trace import cmd_trace
from app.core.config import get_config_summary, get_settings
from app.core.exceptions import (
    EXIT_INPUT_ERROR,
    EXIT_OK,
    EncodingInfeasibleError,
    HHLError,
)
from app.core.logging_config import configure_logging
from app.schemas.cli import CliConfig

logger = structlog.get_logger(__name__)

EXIT_UNEXPECTED = 1

COMMANDS: Dict[str, Callable[[CliConfig], str]] = {
    "trace": cmd_trace,
    "solve": cmd_solve,
    "sample": cmd_sample,
    "emit-qasm": cmd_emit_qasm,
}


def build_parser() -> argparse.ArgumentParser:
    settings = get_settings()
    parser = argparse.ArgumentParser(
        prog="hhl",
        description=f"{settings.APP_NAME} v{settings.APP_VERSION}: HHL linear-system solver on a dense statevector",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", required=True, help="problem-definition file")
    common.add_argument("--format", choices=["human", "csv"], default="human")
    common.add_argument("--ancilla", choices=["exact", "per-qubit"], default="exact", help="ancilla rotation mode")
    common.add_argument("--encoding", choices=["exact", "rounded"], default=None,
                        help="eigenvalue encoding mode (default: the problem file's mode)")
    common.add_argument("--output", default=None, help="output path (default: stdout; emit-qasm: <input>.qasm)")

    trace = subparsers.add_parser("trace", parents=[common], help="print the stage states Ψ0..Ψ9")
    trace.add_argument("--replay", default=None, help="emitted .qasm file to replay next to Ψ9")
    subparsers.add_parser("solve", parents=[common], help="solve and report the normalized solution")
    sample = subparsers.add_parser("sample", parents=[common], help="measure ancilla and b-register")
    sample.add_argument("--shots", type=int, default=settings.DEFAULT_SHOTS)
    sample.add_argument("--seed", type=int, default=settings.DEFAULT_SEED)
    subparsers.add_parser("emit-qasm", parents=[common], help="write the circuit as OpenQASM 2.0")
    return parser


def _config(args: argparse.Namespace) -> CliConfig:
    settings = get_settings()
    return CliConfig(
        subcommand=args.command,
        input=args.input,
        shots=getattr(args, "shots", settings.DEFAULT_SHOTS),
        seed=getattr(args, "seed", settings.DEFAULT_SEED),
        format=args.format,
        ancilla_mode=args.ancilla,
        encoding_mode=args.encoding,
        output=args.output,
        replay=getattr(args, "replay", None),
    )


def run(config: CliConfig) -> None:
    text = COMMANDS[config.subcommand](config)
    if config.subcommand == "emit-qasm":
        # the circuit itself went to config.qasm_path()
        print(text, end="")
    else:
        write_output(text, config.output)


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)

    settings = get_settings()
    configure_logging(settings)
    logger.debug("startup", **get_config_summary(settings))

    try:
        run(_config(args))
        return EXIT_OK
    except EncodingInfeasibleError as exc:
        print(f"error: {exc.detail}", file=sys.stderr)
        if exc.best_plan is not None:
            print(f"best rounded plan: {exc.best_plan.describe()} (rerun with --encoding rounded)", file=sys.stderr)
        return exc.exit_code
    except HHLError as exc:
        print(f"error: {exc.detail}", file=sys.stderr)
        return exc.exit_code
    except ValidationError as exc:
        for error in exc.errors():
            location = ".".join(str(part) for part in error.get("loc", ()))
            print(f"error: {location}: {error['msg']}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except Exception:
        logger.exception("unexpected_error")
        print("error: unexpected failure, see the log for details", file=sys.stderr)
        return EXIT_UNEXPECTED


if __name__ == "__main__":
    sys.exit(main())
