from pathlib import Path
from typing import Optional

import structlog

from app.core.exceptions import OutputError

logger = structlog.get_logger(__name__)


def write_output(text: str, path: Optional[Path]) -> None:
    """Write to `path`, or to stdout when no path is given"""
    if path is None:
        print(text, end="")
        return
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc
    logger.info("output_written", path=str(path), size=len(text))
