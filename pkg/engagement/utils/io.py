"""
File output utilities.

Every artifact (model, report, predictions, trial log) is written to a temporary
file in the target directory and moved into place, so readers never observe a
partial file. The final replace is retried with exponential backoff because it can
fail transiently while another process holds the destination open.
"""

import json
import logging
import os
import tempfile
from collections.abc import Callable, Iterable
from pathlib import Path
from typing import Any, TypeVar

from tenacity import retry, retry_if_exception_type, stop_after_attempt, wait_exponential

logger = logging.getLogger(__name__)

F = TypeVar("F", bound=Callable[..., Any])


def retry_on_io_error(
    func: F | None = None,
    max_attempts: int = 3,
    min_wait: float = 0.1,
    max_wait: float = 2.0,
) -> Any:
    """
    Decorator for retrying filesystem operations.

    Retries on permission errors and interrupted system calls with exponential backoff.

    Args:
        func: Function to decorate (provided automatically)
        max_attempts: Maximum number of attempts
        min_wait: Minimum wait time in seconds
        max_wait: Maximum wait time in seconds

    Returns:
        Decorated function with retry logic

    Example:
        @retry_on_io_error
        def move(src, dst):
            os.replace(src, dst)
    """

    def decorator(f: F) -> F:
        wrapped: F = retry(
            stop=stop_after_attempt(max_attempts),
            wait=wait_exponential(multiplier=min_wait, min=min_wait, max=max_wait),
            retry=retry_if_exception_type((PermissionError, InterruptedError)),
            reraise=True,
        )(f)
        return wrapped

    if func is None:
        return decorator
    return decorator(func)


@retry_on_io_error
def _replace(source: Path, destination: Path) -> None:
    os.replace(source, destination)


def atomic_write_text(path: Path, text: str) -> None:
    """
    Write text to ``path`` atomically (temp file + rename).

    Args:
        path: Destination file
        text: Full file contents (UTF-8)

    Raises:
        OSError: If the temporary file cannot be written or moved into place
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    tmp_path = Path(tmp_name)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
            handle.flush()
            os.fsync(handle.fileno())
        _replace(tmp_path, path)
    except BaseException:
        tmp_path.unlink(missing_ok=True)
        raise
    logger.debug("Wrote file", extra={"path": str(path), "n_bytes": len(text.encode("utf-8"))})


def dumps_json(document: Any) -> str:
    """Serialize to strict JSON; floats print in shortest round-trip form."""
    return json.dumps(document, indent=2, allow_nan=False) + "\n"


def atomic_write_json(path: Path, document: Any) -> None:
    """Write a JSON document atomically."""
    atomic_write_text(path, dumps_json(document))


def atomic_write_jsonl(path: Path, rows: Iterable[dict[str, Any]]) -> None:
    """Write one compact JSON object per line, atomically."""
    lines = [json.dumps(row, allow_nan=False, separators=(",", ":")) for row in rows]
    atomic_write_text(path, "\n".join(lines) + ("\n" if lines else ""))
