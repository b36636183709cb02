"""
Error handling for the command-line front end.

Maps exceptions to process exit codes and one-line diagnostics on stderr:

    0  success
    1  pipeline or data error (EngagementException with exit_code 1, unexpected errors)
    2  usage error (configuration exceptions, invalid option values)
"""

import logging
import sys
from collections.abc import Callable
from typing import TypeVar

from pydantic import ValidationError

from engagement.exceptions import EngagementException

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

T = TypeVar("T")


def _diagnostic(message: str) -> None:
    print(f"error: {message}", file=sys.stderr)


def engagement_exception_handler(exc: EngagementException) -> int:
    """
    Handle EngagementException and all subclasses.

    Returns the exception's own exit code.
    """
    logger.debug(
        f"{exc.__class__.__name__}: {exc.message}",
        extra={"exit_code": exc.exit_code, "detail": exc.detail},
    )
    _diagnostic(exc.message)
    return exc.exit_code


def validation_exception_handler(exc: ValidationError) -> int:
    """Handle pydantic validation errors raised while building the run configuration."""
    logger.debug("Validation error", extra={"errors": exc.errors()})
    first = exc.errors()[0]
    location = ".".join(str(part) for part in first["loc"]) or exc.title
    _diagnostic(f"invalid value for {location}: {first['msg']}")
    return EXIT_USAGE


def generic_exception_handler(exc: Exception) -> int:
    """Handle unexpected exceptions; the traceback goes to the log."""
    logger.exception(
        f"Unhandled exception: {exc}",
        extra={"exception_type": exc.__class__.__name__},
    )
    _diagnostic(f"unexpected {exc.__class__.__name__}: {exc}")
    return EXIT_FAILURE


def run_guarded(action: Callable[[], T], validation_is_usage: bool = False) -> T | int:
    """
    Run ``action`` and turn any exception into an exit code.

    Args:
        action: Zero-argument callable
        validation_is_usage: Treat pydantic ValidationError as a usage error (exit 2)
            rather than a pipeline error (exit 1)

    Returns:
        The action's result, or the exit code of the handled exception
    """
    try:
        return action()
    except EngagementException as exc:
        return engagement_exception_handler(exc)
    except ValidationError as exc:
        if validation_is_usage:
            return validation_exception_handler(exc)
        return generic_exception_handler(exc)
    except Exception as exc:
        return generic_exception_handler(exc)
