"""
Exit-code mapping for command handlers
"""
import functools
import logging

from pydantic import ValidationError

from helpers.exceptions import EXIT_BAD_INPUT, GpException
from helpers.router import Handler

logger = logging.getLogger(__name__)


def handle_errors(handler: Handler) -> Handler:
    """Turn escaping exceptions into the CLI exit-code contract."""

    @functools.wraps(handler)
    def wrapper(args) -> int:
        try:
            return handler(args)
        except GpException as exc:
            logger.error("%s: %s", type(exc).__name__, exc.detail)
            return exc.exit_code
        except ValidationError as exc:
            logger.error("Invalid input file: %s", exc)
            return EXIT_BAD_INPUT
        except (FileNotFoundError, ValueError) as exc:
            logger.error("%s", exc)
            return EXIT_BAD_INPUT

    return wrapper
