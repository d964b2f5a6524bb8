"""
Global CLI options: tolerance, LP dumps and logging
"""
import argparse
import logging
import sys

from config.settings import settings

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"


def global_options() -> argparse.ArgumentParser:
    """Parent parser carrying the options every command accepts."""
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--tol", type=float, default=None, help="LP tolerance (default: GPTGEO_TOL or 1e-9)")
    parser.add_argument("--dump-lp", dest="dump_lp", default=None, metavar="DIR",
                        help="write every linear program to DIR as plain text")
    parser.add_argument("--log-level", dest="log_level", default=None,
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="stderr log level")
    return parser


def configure_logging(level: str = None):
    """An explicit level wins; otherwise DEBUG=true turns on debug output, else GPTGEO_LOG_LEVEL applies."""
    if level is None:
        level = "DEBUG" if settings.DEBUG else settings.LOG_LEVEL
    logging.basicConfig(stream=sys.stderr, level=level.upper(), format=LOG_FORMAT, force=True)


def apply_global_options(args: argparse.Namespace):
    tol = getattr(args, "tol", None)
    if tol is not None:
        if not tol > 0:
            raise ValueError("--tol must be positive")
        settings.LP_TOL = tol
    dump_dir = getattr(args, "dump_lp", None)
    if dump_dir:
        settings.LP_DUMP_DIR = dump_dir
    configure_logging(getattr(args, "log_level", None))
