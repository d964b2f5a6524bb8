"""
Command-line entry point for the GP model geometry toolkit
"""
import argparse
import sys
from typing import List, Optional

from config.settings import settings
from middlewares.errors import handle_errors
from middlewares.options import apply_global_options, global_options

# Import routes
from routes.gen import router as gen_router
from routes.analyze import router as analyze_router
from routes.helstrom import router as helstrom_router
from routes.sweep import router as sweep_router
from routes.verify import router as verify_router

ROUTERS = (gen_router, analyze_router, helstrom_router, sweep_router, verify_router)


def create_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=settings.APP_NAME,
        description="Minkowski measure, storable information and Helstrom families of polytope GP models.",
    )
    parser.add_argument("--version", action="version", version=f"{settings.APP_NAME} {settings.APP_VERSION}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    parents = [global_options()]
    for router in ROUTERS:
        router.register(subparsers, parents)
    return parser


@handle_errors
def dispatch(args: argparse.Namespace) -> int:
    apply_global_options(args)
    return args.handler(args)


def main(argv: Optional[List[str]] = None) -> int:
    args = create_parser().parse_args(argv)
    return dispatch(args)


if __name__ == "__main__":
    sys.exit(main())
