"""
Command router: groups CLI commands the way route modules group endpoints
"""
import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple

Handler = Callable[[argparse.Namespace], int]


@dataclass(frozen=True)
class Argument:
    flags: Tuple[str, ...]
    options: dict = field(default_factory=dict)


def arg(*flags: str, **options) -> Argument:
    return Argument(flags=flags, options=options)


@dataclass
class Command:
    name: str
    help: str
    arguments: Tuple[Argument, ...]
    handler: Handler


class CommandRouter:
    """Commands registered with ``@router.command``; a ``prefix`` nests them under one group command."""

    def __init__(self, prefix: Optional[str] = None, help: str = ""):
        self.prefix = prefix
        self.help = help
        self.commands: List[Command] = []

    def command(self, name: str, help: str = "", arguments: Sequence[Argument] = ()):
        def decorator(func: Handler) -> Handler:
            self.commands.append(Command(name=name, help=help, arguments=tuple(arguments), handler=func))
            return func
        return decorator

    def register(self, subparsers, parents: Sequence[argparse.ArgumentParser] = ()):
        target = subparsers
        if self.prefix:
            group = subparsers.add_parser(self.prefix, help=self.help)
            target = group.add_subparsers(dest=f"{self.prefix}_command", required=True)
        for cmd in self.commands:
            parser = target.add_parser(cmd.name, help=cmd.help, parents=list(parents))
            for argument in cmd.arguments:
                parser.add_argument(*argument.flags, **argument.options)
            parser.set_defaults(handler=cmd.handler)


def emit(text: str, out: Optional[str] = None):
    """Write command output to ``out`` or stdout, newline-terminated."""
    if not text.endswith("\n"):
        text += "\n"
    if out:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    else:
        sys.stdout.write(text)
