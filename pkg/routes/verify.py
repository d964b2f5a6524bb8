"""
Verify command: invariant suites over seeded random models or the zoo
"""
import json

from controllers.analysis import SUITES, AnalysisController
from helpers.exceptions import EXIT_OK, EXIT_VERDICT_FAILED
from helpers.router import CommandRouter, arg, emit

router = CommandRouter(help="Verification suites")


@router.command("verify", help="run an invariant suite; exit 0 iff every instance passes",
                arguments=[arg("suite", choices=SUITES + ("all",)),
                           arg("--count", type=int, default=20), arg("--seed", type=int, default=0),
                           arg("--zoo", action="store_true", help="run over the zoo instead of random models"),
                           arg("--out", default=None, help="output path (default: stdout)")])
def verify(args) -> int:
    if args.count < 1:
        raise ValueError("--count must be positive")
    summaries = AnalysisController.verify(args.suite, args.count, args.seed, args.zoo)
    emit(json.dumps([s.model_dump(mode="json") for s in summaries], indent=2), args.out)
    return EXIT_OK if all(s.passed for s in summaries) else EXIT_VERDICT_FAILED
