"""
Sweep command: CSV of (parameter, m, n, d, c_lb) over a model family
"""
from controllers.analysis import SWEEP_FAMILIES, AnalysisController
from helpers.exceptions import EXIT_OK
from helpers.router import CommandRouter, arg, emit

router = CommandRouter(help="Parameter sweeps")


@router.command("sweep", help="one CSV row per parameter value",
                arguments=[arg("family", choices=SWEEP_FAMILIES),
                           arg("--start", type=int, required=True), arg("--stop", type=int, required=True),
                           arg("--dim", type=int, default=3, help="ball dimension"),
                           arg("--seed", type=int, default=0),
                           arg("--out", default=None, help="output CSV (default: stdout)")])
def sweep(args) -> int:
    rows = AnalysisController.sweep(args.family, args.start, args.stop, args.dim, args.seed)
    emit(AnalysisController.sweep_csv(rows), args.out)
    return EXIT_OK
