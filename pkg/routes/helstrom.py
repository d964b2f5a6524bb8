"""
Helstrom command: optimal discrimination of an ensemble file and its certificate
"""
from controllers.analysis import AnalysisController
from helpers.exceptions import EXIT_HELSTROM_FAILED, EXIT_OK
from helpers.router import CommandRouter, arg, emit
from models.storage import EnsembleStore

router = CommandRouter(help="Helstrom families")


@router.command("helstrom", help="Helstrom family and verdicts for an ensemble file",
                arguments=[arg("ensemble", help="ensemble JSON file"),
                           arg("--out", default=None, help="output path (default: stdout)")])
def helstrom(args) -> int:
    model, ensemble = EnsembleStore.load_ensemble(args.ensemble)
    report = AnalysisController.helstrom(model, ensemble)
    emit(report.model_dump_json(indent=2), args.out)
    return EXIT_OK if report.passed else EXIT_HELSTROM_FAILED
