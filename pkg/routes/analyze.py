"""
Analysis commands: full report, storable information, Minkowski measure and D_max
"""
from controllers.analysis import AnalysisController
from controllers.zoo import ZooController
from helpers.exceptions import EXIT_OK, EXIT_VERDICT_FAILED, PointOutsideModel
from helpers.router import CommandRouter, arg, emit
from models.gp_model import GpModel, StateVec

router = CommandRouter(help="Analyse a model")

MODEL = arg("model", help="model file or zoo name")
OUT = arg("--out", default=None, help="output path (default: stdout)")


def _state(text: str, model: GpModel) -> StateVec:
    """A vertex index, or comma-separated affine coordinates."""
    text = text.strip()
    if text.lstrip("-").isdigit():
        index = int(text)
        if not 0 <= index < model.n_vertices:
            raise PointOutsideModel(f"Vertex index {index} out of range for {model.name}")
        return model.vertex(index)
    coords = [float(x) for x in text.split(",")]
    if len(coords) != model.dim:
        raise PointOutsideModel(f"State '{text}' does not have {model.dim} coordinates")
    return StateVec.from_affine(coords)


@router.command("analyze", help="m, n, d, capacity bound and verdicts",
                arguments=[MODEL, OUT, arg("--timing", action="store_true", help="record wall-clock seconds")])
def analyze(args) -> int:
    report = AnalysisController.analyze(ZooController.resolve_model(args.model), timing=args.timing)
    emit(report.model_dump_json(indent=2, exclude_none=True), args.out)
    return EXIT_OK if report.passed else EXIT_VERDICT_FAILED


@router.command("nstore", help="storable information of a vertex family",
                arguments=[MODEL, OUT, arg("--states", default=None, help="comma-separated vertex indices")])
def nstore(args) -> int:
    model = ZooController.resolve_model(args.model)
    family = [int(i) for i in args.states.split(",")] if args.states else None
    emit(AnalysisController.storable(model, family).model_dump_json(indent=2), args.out)
    return EXIT_OK


@router.command("minkowski", help="Minkowski measure and a critical state",
                arguments=[MODEL, OUT, arg("--samples", type=int, default=0), arg("--seed", type=int, default=0)])
def minkowski(args) -> int:
    model = ZooController.resolve_model(args.model)
    emit(AnalysisController.minkowski(model, args.samples, args.seed).model_dump_json(indent=2), args.out)
    return EXIT_OK


@router.command("dmax", help="max-relative entropy D_max(s1||s2) in bits",
                arguments=[MODEL, arg("s1", help="vertex index or coordinates"),
                           arg("s2", help="vertex index or coordinates"), OUT])
def dmax(args) -> int:
    model = ZooController.resolve_model(args.model)
    report = AnalysisController.dmax(model, _state(args.s1, model), _state(args.s2, model))
    emit(report.model_dump_json(indent=2), args.out)
    return EXIT_OK
