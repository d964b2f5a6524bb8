"""
Generator commands: write zoo models as JSON model files
"""
from controllers.zoo import ZooController
from helpers.exceptions import EXIT_OK
from helpers.router import CommandRouter, arg, emit
from models.gp_model import GpModel, random_model
from models.storage import ModelStore

router = CommandRouter(prefix="gen", help="Generate a model file")

OUT = arg("--out", default=None, help="output path (default: stdout)")


def _write(model: GpModel, out: str) -> int:
    emit(ModelStore.model_to_file(model).model_dump_json(indent=2, exclude_none=True), out)
    return EXIT_OK


@router.command("simplex", help="classical d-outcome system", arguments=[arg("--d", type=int, required=True), OUT])
def gen_simplex(args) -> int:
    return _write(ZooController.simplex(args.d), args.out)


@router.command("polygon", help="regular k-gon", arguments=[arg("--k", type=int, required=True), OUT])
def gen_polygon(args) -> int:
    return _write(ZooController.regular_polygon(args.k), args.out)


@router.command("hypercube", help="[-1, 1]^dim", arguments=[arg("--dim", type=int, required=True), OUT])
def gen_hypercube(args) -> int:
    return _write(ZooController.hypercube(args.dim), args.out)


@router.command("ball", help="polytope approximation of the unit ball",
                arguments=[arg("--dim", type=int, required=True), arg("--k", type=int, required=True),
                           arg("--seed", type=int, default=0), OUT])
def gen_ball(args) -> int:
    return _write(ZooController.ball_approx(args.dim, args.k, args.seed), args.out)


@router.command("prism", help="prism over a two-dimensional zoo model",
                arguments=[arg("--base", default="polygon-3"), arg("--height", type=float, default=2.0), OUT])
def gen_prism(args) -> int:
    return _write(ZooController.prism(ZooController.build(args.base), args.height), args.out)


@router.command("random", help="seeded random points on the sphere",
                arguments=[arg("--dim", type=int, required=True), arg("--k", type=int, required=True),
                           arg("--seed", type=int, default=0), OUT])
def gen_random(args) -> int:
    return _write(random_model(args.dim, args.k, args.seed), args.out)
