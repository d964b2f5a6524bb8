"""
JSON model and ensemble files
"""
import hashlib
import logging
from pathlib import Path
from typing import Union

import numpy as np

from helpers.exceptions import DegenerateModel, InvalidSymmetry, PointOutsideModel
from models.gp_model import GpModel, StateVec, fit_affine_map, validate_model
from models.schemas import EnsembleFile, ModelFile, SymmetryRecord

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _canonical_order(model: GpModel) -> list:
    points = model.affine_vertices
    return sorted(range(model.n_vertices), key=lambda i: tuple(points[i]))


class ModelStore:

    @staticmethod
    def model_to_file(model: GpModel) -> ModelFile:
        """File record with vertices in lexicographic order and permutations remapped to it."""
        order = _canonical_order(model)
        position = {old: new for new, old in enumerate(order)}
        points = model.affine_vertices[order]
        records = None
        if model.symmetry:
            records = []
            for generator in model.symmetry:
                perm = [position[generator[old]] for old in order]
                try:
                    matrix, offset = fit_affine_map(points, perm)
                except InvalidSymmetry:
                    logger.warning("%s: generator %s has no affine fit; stored without a map", model.name, perm)
                    records.append(SymmetryRecord(perm=perm))
                    continue
                records.append(SymmetryRecord(perm=perm, matrix=matrix.tolist(), offset=offset.tolist()))
        return ModelFile(name=model.name, dim=model.dim, vertices=points.tolist(), symmetry=records,
                         metadata=dict(model.metadata))

    @staticmethod
    def model_hash(model: GpModel) -> str:
        """sha256 of the canonical dimension and vertex list."""
        record = ModelStore.model_to_file(model)
        payload = record.model_dump_json(include={"dim", "vertices"})
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    @staticmethod
    def save_model(model: GpModel, path: PathLike) -> Path:
        path = Path(path)
        if path.parent and not path.parent.exists():
            path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(ModelStore.model_to_file(model).model_dump_json(indent=2, exclude_none=True) + "\n")
        logger.info("Wrote %s (%d vertices) to %s", model.name, model.n_vertices, path)
        return path

    @staticmethod
    def from_file(record: ModelFile) -> GpModel:
        symmetry = [r.perm for r in record.symmetry or []]
        model = validate_model(record.vertices, name=record.name, symmetry=symmetry, metadata=record.metadata)
        if model.dim != record.dim:
            raise DegenerateModel(f"{record.name} declares dim {record.dim} but its vertices span an affine hull "
                                  f"of dimension {model.dim}")
        return model

    @staticmethod
    def load_model(path: PathLike) -> GpModel:
        """Read and validate a JSON model file."""
        record = ModelFile.model_validate_json(Path(path).read_text())
        model = ModelStore.from_file(record)
        logger.info("Loaded %s from %s", model.name, path)
        return model


class EnsembleStore:

    @staticmethod
    def load_ensemble(path: PathLike):
        """Model and Ensemble from an ensemble file; a relative model path is taken from the file's folder."""
        from controllers.helstrom import Ensemble
        from controllers.zoo import ZooController

        path = Path(path)
        record = EnsembleFile.model_validate_json(path.read_text())
        sibling = path.parent / record.model
        model = ModelStore.load_model(sibling) if sibling.is_file() else ZooController.resolve_model(record.model)
        states = [EnsembleStore._state(entry, model) for entry in record.states]
        return model, Ensemble(states, record.weights)

    @staticmethod
    def _state(entry, model: GpModel) -> StateVec:
        if isinstance(entry, int):
            if not 0 <= entry < model.n_vertices:
                raise PointOutsideModel(f"Vertex index {entry} out of range for {model.name}")
            return model.vertex(entry)
        coords = np.asarray(entry, dtype=float)
        if coords.shape != (model.dim,):
            raise PointOutsideModel(f"State {entry} does not have {model.dim} coordinates")
        return StateVec.from_affine(coords)

    @staticmethod
    def ensemble_to_file(model_ref: str, ensemble, model: GpModel) -> EnsembleFile:
        states: list = []
        for s in ensemble.states:
            index = model.vertex_index(s)
            states.append(index if index is not None else s.affine.tolist())
        return EnsembleFile(model=model_ref, states=states, weights=ensemble.weights.tolist())
