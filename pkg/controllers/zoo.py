"""
Zoo controller: model generators, symmetry averaging and reference cards
"""
import itertools
import logging
import math
import os
import re
from typing import Callable, Dict, List

import numpy as np
from scipy.spatial import ConvexHull

from helpers.exceptions import DegenerateModel, InvalidSymmetry, NotTransitive, NumericalFailure, UnknownModel
from models.gp_model import GpModel, StateVec, random_model, symmetry_group, validate_model
from models.schemas import ReferenceCard

logger = logging.getLogger(__name__)

_GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))

_ALIASES = {
    "bit": "simplex-2",
    "pentagon": "polygon-5",
    "square": "hypercube-2",
    "gbit": "hypercube-2",
    "cube": "hypercube-3",
}

# prism base names and the polygons they stand for
_PRISM_BASES = {"triangle": "polygon-3", "square": "polygon-4", "pentagon": "polygon-5"}
_PRISM_NAMES = {polygon: base for base, polygon in _PRISM_BASES.items()}


def _perm_from_map(points: List[tuple], image: Callable[[tuple], tuple]) -> tuple:
    index = {p: i for i, p in enumerate(points)}
    return tuple(index[image(p)] for p in points)


class ZooController:

    @staticmethod
    def simplex(d: int) -> GpModel:
        """Classical d-outcome system: standard basis of R^d charted by its first d-1 coordinates."""
        if d < 2:
            raise DegenerateModel("simplex needs d >= 2")
        points = np.eye(d)[:, :d - 1]
        transposition = (1, 0) + tuple(range(2, d))
        cycle = tuple((i + 1) % d for i in range(d))
        generators = [transposition] if d == 2 else [transposition, cycle]
        return validate_model(points, name=f"simplex-{d}", symmetry=generators, metadata={"family": "simplex"})

    @staticmethod
    def regular_polygon(k: int) -> GpModel:
        if k < 3:
            raise DegenerateModel("regular_polygon needs k >= 3")
        angles = 2.0 * math.pi * np.arange(k) / k
        points = np.column_stack([np.cos(angles), np.sin(angles)])
        rotation = tuple((j + 1) % k for j in range(k))
        reflection = tuple((-j) % k for j in range(k))
        return validate_model(points, name=f"polygon-{k}", symmetry=[rotation, reflection],
                              metadata={"family": "polygon"})

    @staticmethod
    def hypercube(dim: int) -> GpModel:
        """[-1, 1]^dim, vertices in itertools.product order."""
        if dim < 1:
            raise DegenerateModel("hypercube needs dim >= 1")
        points = list(itertools.product((-1.0, 1.0), repeat=dim))
        generators = [
            _perm_from_map(points, lambda p: (-p[0],) + p[1:]),
            _perm_from_map(points, lambda p: p[-1:] + p[:-1]),
        ]
        if dim >= 2:
            generators.append(_perm_from_map(points, lambda p: (p[1], p[0]) + p[2:]))
        generators = list(dict.fromkeys(g for g in generators if g != tuple(range(len(points)))))
        return validate_model(np.array(points), name=f"hypercube-{dim}", symmetry=generators,
                              metadata={"family": "hypercube"})

    @staticmethod
    def icosphere(frequency: int) -> np.ndarray:
        """Unit-sphere points of the frequency-f subdivided icosahedron (10 f^2 + 2 of them), sorted."""
        if frequency < 1:
            raise DegenerateModel("icosphere frequency must be at least 1")
        phi = (1.0 + math.sqrt(5.0)) / 2.0
        base = np.array([p for a, b in itertools.product((-1.0, 1.0), (-phi, phi))
                         for p in ((0.0, a, b), (a, b, 0.0), (b, 0.0, a))])
        faces = sorted(tuple(sorted(int(i) for i in face)) for face in ConvexHull(base).simplices)
        found: Dict[tuple, np.ndarray] = {}
        for a, b, c in faces:
            for i in range(frequency + 1):
                for j in range(frequency + 1 - i):
                    point = i * base[a] + j * base[b] + (frequency - i - j) * base[c]
                    point = point / np.linalg.norm(point)
                    found.setdefault(tuple(np.round(point, 9)), point)
        expected = 10 * frequency ** 2 + 2
        if len(found) != expected:
            raise NumericalFailure(f"Icosphere produced {len(found)} points, expected {expected}")
        return np.array([found[key] for key in sorted(found)])

    @staticmethod
    def ball_approx(dim: int, k: int, seed: int = 0) -> GpModel:
        """k well-spread unit-sphere points: polygon for dim 2, icosphere or Fibonacci lattice for dim 3,
        seeded rejection sampling above."""
        if dim < 2 or k < dim + 1:
            raise DegenerateModel(f"ball_approx needs dim >= 2 and k >= dim + 1, got dim={dim}, k={k}")
        metadata = {"family": "ball", "seed": str(seed)}
        if dim == 2:
            angles = 2.0 * math.pi * np.arange(k) / k
            points = np.column_stack([np.cos(angles), np.sin(angles)])
            metadata["construction"] = "polygon"
        elif dim == 3:
            frequency = math.isqrt(max(0, (k - 2) // 10))
            if 10 * frequency ** 2 + 2 == k:
                points = ZooController.icosphere(frequency)
                metadata["construction"] = f"icosphere-{frequency}"
            else:
                i = np.arange(k) + 0.5
                z = 1.0 - 2.0 * i / k
                r = np.sqrt(1.0 - z ** 2)
                theta = _GOLDEN_ANGLE * np.arange(k)
                points = np.column_stack([r * np.cos(theta), r * np.sin(theta), z])
                metadata["construction"] = "fibonacci"
        else:
            rng = np.random.default_rng(seed)
            accepted = []
            while len(accepted) < k:
                x = rng.uniform(-1.0, 1.0, dim)
                norm = np.linalg.norm(x)
                if 0.1 <= norm <= 1.0:
                    accepted.append(x / norm)
            points = np.array(accepted)
            metadata["construction"] = "rejection"
        return validate_model(points, name=f"ball-{dim}-{k}", metadata=metadata)

    @staticmethod
    def prism(base: GpModel, height: float = 2.0) -> GpModel:
        """base x [-height/2, height/2]; bottom layer first."""
        if base.dim != 2:
            raise DegenerateModel("prism needs a two-dimensional base")
        if not height > 0:
            raise DegenerateModel("prism height must be positive")
        kb = base.n_vertices
        pts = base.affine_vertices
        points = np.vstack([np.column_stack([pts, np.full(kb, -height / 2)]),
                            np.column_stack([pts, np.full(kb, height / 2)])])
        generators = [tuple(g) + tuple(j + kb for j in g) for g in base.symmetry]
        generators.append(tuple(range(kb, 2 * kb)) + tuple(range(kb)))
        name = _PRISM_NAMES.get(base.name, base.name)
        return validate_model(points, name=f"{name}-prism", symmetry=generators,
                              metadata={"family": "prism", "height": repr(float(height))})

    @staticmethod
    def maximally_mixed(model: GpModel, start: int = 0) -> StateVec:
        """Symmetry-group average of a vertex; the group must act transitively."""
        group = symmetry_group(model)
        if len({g[start] for g in group}) != model.n_vertices:
            raise NotTransitive(f"Recorded symmetry of {model.name} is not transitive on vertices")
        average = np.mean([model.vertices[g[start]] for g in group], axis=0)
        other = np.mean([model.vertices[g[model.n_vertices - 1 - start]] for g in group], axis=0)
        if np.max(np.abs(average - other)) > 1e-12 * max(1.0, float(np.max(np.abs(average)))):
            raise InvalidSymmetry("Orbit average depends on the starting vertex")
        return StateVec(average)

    @staticmethod
    def build(name: str) -> GpModel:
        """Zoo model by name: simplex-d, polygon-k, hypercube-D, ball-D-k[-seed], random-D-k-seed,
        <base>-prism and the aliases bit, pentagon, square, gbit, cube."""
        logger.debug("Building zoo model %s", name)
        name = _ALIASES.get(name, name)
        match = re.fullmatch(r"(simplex|polygon|hypercube)-(\d+)", name)
        if match:
            kind, size = match.group(1), int(match.group(2))
            constructor = {"simplex": ZooController.simplex, "polygon": ZooController.regular_polygon,
                           "hypercube": ZooController.hypercube}[kind]
            return constructor(size)
        match = re.fullmatch(r"ball-(\d+)-(\d+)(?:-(\d+))?", name)
        if match:
            return ZooController.ball_approx(int(match.group(1)), int(match.group(2)), int(match.group(3) or 0))
        match = re.fullmatch(r"random-(\d+)-(\d+)-(\d+)", name)
        if match:
            return random_model(int(match.group(1)), int(match.group(2)), int(match.group(3)))
        match = re.fullmatch(r"(.+)-prism", name)
        if match:
            base = _PRISM_BASES.get(match.group(1), match.group(1))
            return ZooController.prism(ZooController.build(base))
        raise UnknownModel(f"Unknown zoo model '{name}'")

    @staticmethod
    def resolve_model(spec: str) -> GpModel:
        """A JSON model file path or a zoo name."""
        if os.path.isfile(spec):
            from models.storage import ModelStore
            return ModelStore.load_model(spec)
        return ZooController.build(spec)

    @staticmethod
    def known_models() -> List[str]:
        names = [f"simplex-{d}" for d in range(2, 8)]
        names += [f"polygon-{k}" for k in range(3, 11)]
        names += [f"hypercube-{dim}" for dim in range(1, 5)]
        names += ["triangle-prism", "pentagon-prism"]
        return names

    @staticmethod
    def reference_values(name: str) -> ReferenceCard:
        key = _ALIASES.get(name, name)
        match = re.fullmatch(r"simplex-(\d+)", key)
        if match and int(match.group(1)) >= 2:
            d = int(match.group(1))
            return ReferenceCard(name=name, m=d - 1, n=d, d=d, critical_state=[1.0 / d] * (d - 1), source="published",
                                 note="classical system: m = d - 1, chain saturated")
        match = re.fullmatch(r"polygon-(\d+)", key)
        if match and int(match.group(1)) >= 3:
            k = int(match.group(1))
            m = 1.0 if k % 2 == 0 else 1.0 / math.cos(math.pi / k)
            return ReferenceCard(name=name, m=m, n=m + 1.0, d=3 if k == 3 else 2, critical_state=[0.0, 0.0],
                                 source="published" if k == 5 else "derived",
                                 note="even polygons are point-symmetric; odd ones have m = 1/cos(pi/k)")
        match = re.fullmatch(r"hypercube-(\d+)", key)
        if match and int(match.group(1)) >= 1:
            dim = int(match.group(1))
            return ReferenceCard(name=name, m=1.0, n=2.0, d=2, critical_state=[0.0] * dim, source="derived",
                                 note="point-symmetric: m = 1")
        if key == "triangle-prism":
            return ReferenceCard(name=name, m=2.0, n=3.0, d=3, critical_state=[0.0, 0.0, 0.0], source="derived",
                                 note="critical set is the axis segment |z| <= 1/3 for height 2")
        if key == "pentagon-prism":
            m = 1.0 / math.cos(math.pi / 5)
            return ReferenceCard(name=name, m=m, n=m + 1.0, d=2, critical_state=[0.0, 0.0, 0.0], source="derived",
                                 note="distortion governed by the pentagonal cross-section")
        if key == "square-prism":
            return ReferenceCard(name=name, m=1.0, n=2.0, d=2, critical_state=[0.0, 0.0, 0.0], source="derived",
                                 note="a cube")
        match = re.fullmatch(r"ball-3-(\d+)(?:-\d+)?", key)
        if match:
            return ReferenceCard(name=name, m=1.0, n=2.0, d=2, critical_state=[0.0, 0.0, 0.0], source="published",
                                 note="qubit limit: m = d - 1 for d = 2 and the boundariness of a Bloch vector r "
                                      "is the smallest eigenvalue (1 - |r|)/2; polytopes approach from above")
        raise UnknownModel(f"No reference card for '{name}'")
