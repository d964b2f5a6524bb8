"""
Pydantic schemas for model/ensemble files and command reports
"""
import math
from typing import Dict, List, Optional, Union

from pydantic import BaseModel, Field, field_validator, model_validator


# Model files
class SymmetryRecord(BaseModel):
    perm: List[int]
    matrix: Optional[List[List[float]]] = None
    offset: Optional[List[float]] = None


class ModelFile(BaseModel):
    name: str = "model"
    dim: int = Field(ge=1)
    vertices: List[List[float]]
    symmetry: Optional[List[SymmetryRecord]] = None
    metadata: Dict[str, str] = Field(default_factory=dict)

    @model_validator(mode="after")
    def check_shape(self):
        if len(self.vertices) < 2:
            raise ValueError("a model file needs at least two vertices")
        for row in self.vertices:
            if len(row) != self.dim:
                raise ValueError(f"vertex {row} does not have {self.dim} coordinates")
            if not all(math.isfinite(x) for x in row):
                raise ValueError(f"vertex {row} has non-finite coordinates")
        for record in self.symmetry or []:
            if sorted(record.perm) != list(range(len(self.vertices))):
                raise ValueError(f"symmetry {record.perm} is not a vertex permutation")
        return self


# Ensemble files
class EnsembleFile(BaseModel):
    model: str
    states: List[Union[int, List[float]]]
    weights: List[float]

    @model_validator(mode="after")
    def check_lengths(self):
        if not self.states:
            raise ValueError("an ensemble needs at least one state")
        if len(self.states) != len(self.weights):
            raise ValueError(f"{len(self.states)} states but {len(self.weights)} weights")
        return self


# Reference values
class ReferenceCard(BaseModel):
    name: str
    m: float
    n: float
    d: int
    critical_state: List[float]
    source: str
    note: str = ""

    @model_validator(mode="after")
    def check_identity(self):
        if abs(self.m - (self.n - 1.0)) > 1e-12:
            raise ValueError(f"reference card {self.name}: m = {self.m} but n - 1 = {self.n - 1.0}")
        return self


# Reports
class CheckResult(BaseModel):
    name: str
    passed: bool
    value: Optional[float] = None
    tolerance: Optional[float] = None
    detail: str = ""


class ModelIdentity(BaseModel):
    name: str
    hash: str
    dim: int
    n_vertices: int


class AnalysisReport(BaseModel):
    tool: str
    version: str
    model: ModelIdentity
    tolerances: Dict[str, float]
    m: float
    n: float
    n_primal: float
    n_dual: float
    gap: float
    d: int
    capacity_lb: float
    capacity_converged: bool
    point_symmetric: bool
    critical_state: List[float]
    checks: List[CheckResult]
    passed: bool
    wall_clock: Optional[float] = None

    @model_validator(mode="after")
    def check_gap(self):
        if abs(self.gap - abs(self.n_primal - self.n_dual)) > 1e-12:
            raise ValueError("gap must equal |n_primal - n_dual|")
        return self


class StorableReport(BaseModel):
    model: ModelIdentity
    family: List[int]
    n: float
    n_primal: float
    gap: float
    critical_state: List[float]
    dominating_element: List[float]


class MinkowskiReport(BaseModel):
    model: ModelIdentity
    m: float
    critical_state: List[float]
    boundariness: float
    witness_index: int
    antipode: List[float]
    point_symmetric: bool
    critical_samples: List[List[float]] = Field(default_factory=list)


class DmaxReport(BaseModel):
    model: ModelIdentity
    s1: List[float]
    s2: List[float]
    finite: bool
    ratio: Optional[float] = None
    # "inf" when s1 is not dominated by any multiple of s2
    bits: Union[float, str]


class HelstromReport(BaseModel):
    tool: str
    version: str
    model: ModelIdentity
    weights: List[float]
    ratio: float
    success_prob: float
    common_state: List[float]
    conjugates: List[List[float]]
    tilde_weights: List[float]
    degenerate: List[bool]
    checks: List[CheckResult]
    passed: bool


class VerifySummary(BaseModel):
    suite: str
    seed: int
    count: int
    instances: int
    max_deviation: float
    checks: List[CheckResult]
    passed: bool

    @field_validator("max_deviation")
    @classmethod
    def finite_deviation(cls, value: float) -> float:
        if math.isnan(value):
            raise ValueError("max_deviation is NaN")
        return value
