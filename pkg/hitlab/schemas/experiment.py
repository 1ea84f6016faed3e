"""
Experiment Schemas

Fixtures, experiment configs, per-operation parameter models and run reports.
"""

from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .entropy import FullSequence, SequenceSpec
from .system import Cell, PointSpec, SystemSpec
from .window import FamilyPredicate, Verdict


class Fixture(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    description: str
    system: SystemSpec
    point: Optional[PointSpec] = None


class SystemRef(BaseModel):
    """Either a fixture name or an inline system spec"""

    model_config = ConfigDict(extra="forbid")

    fixture: Optional[str] = None
    spec: Optional[SystemSpec] = None

    @model_validator(mode="after")
    def _exactly_one(self) -> "SystemRef":
        if (self.fixture is None) == (self.spec is None):
            raise ValueError("give exactly one of 'fixture' or 'spec'")
        return self


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    operation: str
    output_dir: str = "hitlab-out"
    system: Optional[SystemRef] = None
    params: Dict[str, Any] = Field(default_factory=dict)
    caps: Dict[str, Any] = Field(default_factory=dict)


class Series(BaseModel):
    columns: List[str]
    rows: List[List[Union[int, float]]]


class RunReport(BaseModel):
    config: Dict[str, Any]
    operation: str
    result: Any = None
    verdict: Optional[Verdict] = None
    exit_code: int
    runtime_ms: float
    tool_version: str
    series: Dict[str, Series] = Field(default_factory=dict)


# ---------------------------------------------------------------------------
# Operation parameters; unknown keys are rejected
# ---------------------------------------------------------------------------


class _Params(BaseModel):
    model_config = ConfigDict(extra="forbid")


class DepthHorizonParams(_Params):
    depth: int = Field(default=2, ge=1)
    horizon: int = Field(default=64, ge=0)


class TotalTransitivityParams(DepthHorizonParams):
    k: int = Field(default=2, ge=1)


class FamilyTransitivityParams(DepthHorizonParams):
    family: FamilyPredicate


class SensitivityParams(DepthHorizonParams):
    delta: float = Field(default=0.5, gt=0)


class MultiSensitivityParams(SensitivityParams):
    k: int = Field(default=2, ge=1)


class LyapunovParams(DepthHorizonParams):
    burn_in: Optional[int] = Field(default=None, ge=0)
    arity: int = Field(default=2, ge=2)
    sample: Optional[List[PointSpec]] = None


class LyapunovSweepParams(_Params):
    depth: int = Field(default=2, ge=1)
    horizons: List[int] = Field(default_factory=lambda: [8, 16, 32, 64])
    arity: int = Field(default=2, ge=2)
    sample: Optional[List[PointSpec]] = None


class SampleParams(DepthHorizonParams):
    sample: Optional[List[PointSpec]] = None
    pair_budget: int = Field(default=256, ge=1)


class PointSearchParams(DepthHorizonParams):
    point: Optional[PointSpec] = None
    delta: float = Field(default=0.4, gt=0)
    burn_in: Optional[int] = Field(default=None, ge=0)


class LiYorkeEvidenceParams(DepthHorizonParams):
    sample: Optional[List[PointSpec]] = None
    delta: float = Field(default=0.4, gt=0)
    burn_in: Optional[int] = Field(default=None, ge=0)


class ProximalParams(DepthHorizonParams):
    point: Optional[PointSpec] = None
    epsilon: Optional[float] = Field(default=None, gt=0)


class EquicontinuityParams(DepthHorizonParams):
    point: Optional[PointSpec] = None
    epsilon: float = Field(default=0.1, gt=0)


class EntropyParams(_Params):
    sequence: SequenceSpec = Field(default_factory=FullSequence)
    epsilons: List[float] = Field(default_factory=lambda: [0.3])
    k_max: int = Field(default=10, ge=2)


class SepProfileParams(_Params):
    sequence: SequenceSpec = Field(default_factory=FullSequence)
    epsilon: float = Field(default=0.3, gt=0)
    k_max: int = Field(default=10, ge=2)


class NewpropParams(_Params):
    base: int = Field(default=10, ge=2)
    n_max: int = Field(default=5, ge=1)
    visit_shift: int = 0


class OmegaParams(DepthHorizonParams):
    point: Optional[PointSpec] = None
    pair_budget: int = Field(default=256, ge=1)


class HittingParams(_Params):
    u: Cell
    v: Cell
    horizon: int = Field(default=64, ge=0)


class SensitivitySetParams(_Params):
    u: Cell
    delta: float = Field(default=0.5, gt=0)
    horizon: int = Field(default=64, ge=0)


class VisitParams(_Params):
    g: Cell
    point: Optional[PointSpec] = None
    horizon: int = Field(default=64, ge=0)


__all__ = [
    "Fixture",
    "SystemRef",
    "ExperimentConfig",
    "Series",
    "RunReport",
    "DepthHorizonParams",
    "TotalTransitivityParams",
    "FamilyTransitivityParams",
    "SensitivityParams",
    "MultiSensitivityParams",
    "LyapunovParams",
    "LyapunovSweepParams",
    "SampleParams",
    "PointSearchParams",
    "LiYorkeEvidenceParams",
    "ProximalParams",
    "EquicontinuityParams",
    "EntropyParams",
    "SepProfileParams",
    "NewpropParams",
    "OmegaParams",
    "HittingParams",
    "SensitivitySetParams",
    "VisitParams",
]
