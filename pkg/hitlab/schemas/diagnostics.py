"""
Diagnostics Schemas

Verdicts, Lyapunov reports and the profile tables produced by
:mod:`hitlab.services.diagnostics_service`.
"""

from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from .system import Cell, PointSpec
from .window import Verdict

LYAPUNOV_KEYS = ("L_r", "Lbar_r", "L_d", "Lbar_d", "L_mr", "Lbar_mr", "L_md", "Lbar_md")


class DiagnosticVerdict(BaseModel):
    property: str
    verdict: Verdict
    witness: Optional[Any] = None
    params: Dict[str, Any] = Field(default_factory=dict)
    runtime_ms: float = 0.0
    notes: List[str] = Field(default_factory=list)


class LyapunovReport(BaseModel):
    """Eight horizon-limited Lyapunov estimates

    ``estimates`` are net of the initial cell scale: a value counts only when it
    exceeds ``threshold`` (the largest depth-D cell diameter) and is 0 otherwise.
    ``raw`` keeps the values before that rule is applied.
    """

    estimates: Dict[str, float]
    raw: Dict[str, float]
    threshold: float
    params: Dict[str, Any] = Field(default_factory=dict)
    certified_relations: List[str] = Field(default_factory=list)
    observed_relations: Dict[str, bool] = Field(default_factory=dict)
    runtime_ms: float = 0.0


class LyapunovSweepRow(BaseModel):
    horizon: int
    burn_in: int
    estimates: Dict[str, float]


class LyapunovSweep(BaseModel):
    rows: List[LyapunovSweepRow]
    params: Dict[str, Any] = Field(default_factory=dict)


class CellRun(BaseModel):
    cell: Cell
    max_run: int


class ThickSensitivityProfile(BaseModel):
    rows: List[CellRun]
    min_run: int
    params: Dict[str, Any] = Field(default_factory=dict)


class SensitivityHierarchy(BaseModel):
    levels: Dict[str, Verdict]
    witnesses: Dict[str, Optional[Cell]] = Field(default_factory=dict)
    params: Dict[str, Any] = Field(default_factory=dict)


class LiYorkeWitness(BaseModel):
    point: PointSpec
    candidate: str
    min_distance: float
    max_distance: float
    n_min: int
    n_max: int


class ProximalCell(BaseModel):
    cell: Cell
    witness: Optional[PointSpec] = None
    candidate: Optional[str] = None


class ProximalReport(BaseModel):
    fraction: float
    cells: List[ProximalCell]
    params: Dict[str, Any] = Field(default_factory=dict)


class LiYorkeEvidence(BaseModel):
    fraction: float
    witnesses: List[Optional[LiYorkeWitness]]
    params: Dict[str, Any] = Field(default_factory=dict)


__all__ = [
    "LYAPUNOV_KEYS",
    "DiagnosticVerdict",
    "LyapunovReport",
    "LyapunovSweepRow",
    "LyapunovSweep",
    "CellRun",
    "ThickSensitivityProfile",
    "SensitivityHierarchy",
    "LiYorkeWitness",
    "ProximalCell",
    "ProximalReport",
    "LiYorkeEvidence",
]
