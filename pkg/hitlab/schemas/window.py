"""
Window Schemas

Finite-horizon carriers: WindowSet (a subset of {0, ..., H}), three-valued verdicts,
Furstenberg family predicates and the certain/possible pairs produced by the hitting
computations.
"""

import enum
from bisect import bisect_left
from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .system import Cell


class Verdict(str, enum.Enum):
    HOLDS = "holds-at-horizon"
    FAILS = "fails-at-horizon"
    INCONCLUSIVE = "inconclusive"

    @property
    def exit_code(self) -> int:
        return {Verdict.HOLDS: 0, Verdict.FAILS: 1, Verdict.INCONCLUSIVE: 2}[self]


# fails dominates inconclusive dominates holds when aggregating
VERDICT_SEVERITY = {Verdict.HOLDS: 0, Verdict.INCONCLUSIVE: 1, Verdict.FAILS: 2}


class WindowSet(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    horizon: int = Field(ge=0)
    members: Tuple[int, ...] = ()

    @model_validator(mode="before")
    @classmethod
    def _normalize(cls, data: Any) -> Any:
        if isinstance(data, dict) and "members" in data:
            data = {**data, "members": tuple(sorted(set(data["members"])))}
        return data

    @model_validator(mode="after")
    def _inside_window(self) -> "WindowSet":
        if self.members and (self.members[0] < 0 or self.members[-1] > self.horizon):
            raise ValueError(f"members must lie in [0, {self.horizon}]")
        return self

    @classmethod
    def of(cls, horizon: int, members) -> "WindowSet":
        return cls(horizon=horizon, members=tuple(members))

    def __contains__(self, n: object) -> bool:
        i = bisect_left(self.members, n)
        return i < len(self.members) and self.members[i] == n


class FamilyVerdict(BaseModel):
    family: str
    statistic: Dict[str, Any] = Field(default_factory=dict)
    verdict: Verdict
    params: Dict[str, Any] = Field(default_factory=dict)


class IPSearch(BaseModel):
    basis: Optional[Tuple[int, ...]] = None
    exhaustive: bool
    nodes: int
    bound: int


class DualConsistency(BaseModel):
    premise: bool
    conclusion: bool
    run_length_needed: Optional[int] = None
    witness: Optional[int] = None

    @property
    def consistent(self) -> bool:
        return not self.premise or self.conclusion


# ---------------------------------------------------------------------------
# Family predicates; None thresholds default from the horizon
# ---------------------------------------------------------------------------


class _Predicate(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class ThickFamily(_Predicate):
    family: Literal["thick"] = "thick"
    min_run: Optional[int] = Field(default=None, ge=1)


class SyndeticFamily(_Predicate):
    family: Literal["syndetic"] = "syndetic"
    max_gap: Optional[int] = Field(default=None, ge=1)


class ThicklySyndeticFamily(_Predicate):
    family: Literal["thickly_syndetic"] = "thickly_syndetic"
    run_length: int = Field(default=2, ge=1)
    max_gap: Optional[int] = Field(default=None, ge=1)


class CofiniteFamily(_Predicate):
    family: Literal["cofinite"] = "cofinite"
    tail_start_max: Optional[int] = Field(default=None, ge=0)


class IPFamily(_Predicate):
    family: Literal["ip"] = "ip"
    depth: int = Field(default=2, ge=1)


FamilyPredicate = Annotated[
    Union[ThickFamily, SyndeticFamily, ThicklySyndeticFamily, CofiniteFamily, IPFamily],
    Field(discriminator="family"),
]


# ---------------------------------------------------------------------------
# Hitting outputs
# ---------------------------------------------------------------------------


class TaggedWindowSet(BaseModel):
    """certain is contained in possible; equal for subshifts"""

    model_config = ConfigDict(frozen=True)

    certain: WindowSet
    possible: WindowSet
    params: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _certain_inside_possible(self) -> "TaggedWindowSet":
        if self.certain.horizon != self.possible.horizon:
            raise ValueError("certain and possible must share the horizon")
        if not set(self.certain.members) <= set(self.possible.members):
            raise ValueError("certain must be contained in possible")
        return self

    @classmethod
    def exact(cls, horizon: int, members, **params: Any) -> "TaggedWindowSet":
        ws = WindowSet.of(horizon, members)
        return cls(certain=ws, possible=ws, params=params)


class CellSetApprox(BaseModel):
    cells: List[Cell]
    depth: int
    horizon: int
    pair_budget: Optional[int] = None
    pairs_tested: int = 0
    schedule: List[int] = Field(default_factory=list)
    direction: Literal["outer"] = "outer"
    params: Dict[str, Any] = Field(default_factory=dict)


__all__ = [
    "Verdict",
    "VERDICT_SEVERITY",
    "WindowSet",
    "FamilyVerdict",
    "IPSearch",
    "DualConsistency",
    "ThickFamily",
    "SyndeticFamily",
    "ThicklySyndeticFamily",
    "CofiniteFamily",
    "IPFamily",
    "FamilyPredicate",
    "TaggedWindowSet",
    "CellSetApprox",
]
