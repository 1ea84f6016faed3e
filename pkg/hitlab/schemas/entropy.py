"""
Entropy Schemas

Time sequences N = (n_0 = 0 < n_1 < ...) and separated-set profiles.
"""

from typing import Annotated, Dict, List, Literal, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator


class _Sequence(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class FullSequence(_Sequence):
    """n_j = j; every time step"""

    kind: Literal["full"] = "full"


class ArithmeticSequence(_Sequence):
    """0 followed by a*j + b for j >= 0"""

    kind: Literal["arithmetic"] = "arithmetic"
    a: int = Field(ge=1)
    b: int = Field(ge=1)


class GeometricSequence(_Sequence):
    """0 followed by c^j for j >= 1"""

    kind: Literal["geometric"] = "geometric"
    c: int = Field(ge=2)


class ExplicitSequence(_Sequence):
    """0 followed by the given strictly increasing positive times"""

    kind: Literal["explicit"] = "explicit"
    values: Tuple[int, ...]

    @model_validator(mode="after")
    def _increasing(self) -> "ExplicitSequence":
        previous = 0
        for v in self.values:
            if v <= previous:
                raise ValueError("explicit sequence must be strictly increasing and positive")
            previous = v
        return self


SequenceSpec = Annotated[
    Union[FullSequence, ArithmeticSequence, GeometricSequence, ExplicitSequence],
    Field(discriminator="kind"),
]


class SepProfile(BaseModel):
    counts: List[int]
    epsilon: float
    slope: float
    method: Literal["exact", "greedy"]

    @property
    def ks(self) -> List[int]:
        return list(range(1, len(self.counts) + 1))


class EntropyEstimate(BaseModel):
    value: float
    method: Literal["exact", "greedy"]
    k_max: int
    per_epsilon: Dict[str, float] = Field(default_factory=dict)
    profiles: List[SepProfile] = Field(default_factory=list)


__all__ = [
    "FullSequence",
    "ArithmeticSequence",
    "GeometricSequence",
    "ExplicitSequence",
    "SequenceSpec",
    "SepProfile",
    "EntropyEstimate",
]
