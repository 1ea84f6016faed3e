"""
Construction Schemas

Difference-set specifications (PSpec) and the constructed newprop bundle with its
verification trace.
"""

from typing import Annotated, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class AllP(_Frozen):
    """P = every positive integer"""

    kind: Literal["all"] = "all"


class ResiduesP(_Frozen):
    kind: Literal["residues"] = "residues"
    modulus: int = Field(ge=1)
    residues: Tuple[int, ...]

    @model_validator(mode="after")
    def _residues_in_range(self) -> "ResiduesP":
        if not self.residues:
            raise ValueError("at least one residue is required")
        if any(not 0 <= r < self.modulus for r in self.residues):
            raise ValueError("residues must lie in [0, modulus)")
        return self


class SquaresP(_Frozen):
    """P = union over m >= 1 of [m^2 + 1, m^2 + m]; thick, with gaps of every size"""

    kind: Literal["squares"] = "squares"


class PowerBlocksP(_Frozen):
    """P = {B^n + s : n >= 1, 1 <= s <= n}"""

    kind: Literal["power_blocks"] = "power_blocks"
    base: int = Field(ge=2)


class ExplicitP(_Frozen):
    kind: Literal["explicit"] = "explicit"
    members: Tuple[int, ...]

    @model_validator(mode="after")
    def _positive(self) -> "ExplicitP":
        if any(m < 1 for m in self.members):
            raise ValueError("P contains positive integers only")
        return self


PSpec = Annotated[Union[AllP, ResiduesP, SquaresP, PowerBlocksP, ExplicitP], Field(discriminator="kind")]


class NewpropBundle(_Frozen):
    """Parameters of the constructed point x = W 0^{a_1} W 0^{a_2} W ... in Lambda_P

    ``marker_length`` is |W| where W = 1 0^{|W|-2} 1; the block boundary b_0 is |W| - 1.
    Gap sizes, block boundaries, visit times and the interval formula are derived by
    :class:`hitlab.services.construction_service.ConstructionService`.
    """

    base: int = Field(ge=2)
    marker_length: int = Field(ge=3)

    @property
    def b0(self) -> int:
        return self.marker_length - 1

    @property
    def marker(self) -> str:
        return "1" + "0" * (self.marker_length - 2) + "1"


class NewpropTraceEntry(_Frozen):
    """One checked visit time; big integers are decimal strings or symbolic forms"""

    n: int
    visit: str
    candidate_m: str
    interval_low: str
    interval_high: str
    inside: bool
    certificate: Literal["exact", "dominance"]


class NewpropTrace(_Frozen):
    base: int
    marker_length: int
    n_max: int
    visit_shift: int = 0
    atoms: List[str] = Field(default_factory=list)
    entries: List[NewpropTraceEntry] = Field(default_factory=list)
    first_failure: Optional[int] = None


__all__ = [
    "AllP",
    "ResiduesP",
    "SquaresP",
    "PowerBlocksP",
    "ExplicitP",
    "PSpec",
    "NewpropBundle",
    "NewpropTraceEntry",
    "NewpropTrace",
]
