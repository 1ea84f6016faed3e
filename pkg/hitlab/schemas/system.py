"""
System Schemas

Finitely presented dynamical systems, exactly evaluable points, basic open sets
(cells) and metric profiles. Every model is frozen and hashable; the variants of
each type are a pydantic discriminated union on ``kind``.
"""

from fractions import Fraction
from string import ascii_lowercase, digits
from typing import Annotated, Literal, Optional, Tuple, Union

from pydantic import (
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    PlainSerializer,
    WithJsonSchema,
    field_validator,
    model_validator,
)

from .construction import PSpec

SYMBOLS = digits + ascii_lowercase


def parse_rational(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValueError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        # floats are accepted only when they are exact binary fractions
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise ValueError(f"cannot read a rational from {value!r}")


def format_rational(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


Rational = Annotated[
    Fraction,
    BeforeValidator(parse_rational),
    PlainSerializer(format_rational, return_type=str),
    WithJsonSchema({"type": "string", "pattern": r"^-?\d+/\d+$"}),
]


class FrozenModel(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", arbitrary_types_allowed=True)


# ---------------------------------------------------------------------------
# Metric profile
# ---------------------------------------------------------------------------


class MetricProfile(FrozenModel):
    kind: Literal["prefix", "circle", "torus", "interval", "wedge", "product"]
    diameter: Rational
    description: str = ""

    @field_validator("diameter")
    @classmethod
    def _positive(cls, v: Fraction) -> Fraction:
        if v <= 0:
            raise ValueError("diameter must be positive")
        return v


PREFIX_METRIC = MetricProfile(kind="prefix", diameter=Fraction(1), description="2^-j, j the first disagreement index")
CIRCLE_METRIC = MetricProfile(kind="circle", diameter=Fraction(1, 2), description="min(|a - b|, 1 - |a - b|)")
TORUS_METRIC = MetricProfile(kind="torus", diameter=Fraction(1, 2), description="max of coordinate circle metrics")
INTERVAL_METRIC = MetricProfile(kind="interval", diameter=Fraction(1), description="|a - b| on [0, 1)")


# ---------------------------------------------------------------------------
# Points
# ---------------------------------------------------------------------------


class EventuallyPeriodic(FrozenModel):
    kind: Literal["eventually_periodic"] = "eventually_periodic"
    preperiod: str = ""
    period: str

    @field_validator("period")
    @classmethod
    def _nonempty_period(cls, v: str) -> str:
        if not v:
            raise ValueError("period word must be nonempty")
        return v


class WordSource(FrozenModel):
    """A finite prefix given symbol by symbol"""

    kind: Literal["word"] = "word"
    symbols: str


class SparseOnesSource(FrozenModel):
    """A 0/1 prefix of the given length with ones exactly at ``ones``"""

    kind: Literal["sparse_ones"] = "sparse_ones"
    ones: Tuple[int, ...]
    length: int = Field(ge=0)

    @model_validator(mode="after")
    def _ones_in_range(self) -> "SparseOnesSource":
        if list(self.ones) != sorted(set(self.ones)):
            raise ValueError("ones must be sorted and distinct")
        if self.ones and (self.ones[0] < 0 or self.ones[-1] >= self.length):
            raise ValueError("ones must lie inside the prefix")
        return self


class NewpropSource(FrozenModel):
    """The constructed point x = W 0^{a_1} W 0^{a_2} W ..., symbols in closed form"""

    kind: Literal["newprop"] = "newprop"
    base: int = Field(ge=2)
    marker_length: Optional[int] = None
    length: int = Field(ge=1)


PrefixSource = Annotated[Union[WordSource, SparseOnesSource, NewpropSource], Field(discriminator="kind")]


class PrefixStream(FrozenModel):
    kind: Literal["prefix_stream"] = "prefix_stream"
    source: PrefixSource

    @property
    def available(self) -> int:
        if isinstance(self.source, WordSource):
            return len(self.source.symbols)
        return self.source.length


class TorusPoint(FrozenModel):
    kind: Literal["torus"] = "torus"
    coords: Tuple[Rational, ...]

    @field_validator("coords")
    @classmethod
    def _unit_interval(cls, v: Tuple[Fraction, ...]) -> Tuple[Fraction, ...]:
        if not v:
            raise ValueError("a torus point needs at least one coordinate")
        for c in v:
            if not 0 <= c < 1:
                raise ValueError(f"coordinate {c} outside [0, 1)")
        return v


class WedgePoint(FrozenModel):
    kind: Literal["wedge"] = "wedge"
    side: Literal["left", "right"]
    inner: "PointSpec"


class ProductPoint(FrozenModel):
    kind: Literal["product"] = "product"
    left: "PointSpec"
    right: "PointSpec"


PointSpec = Annotated[
    Union[EventuallyPeriodic, PrefixStream, TorusPoint, WedgePoint, ProductPoint],
    Field(discriminator="kind"),
]


# ---------------------------------------------------------------------------
# Cells
# ---------------------------------------------------------------------------


class WordCell(FrozenModel):
    """The cylinder C[w] of points whose initial block is w"""

    kind: Literal["word"] = "word"
    word: str

    @field_validator("word")
    @classmethod
    def _nonempty(cls, v: str) -> str:
        if not v:
            raise ValueError("cylinder word must be nonempty")
        return v


class BoxCell(FrozenModel):
    """Dyadic box prod_i [c_i 2^-r, (c_i + 1) 2^-r)"""

    kind: Literal["box"] = "box"
    resolution: int = Field(ge=1)
    corner: Tuple[int, ...]

    @model_validator(mode="after")
    def _inside(self) -> "BoxCell":
        if not self.corner:
            raise ValueError("box needs at least one coordinate")
        for c in self.corner:
            if not 0 <= c < 2**self.resolution:
                raise ValueError("box does not intersect the phase space")
        return self

    @property
    def side(self) -> Fraction:
        return Fraction(1, 2**self.resolution)

    def lower(self, axis: int) -> Fraction:
        return self.corner[axis] * self.side


class WedgeCell(FrozenModel):
    kind: Literal["wedge"] = "wedge"
    side: Literal["left", "right"]
    inner: "Cell"


class ProductCell(FrozenModel):
    kind: Literal["product"] = "product"
    left: "Cell"
    right: "Cell"


Cell = Annotated[Union[WordCell, BoxCell, WedgeCell, ProductCell], Field(discriminator="kind")]


# ---------------------------------------------------------------------------
# Systems
# ---------------------------------------------------------------------------


class _Symbolic(FrozenModel):
    @property
    def alphabet(self) -> str:
        return SYMBOLS[: self.alphabet_size]

    @property
    def metric_profile(self) -> MetricProfile:
        return PREFIX_METRIC


class FullShift(_Symbolic):
    kind: Literal["full_shift"] = "full_shift"
    alphabet_size: int = Field(ge=2, le=len(SYMBOLS))


class SFT(_Symbolic):
    """Subshift of finite type given by forbidden words"""

    kind: Literal["sft"] = "sft"
    alphabet_size: int = Field(ge=2, le=len(SYMBOLS))
    forbidden: Tuple[str, ...]

    @model_validator(mode="after")
    def _forbidden_words(self) -> "SFT":
        if not self.forbidden:
            raise ValueError("an SFT needs at least one forbidden word")
        alphabet = set(SYMBOLS[: self.alphabet_size])
        for word in self.forbidden:
            if not word:
                raise ValueError("forbidden words must be nonempty")
            if not set(word) <= alphabet:
                raise ValueError(f"forbidden word {word!r} leaves the alphabet")
        return self


class DiffSetSubshift(FrozenModel):
    """Lambda_P: 0/1 sequences whose 1-positions differ by elements of P"""

    kind: Literal["diff_set"] = "diff_set"
    p: PSpec
    max_horizon: int = Field(default=100_000, ge=1)

    @property
    def alphabet(self) -> str:
        return "01"

    @property
    def alphabet_size(self) -> int:
        return 2

    @property
    def metric_profile(self) -> MetricProfile:
        return PREFIX_METRIC


class Rotation(FrozenModel):
    kind: Literal["rotation"] = "rotation"
    alpha: Rational = Fraction(610, 987)

    @property
    def metric_profile(self) -> MetricProfile:
        return CIRCLE_METRIC

    @field_validator("alpha")
    @classmethod
    def _reduce(cls, v: Fraction) -> Fraction:
        return v % 1


class SkewProduct(FrozenModel):
    """(x, y) -> (x + alpha, x + y) on the 2-torus"""

    kind: Literal["skew_product"] = "skew_product"
    alpha: Rational = Fraction(610, 987)

    @property
    def metric_profile(self) -> MetricProfile:
        return TORUS_METRIC

    @field_validator("alpha")
    @classmethod
    def _reduce(cls, v: Fraction) -> Fraction:
        return v % 1


class Contraction(FrozenModel):
    """x -> factor * x on [0, 1); the unique fixed point 0 attracts every orbit"""

    kind: Literal["contraction"] = "contraction"
    factor: Rational = Fraction(1, 2)

    @property
    def metric_profile(self) -> MetricProfile:
        return INTERVAL_METRIC

    @field_validator("factor")
    @classmethod
    def _contracting(cls, v: Fraction) -> Fraction:
        if not 0 < v < 1:
            raise ValueError("contraction factor must lie in (0, 1)")
        return v


class Wedge(FrozenModel):
    """Two copies glued at a common fixed point; the map swaps sides each step"""

    kind: Literal["wedge"] = "wedge"
    left: "SystemSpec"
    left_fixed: PointSpec
    right: "SystemSpec"
    right_fixed: PointSpec

    @property
    def metric_profile(self) -> MetricProfile:
        # cross-side distances pass through the glue point
        return MetricProfile(kind="wedge", diameter=2 * self.left.metric_profile.diameter)


class Product(FrozenModel):
    kind: Literal["product"] = "product"
    left: "SystemSpec"
    right: "SystemSpec"

    @property
    def metric_profile(self) -> MetricProfile:
        return MetricProfile(
            kind="product",
            diameter=max(self.left.metric_profile.diameter, self.right.metric_profile.diameter),
        )


SystemSpec = Annotated[
    Union[FullShift, SFT, DiffSetSubshift, Rotation, SkewProduct, Contraction, Wedge, Product],
    Field(discriminator="kind"),
]

SUBSHIFT_KINDS = ("full_shift", "sft", "diff_set")
METRIC_KINDS = ("rotation", "skew_product", "contraction")

for _model in (WedgePoint, ProductPoint, WedgeCell, ProductCell, Wedge, Product):
    _model.model_rebuild()


__all__ = [
    "SYMBOLS",
    "Rational",
    "parse_rational",
    "format_rational",
    "MetricProfile",
    "PREFIX_METRIC",
    "CIRCLE_METRIC",
    "TORUS_METRIC",
    "INTERVAL_METRIC",
    "EventuallyPeriodic",
    "WordSource",
    "SparseOnesSource",
    "NewpropSource",
    "PrefixStream",
    "TorusPoint",
    "WedgePoint",
    "ProductPoint",
    "PointSpec",
    "WordCell",
    "BoxCell",
    "WedgeCell",
    "ProductCell",
    "Cell",
    "FullShift",
    "SFT",
    "DiffSetSubshift",
    "Rotation",
    "SkewProduct",
    "Contraction",
    "Wedge",
    "Product",
    "SystemSpec",
    "SUBSHIFT_KINDS",
    "METRIC_KINDS",
]
