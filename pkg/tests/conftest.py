"""
Test configuration and fixtures for hitlab
"""

import random
from fractions import Fraction
from typing import Callable, List

import pytest

from hitlab.config.settings import Settings, use_settings
from hitlab.schemas.construction import SquaresP
from hitlab.schemas.system import (
    SFT,
    Contraction,
    DiffSetSubshift,
    EventuallyPeriodic,
    FullShift,
    Rotation,
    SkewProduct,
    TorusPoint,
    Wedge,
)

GOLDEN = Fraction(610, 987)

# Property suites draw from one fixed seed so every run sees the same cases
PROPERTY_SEED = 20140709


@pytest.fixture
def rng() -> random.Random:
    """Deterministic case generator"""
    return random.Random(PROPERTY_SEED)


@pytest.fixture
def full_shift() -> FullShift:
    return FullShift(alphabet_size=2)


@pytest.fixture
def full_3_shift() -> FullShift:
    return FullShift(alphabet_size=3)


@pytest.fixture
def golden_rotation() -> Rotation:
    return Rotation(alpha=GOLDEN)


@pytest.fixture
def skew_product() -> SkewProduct:
    return SkewProduct(alpha=GOLDEN)


@pytest.fixture
def contraction() -> Contraction:
    return Contraction(factor=Fraction(1, 2))


@pytest.fixture
def lambda_squares() -> DiffSetSubshift:
    return DiffSetSubshift(p=SquaresP())


@pytest.fixture
def split_sft() -> SFT:
    return SFT(alphabet_size=2, forbidden=("01", "10"))


@pytest.fixture
def wedge_fullshift() -> Wedge:
    zero = EventuallyPeriodic(period="0")
    return Wedge(left=FullShift(alphabet_size=2), left_fixed=zero, right=FullShift(alphabet_size=2), right_fixed=zero)


@pytest.fixture
def zero_point() -> EventuallyPeriodic:
    return EventuallyPeriodic(period="0")


@pytest.fixture
def random_word(rng) -> Callable[[int, str], str]:
    def make(length: int, alphabet: str = "01") -> str:
        return "".join(rng.choice(alphabet) for _ in range(length))

    return make


@pytest.fixture
def random_periodic(rng, random_word) -> Callable[..., EventuallyPeriodic]:
    """Eventually periodic points over the alphabet, short preperiods and periods"""

    def make(alphabet: str = "01", max_pre: int = 6, max_period: int = 4) -> EventuallyPeriodic:
        return EventuallyPeriodic(
            preperiod=random_word(rng.randint(0, max_pre), alphabet),
            period=random_word(rng.randint(1, max_period), alphabet),
        )

    return make


@pytest.fixture
def random_torus_point(rng) -> Callable[[int], TorusPoint]:
    def make(dimension: int = 1, denominator: int = 64) -> TorusPoint:
        return TorusPoint(coords=tuple(Fraction(rng.randrange(denominator), denominator) for _ in range(dimension)))

    return make


@pytest.fixture
def capped_settings() -> Callable[..., object]:
    """Run a block under settings overrides: ``with capped_settings(max_cells=8): ...``"""

    def make(**overrides):
        return use_settings(Settings().with_overrides(overrides))

    return make


def all_words(length: int, alphabet: str = "01") -> List[str]:
    if length == 0:
        return [""]
    return [w + a for w in all_words(length - 1, alphabet) for a in alphabet]
