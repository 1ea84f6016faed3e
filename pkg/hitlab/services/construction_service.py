"""
Construction Service Module

Difference sets P, the subshifts Lambda_P built from them, the constructed newprop
point with its big-integer visit arithmetic, and the registry of standard fixtures.

Newprop bookkeeping, for marker W = 1 0^{w-2} 1 of length w:

    b_0 = w - 1
    a_n = B^(b_{n-1} + w)            gap before the (n+1)-th copy of W
    b_n = b_{n-1} + a_n + w          last position of the (n+1)-th copy
    V(n) = a_n + b_{n-1} + 1         start of the (n+1)-th copy
    I(m) = [B^m + w - 1, B^m + m - w]

The gaps grow as a tower, so from n = 3 on (base 10) nothing past b_1 can be
written out. Quantities are therefore kept as linear forms over the gap atoms a_k
and compared by dominance: a_k = B^(b_{k-1} + w) exceeds any fixed multiple of
b_{k-1}, which bounds every lower atom.
"""

from fractions import Fraction
from functools import lru_cache
from math import isqrt, log10
from typing import Callable, Dict, FrozenSet, List, Optional, Tuple

from ..config.settings import get_settings
from ..schemas.construction import (
    AllP,
    ExplicitP,
    NewpropBundle,
    NewpropTrace,
    NewpropTraceEntry,
    PowerBlocksP,
    PSpec,
    ResiduesP,
    SquaresP,
)
from ..schemas.diagnostics import DiagnosticVerdict
from ..schemas.experiment import Fixture
from ..schemas.system import (
    SFT,
    Contraction,
    DiffSetSubshift,
    EventuallyPeriodic,
    FullShift,
    NewpropSource,
    PrefixStream,
    Rotation,
    SkewProduct,
    SparseOnesSource,
    TorusPoint,
    Wedge,
    WedgePoint,
)
from ..schemas.window import Verdict, WindowSet
from ..utils.exceptions import BudgetExceeded, ConfigurationError, InadmissibleCell, PrefixLimit, UnknownFixture
from ..utils.logger import logger

# ---------------------------------------------------------------------------
# Difference sets
# ---------------------------------------------------------------------------


@lru_cache(maxsize=32)
def _explicit_members(p: ExplicitP) -> FrozenSet[int]:
    return frozenset(p.members)


def _power_block(base: int, n: int) -> bool:
    if n <= base:
        return False
    k, power = 0, 1
    while power * base <= n - 1:
        power *= base
        k += 1
    return k >= 1 and 1 <= n - power <= k


def p_contains(p: PSpec, n: int) -> bool:
    """Membership of n in P; P holds positive integers only"""
    if n <= 0:
        return False
    if isinstance(p, AllP):
        return True
    if isinstance(p, ResiduesP):
        return n % p.modulus in p.residues
    if isinstance(p, SquaresP):
        m = isqrt(n - 1)
        return m >= 1 and n - m * m <= m
    if isinstance(p, PowerBlocksP):
        return _power_block(p.base, n)
    if isinstance(p, ExplicitP):
        return n in _explicit_members(p)
    raise ConfigurationError(f"Unsupported difference set {p!r}")


def p_description(p: PSpec) -> str:
    if isinstance(p, AllP):
        return "all positive integers"
    if isinstance(p, ResiduesP):
        return f"n mod {p.modulus} in {set(p.residues)}"
    if isinstance(p, SquaresP):
        return "union of [m^2 + 1, m^2 + m] over m >= 1"
    if isinstance(p, PowerBlocksP):
        return f"{{{p.base}^n + s : n >= 1, 1 <= s <= n}}"
    return f"explicit set of {len(p.members)} integers"


# ---------------------------------------------------------------------------
# Linear forms over gap atoms
# ---------------------------------------------------------------------------


class GapForm:
    """const + sum_k coeffs[k] * a_k"""

    __slots__ = ("const", "coeffs")

    def __init__(self, const: int = 0, coeffs: Optional[Dict[int, int]] = None):
        self.const = const
        self.coeffs = {k: c for k, c in (coeffs or {}).items() if c}

    def __add__(self, other) -> "GapForm":
        if isinstance(other, int):
            return GapForm(self.const + other, self.coeffs)
        coeffs = dict(self.coeffs)
        for k, c in other.coeffs.items():
            coeffs[k] = coeffs.get(k, 0) + c
        return GapForm(self.const + other.const, coeffs)

    def __neg__(self) -> "GapForm":
        return GapForm(-self.const, {k: -c for k, c in self.coeffs.items()})

    def __sub__(self, other) -> "GapForm":
        return self + (-other)

    @property
    def leading(self) -> int:
        return max(self.coeffs, default=0)

    def __str__(self) -> str:
        terms = []
        for k in sorted(self.coeffs, reverse=True):
            c = self.coeffs[k]
            terms.append(f"a_{k}" if c == 1 else f"{c}*a_{k}")
        if self.const or not terms:
            terms.append(str(self.const))
        return " + ".join(terms).replace("+ -", "- ")


# ---------------------------------------------------------------------------
# Service
# ---------------------------------------------------------------------------


class ConstructionService:
    """
    Explicit systems and points.

    Provides:
    - Lambda_P subshifts from difference-set specs
    - the newprop bundle: closed-form gaps, boundaries, visit times and intervals
    - arithmetic verification that no visit time falls in an interval I(m)
    - prefix materialization of the constructed point with an admissibility scan
    - the fixture registry used by the CLI
    """

    # -- difference sets ---------------------------------------------------

    @staticmethod
    def lambda_p(p: PSpec, max_horizon: int = 100_000) -> DiffSetSubshift:
        return DiffSetSubshift(p=p, max_horizon=max_horizon)

    @staticmethod
    def p_window(p: PSpec, horizon: int) -> WindowSet:
        """P within [1, H], ready for the family statistics"""
        return WindowSet.of(horizon, (n for n in range(1, horizon + 1) if p_contains(p, n)))

    # -- newprop bundle ----------------------------------------------------

    @staticmethod
    def default_marker_length(base: int) -> int:
        p = PowerBlocksP(base=base)
        if p_contains(p, 11):
            return 12
        w = 3
        while not p_contains(p, w - 1):
            w += 1
        return w

    @staticmethod
    def newprop_bundle(base: int, marker_length: Optional[int] = None) -> NewpropBundle:
        w = marker_length or ConstructionService.default_marker_length(base)
        if not p_contains(PowerBlocksP(base=base), w - 1):
            raise InadmissibleCell(
                f"Marker of length {w} is not admissible for base {base}",
                {"base": base, "marker_length": w},
            )
        return NewpropBundle(base=base, marker_length=w)

    @staticmethod
    def boundary_form(bundle: NewpropBundle, n: int) -> GapForm:
        """b_n as a linear form"""
        w = bundle.marker_length
        return GapForm(bundle.b0 + n * w, {k: 1 for k in range(1, n + 1)})

    @staticmethod
    def _fits(bundle: NewpropBundle, exponent: int) -> bool:
        return exponent * log10(bundle.base) <= get_settings().newprop_digit_budget

    @staticmethod
    def gap(bundle: NewpropBundle, n: int) -> int:
        """a_n exactly; BudgetExceeded when it has too many digits"""
        return _exact_gap(bundle.base, bundle.marker_length, n, get_settings().newprop_digit_budget)

    @staticmethod
    def boundary(bundle: NewpropBundle, n: int) -> int:
        return ConstructionService.evaluate_form(bundle, ConstructionService.boundary_form(bundle, n))

    @staticmethod
    def visit_time(bundle: NewpropBundle, n: int, visit_shift: int = 0) -> int:
        """V(n) exactly, for n >= 1"""
        return ConstructionService.gap(bundle, n) + ConstructionService.boundary(bundle, n - 1) + 1 + visit_shift

    @staticmethod
    def interval(bundle: NewpropBundle, m: int) -> Tuple[int, int]:
        if not ConstructionService._fits(bundle, m):
            raise BudgetExceeded(f"B^{m} exceeds the digit budget", {"m": m})
        w = bundle.marker_length
        power = bundle.base**m
        return power + w - 1, power + m - w

    @staticmethod
    def evaluate_form(bundle: NewpropBundle, form: GapForm) -> int:
        return form.const + sum(c * ConstructionService.gap(bundle, k) for k, c in form.coeffs.items())

    @staticmethod
    def _try_exact(bundle: NewpropBundle, form: GapForm) -> Optional[int]:
        try:
            return ConstructionService.evaluate_form(bundle, form)
        except BudgetExceeded:
            return None

    @staticmethod
    def _exponent_lower_bound(bundle: NewpropBundle, k: int) -> int:
        """A certified lower bound for the exponent b_{k-1} + w of a_k"""
        w = bundle.marker_length
        best = 2 * w - 1
        for j in range(1, k):
            exact = ConstructionService._try_exact(bundle, ConstructionService.boundary_form(bundle, j))
            if exact is None:
                break
            best = exact + w
        return best

    @staticmethod
    def _power_beats(exponent_lower: int, slope: int, offset: int) -> bool:
        """2^t > slope * t + offset for every t >= exponent_lower"""
        t = max(1, slope.bit_length() + 1)
        while 2**t <= slope * t + offset:
            t += 1
        return exponent_lower >= t

    @staticmethod
    def sign(bundle: NewpropBundle, form: GapForm) -> Tuple[int, str]:
        """Sign of a form and how it was certified ("exact" or "dominance")"""
        exact = ConstructionService._try_exact(bundle, form)
        if exact is not None:
            return (exact > 0) - (exact < 0), "exact"
        k = form.leading
        lower_weight = sum(abs(c) for j, c in form.coeffs.items() if j < k)
        # every lower atom is at most b_{k-1} < exponent of a_k
        if ConstructionService._power_beats(
            ConstructionService._exponent_lower_bound(bundle, k), lower_weight, abs(form.const)
        ):
            return (1 if form.coeffs[k] > 0 else -1), "dominance"
        raise BudgetExceeded("Cannot certify the sign of a gap form", {"form": str(form)})

    @staticmethod
    def verify_newprop(base: int, n_max: int, visit_shift: int = 0) -> DiagnosticVerdict:
        """Check that V(n) + visit_shift lies in no I(m) for 1 <= n <= n_max

        The candidate m is read off the bracket B^m <= V < B^(m+1); intervals with
        other m sit inside their own brackets and cannot contain V.
        """
        bundle = ConstructionService.newprop_bundle(base)
        w = bundle.marker_length
        if visit_shift < -(bundle.b0 + 1):
            raise ConfigurationError(
                "visit_shift must be at least -(b_0 + 1)",
                invalid_vars={"visit_shift": f"must be >= {-(bundle.b0 + 1)}"},
            )
        log = logger.bind(operation="verify_newprop", base=base)
        entries: List[NewpropTraceEntry] = []
        first_failure: Optional[int] = None
        for n in range(1, n_max + 1):
            previous = ConstructionService.boundary_form(bundle, n - 1)
            exponent = previous + w
            offset = previous + (1 + visit_shift)
            # bracket: 0 <= offset < (B - 1) B^exponent
            if not ConstructionService._power_beats(
                ConstructionService._exponent_lower_bound(bundle, n), 1, 1 + abs(visit_shift)
            ):
                exact_exponent = ConstructionService._try_exact(bundle, exponent)
                exact_offset = ConstructionService._try_exact(bundle, offset)
                if exact_exponent is None or exact_offset is None or exact_offset >= (base - 1) * base**exact_exponent:
                    raise BudgetExceeded("Cannot certify the bracket of V(n)", {"n": n})
            low_sign, certificate = ConstructionService.sign(bundle, offset - (w - 1))
            # upper end: offset <= exponent - w reduces to visit_shift <= -1
            inside = low_sign >= 0 and visit_shift <= -1

            exact_exponent = ConstructionService._try_exact(bundle, exponent)
            exact_offset = ConstructionService._try_exact(bundle, offset)
            m_text = str(exact_exponent) if exact_exponent is not None else str(exponent)
            c_text = str(exact_offset) if exact_offset is not None else str(offset)
            if exact_exponent is not None and ConstructionService._fits(bundle, exact_exponent):
                visit = str(base**exact_exponent + exact_offset)
                low, high = ConstructionService.interval(bundle, exact_exponent)
                low_text, high_text = str(low), str(high)
            else:
                visit = f"{base}^({m_text}) + {c_text}"
                low_text = f"{base}^({m_text}) + {w - 1}"
                high_text = f"{base}^({m_text}) + {m_text} - {w}"
            entries.append(
                NewpropTraceEntry(
                    n=n,
                    visit=visit,
                    candidate_m=m_text,
                    interval_low=low_text,
                    interval_high=high_text,
                    inside=inside,
                    certificate=certificate,
                )
            )
            if inside and first_failure is None:
                first_failure = n
                log.info(f"V({n}) lands in I({m_text})")

        trace = NewpropTrace(
            base=base,
            marker_length=w,
            n_max=n_max,
            visit_shift=visit_shift,
            atoms=[f"a_{k} = {base}^(b_{k - 1} + {w})" for k in range(1, n_max + 1)],
            entries=entries,
            first_failure=first_failure,
        )
        verdict = Verdict.FAILS if first_failure is not None else Verdict.HOLDS
        log.info(f"newprop verification up to n={n_max}: {verdict.value}")
        return DiagnosticVerdict(
            property="newprop_visits_avoid_intervals",
            verdict=verdict,
            witness=trace,
            params={"base": base, "n_max": n_max, "visit_shift": visit_shift, "marker_length": w},
        )

    # -- prefixes ----------------------------------------------------------

    @staticmethod
    def newprop_ones(bundle: NewpropBundle, limit: int) -> List[int]:
        """1-positions of the constructed point below ``limit``"""
        w = bundle.marker_length
        ones = [p for p in (0, w - 1) if p < limit]
        n = 1
        while True:
            exponent = ConstructionService._try_exact(bundle, ConstructionService.boundary_form(bundle, n - 1) + w)
            if exponent is None or exponent >= limit.bit_length():
                break
            start = ConstructionService.visit_time(bundle, n)
            if start >= limit:
                break
            ones.extend(p for p in (start, start + w - 1) if p < limit)
            n += 1
        return ones

    @staticmethod
    def feasible_length(bundle: NewpropBundle) -> int:
        """min(prefix_limit, b_1 + 1)"""
        limit = get_settings().prefix_limit
        b1 = ConstructionService._try_exact(bundle, ConstructionService.boundary_form(bundle, 1))
        return limit if b1 is None else min(limit, b1 + 1)

    @staticmethod
    def newprop_point(base: int, length: Optional[int] = None) -> PrefixStream:
        bundle = ConstructionService.newprop_bundle(base)
        length = length or ConstructionService.feasible_length(bundle)
        return PrefixStream(source=NewpropSource(base=base, marker_length=bundle.marker_length, length=length))

    @staticmethod
    def materialize_prefix(bundle: NewpropBundle, length: int) -> PrefixStream:
        """Sparse prefix of the constructed point, re-verified by a pair scan"""
        limit = get_settings().prefix_limit
        if length > limit:
            raise PrefixLimit(f"Prefix of length {length} exceeds the limit {limit}", {"length": length, "limit": limit})
        ones = ConstructionService.newprop_ones(bundle, length)
        p = PowerBlocksP(base=bundle.base)
        for j in range(1, len(ones)):
            for i in range(j):
                if not p_contains(p, ones[j] - ones[i]):
                    raise InadmissibleCell(
                        "Materialized prefix is not admissible",
                        {"positions": [ones[i], ones[j]]},
                    )
        logger.debug(f"Materialized {length} symbols with {len(ones)} ones")
        return PrefixStream(source=SparseOnesSource(ones=tuple(ones), length=length))

    # -- fixtures ----------------------------------------------------------

    @staticmethod
    def list_fixtures() -> List[Tuple[str, str]]:
        return [(name, description) for name, (description, _) in _FIXTURES.items()]

    @staticmethod
    def standard_fixture(name: str) -> Fixture:
        if name not in _FIXTURES:
            raise UnknownFixture(f"Unknown fixture '{name}'", {"known": sorted(_FIXTURES)})
        description, build = _FIXTURES[name]
        return build(name, description)


@lru_cache(maxsize=256)
def _exact_gap(base: int, w: int, n: int, budget: int) -> int:
    if n < 1:
        raise ValueError("gap index starts at 1")
    previous = w - 1
    for k in range(1, n):
        previous += _exact_gap(base, w, k, budget) + w
    exponent = previous + w
    if exponent * log10(base) > budget:
        raise BudgetExceeded(f"a_{n} = {base}^{exponent} exceeds the digit budget", {"n": n, "budget": budget})
    return base**exponent


# ---------------------------------------------------------------------------
# Fixture registry
# ---------------------------------------------------------------------------

_ZERO = EventuallyPeriodic(period="0")


def _simple(system, point=None) -> Callable[[str, str], Fixture]:
    return lambda name, description: Fixture(name=name, description=description, system=system, point=point)


def _newprop(base: int) -> Callable[[str, str], Fixture]:
    def build(name: str, description: str) -> Fixture:
        return Fixture(
            name=name,
            description=description,
            system=ConstructionService.lambda_p(PowerBlocksP(base=base)),
            point=ConstructionService.newprop_point(base),
        )

    return build


_FIXTURES: Dict[str, Tuple[str, Callable[[str, str], Fixture]]] = {
    "full-2-shift": ("full shift on two symbols", _simple(FullShift(alphabet_size=2), _ZERO)),
    "full-3-shift": ("full shift on three symbols", _simple(FullShift(alphabet_size=3), _ZERO)),
    "golden-rotation": (
        "circle rotation by 610/987",
        _simple(Rotation(alpha=Fraction(610, 987)), TorusPoint(coords=(Fraction(0),))),
    ),
    "skew-product": (
        "(x, y) -> (x + 610/987, x + y) on the 2-torus",
        _simple(SkewProduct(alpha=Fraction(610, 987)), TorusPoint(coords=(Fraction(0), Fraction(0)))),
    ),
    "lambda-squares": (
        "Lambda_P with P the union of [m^2 + 1, m^2 + m]",
        _simple(DiffSetSubshift(p=SquaresP()), _ZERO),
    ),
    "newprop-10": ("Lambda_P for P = {10^n + s}, with the constructed point", _newprop(10)),
    "newprop-2": ("Lambda_P for P = {2^n + s}, with the constructed point", _newprop(2)),
    "wedge-fullshift": (
        "two full 2-shifts glued at 0^inf, swapping sides each step",
        _simple(
            Wedge(left=FullShift(alphabet_size=2), left_fixed=_ZERO, right=FullShift(alphabet_size=2), right_fixed=_ZERO),
            WedgePoint(side="left", inner=EventuallyPeriodic(period="01")),
        ),
    ),
    "proximal-contraction": (
        "x -> x/2 on [0, 1); every pair is proximal",
        _simple(Contraction(factor=Fraction(1, 2)), TorusPoint(coords=(Fraction(1, 2),))),
    ),
    "split-sft": (
        "SFT over {0, 1} forbidding 01 and 10; two fixed points",
        _simple(SFT(alphabet_size=2, forbidden=("01", "10")), _ZERO),
    ),
}


__all__ = ["ConstructionService", "GapForm", "p_contains", "p_description"]
