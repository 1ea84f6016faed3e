"""
Hitting Service Module

Hitting sets N(U, V), visit sets N(x, G), sensitivity sets S(U, delta) and outer
approximations of the omega-limit sets omega_T(x) and omega_{N_T}(x).

Subshift answers are exact. For metric systems ``certain`` collects the times at
which the exact image of U overlaps V in positive measure and ``possible`` the
times at which the closures meet.
"""

from fractions import Fraction
from functools import lru_cache
from typing import List, Optional, Sequence, Set, Tuple

from ..config.settings import get_settings
from ..schemas.diagnostics import DiagnosticVerdict
from ..schemas.system import (
    BoxCell,
    Cell,
    Contraction,
    EventuallyPeriodic,
    NewpropSource,
    PointSpec,
    Product,
    PrefixStream,
    Rotation,
    SkewProduct,
    SystemSpec,
    Wedge,
    WordCell,
)
from ..schemas.window import CellSetApprox, TaggedWindowSet, Verdict, WindowSet
from ..utils.exceptions import BadDelta, BudgetExceeded, InvalidSystemError, NotASubshift
from ..utils.intervals import arc_contains, arc_pieces, arcs_meet, segments_meet
from ..utils.logger import logger
from .construction_service import ConstructionService
from .system_service import SystemService

Pair = Tuple[Cell, Cell]


class HittingService:
    """
    Hitting-time computations.

    Provides:
    - hitting_set / sensitivity_set as certain/possible pairs
    - visit_set, with a closed form for the constructed newprop point
    - omega_limit_approx and omega_NT_approx on a dyadic horizon schedule
    - transitive-compactness and positive-invariance evidence
    """

    # -- hitting sets ------------------------------------------------------

    @staticmethod
    def hitting_set(system: SystemSpec, u: Cell, v: Cell, horizon: int) -> TaggedWindowSet:
        """N(U, V) within [0, H]"""
        SystemService.validate_cell(system, u)
        SystemService.validate_cell(system, v)
        if horizon > get_settings().max_horizon:
            raise BudgetExceeded("Horizon exceeds max_horizon", {"horizon": horizon})
        certain, possible = _hitting(system, u, v, horizon)
        return TaggedWindowSet(
            certain=WindowSet.of(horizon, certain),
            possible=WindowSet.of(horizon, possible),
            params={"horizon": horizon},
        )

    @staticmethod
    def subshift_hits(system: SystemSpec, u: str, v: str, horizon: int) -> List[int]:
        """Times n <= H with C[u] meeting the preimage of C[v] under the n-th shift"""
        lang = SystemService.language(system)
        out = []
        for n in range(min(len(u), horizon + 1)):
            overlap = len(u) - n
            if u[n:] == v[:overlap] or (len(v) < overlap and u[n : n + len(v)] == v):
                if lang.admissible(u + v[overlap:]):
                    out.append(n)
        if horizon >= len(u):
            joins = lang.join_gaps(u, v, horizon - len(u))
            out.extend(len(u) + g for g, ok in enumerate(joins) if ok)
        return out

    @staticmethod
    def reach_times(system: SystemSpec, cell: Cell, point: PointSpec, horizon: int) -> List[int]:
        """Times n <= H with the point in T^n(cell)"""
        if SystemService.is_subshift(system):
            if not (isinstance(point, EventuallyPeriodic) and not point.preperiod and len(point.period) == 1):
                raise InvalidSystemError("Image membership is decided for constant sequences only")
            lang = SystemService.language(system)
            k = max(len(cell.word), getattr(lang, "memory", 0), 1)
            return HittingService.subshift_hits(system, cell.word, point.period * k, horizon)
        return [n for n in range(horizon + 1) if HittingService.image_contains(system, cell, n, point)]

    @staticmethod
    def image_contains(system: SystemSpec, cell: Cell, n: int, point: PointSpec) -> bool:
        """Whether the point lies in T^n(cell), exactly"""
        if SystemService.is_subshift(system):
            return n in HittingService.reach_times(system, cell, point, n)
        coords = SystemService._coords(system, point)
        h = cell.side
        if isinstance(system, Rotation):
            return arc_contains(cell.lower(0) + n * system.alpha, h, coords[0])
        if isinstance(system, Contraction):
            scale = system.factor**n
            return scale * cell.lower(0) <= coords[0] < scale * (cell.lower(0) + h)
        if isinstance(system, SkewProduct):
            a, b = cell.lower(0), cell.lower(1)
            x = a + (coords[0] - n * system.alpha - a) % 1
            if x >= a + h:
                return False
            shear = Fraction(n * (n - 1), 2) * system.alpha
            return arc_contains(b + n * x + shear, h, coords[1])
        raise InvalidSystemError(f"Unsupported system {system.kind}")

    # -- visits ------------------------------------------------------------

    @staticmethod
    def visit_set(system: SystemSpec, x: PointSpec, g: Cell, horizon: int) -> WindowSet:
        """N(x, G) within [0, H]"""
        SystemService.validate_cell(system, g)
        fast = HittingService._newprop_visits(system, x, g, horizon)
        if fast is not None:
            return fast
        return WindowSet.of(horizon, HittingService._visits(system, x, g, horizon))

    @staticmethod
    def _newprop_visits(system: SystemSpec, x: PointSpec, g: Cell, horizon: int) -> Optional[WindowSet]:
        if not SystemService.is_subshift(system):
            return None
        if not (isinstance(x, PrefixStream) and isinstance(x.source, NewpropSource) and isinstance(g, WordCell)):
            return None
        bundle = ConstructionService.newprop_bundle(x.source.base, x.source.marker_length)
        if g.word != bundle.marker:
            return None
        ones = ConstructionService.newprop_ones(bundle, horizon + bundle.marker_length)
        # ones come in marker pairs (start, start + |W| - 1)
        return WindowSet.of(horizon, (p for p in ones[::2] if p <= horizon))

    @staticmethod
    def _visits(system: SystemSpec, x: PointSpec, g: Cell, horizon: int) -> List[int]:
        if SystemService.is_subshift(system):
            word = g.word
            text = SystemService.window(x, 0, horizon + len(word))
            out, i = [], text.find(word)
            while 0 <= i <= horizon:
                out.append(i)
                i = text.find(word, i + 1)
            return out
        if isinstance(system, Product):
            left = set(HittingService._visits(system.left, x.left, g.left, horizon))
            return [n for n in HittingService._visits(system.right, x.right, g.right, horizon) if n in left]
        out = []
        point = x
        for n in range(horizon + 1):
            if SystemService.contains(system, g, point):
                out.append(n)
            point = SystemService.evaluate(system, point, 1)
        return out

    # -- sensitivity -------------------------------------------------------

    @staticmethod
    def sensitivity_set(system: SystemSpec, u: Cell, delta, horizon: int) -> TaggedWindowSet:
        """S(U, delta): times at which two points of U are more than delta apart"""
        delta = Fraction(delta)
        diameter = system.metric_profile.diameter
        if not 0 < delta < diameter:
            raise BadDelta(f"delta must lie in (0, {diameter})", {"delta": float(delta)})
        SystemService.validate_cell(system, u)
        profile = SystemService.diameter_profile(system, u, horizon)
        return TaggedWindowSet(
            certain=WindowSet.of(horizon, (n for n, (low, _) in enumerate(profile) if low > delta)),
            possible=WindowSet.of(horizon, (n for n, (_, high) in enumerate(profile) if high > delta)),
            params={"horizon": horizon, "delta": float(delta)},
        )

    # -- omega approximations ----------------------------------------------

    @staticmethod
    def schedule(horizon: int) -> List[int]:
        """Dyadic horizons m * 2^j <= H, or [H] when H < m"""
        start = get_settings().omega_min_horizon
        if horizon < start:
            return [horizon]
        out = []
        h = start
        while h <= horizon:
            out.append(h)
            h *= 2
        return out

    @staticmethod
    def _recurrent_windows(visits: WindowSet, schedule: Sequence[int]) -> Optional[List[List[int]]]:
        settings = get_settings()
        windows = []
        for h in schedule:
            lo = settings.burn_in(h)
            window = [n for n in visits.members if lo <= n <= h]
            if not window:
                return None
            windows.append(window)
        return windows

    @staticmethod
    def omega_limit_approx(system: SystemSpec, x: PointSpec, depth: int, horizon: int) -> CellSetApprox:
        """Cells visited after burn-in at every scheduled horizon"""
        schedule = HittingService.schedule(horizon)
        cells = [
            g
            for g in SystemService.cell_family(system, depth)
            if HittingService._recurrent_windows(HittingService.visit_set(system, x, g, horizon), schedule) is not None
        ]
        logger.debug(f"omega_T approx at depth {depth}, H={horizon}: {len(cells)} cells")
        return CellSetApprox(
            cells=cells,
            depth=depth,
            horizon=horizon,
            schedule=schedule,
            params={"burn_in_fraction": get_settings().burn_in_fraction},
        )

    @staticmethod
    def default_pairs(system: SystemSpec, depth: int, pair_budget: int) -> List[Pair]:
        cells = SystemService.cell_family(system, depth)
        pairs: List[Pair] = []
        for u in cells:
            for v in cells:
                if len(pairs) >= pair_budget:
                    return pairs
                pairs.append((u, v))
        return pairs

    @staticmethod
    def omega_NT_approx(
        system: SystemSpec,
        x: PointSpec,
        depth: int,
        horizon: int,
        pair_budget: int = 256,
        cells: Optional[Sequence[Cell]] = None,
        pairs: Optional[Sequence[Pair]] = None,
    ) -> CellSetApprox:
        """Cells G whose recurrent visit times meet every tested hitting set

        Pairs default to the first ``pair_budget`` ordered pairs of depth-cells.
        """
        if pair_budget > get_settings().max_pairs:
            raise BudgetExceeded("pair_budget exceeds max_pairs", {"pair_budget": pair_budget})
        schedule = HittingService.schedule(horizon)
        candidates = list(cells) if cells is not None else SystemService.cell_family(system, depth)
        tested = list(pairs)[:pair_budget] if pairs is not None else HittingService.default_pairs(system, depth, pair_budget)
        hits: List[Set[int]] = [set(HittingService.hitting_set(system, u, v, horizon).certain.members) for u, v in tested]

        kept = []
        for g in candidates:
            windows = HittingService._recurrent_windows(HittingService.visit_set(system, x, g, horizon), schedule)
            if windows is None:
                continue
            if all(any(n in hit for n in window) for window in windows for hit in hits):
                kept.append(g)
        logger.debug(f"omega_NT approx at depth {depth}, H={horizon}, {len(tested)} pairs: {len(kept)} cells")
        return CellSetApprox(
            cells=kept,
            depth=depth,
            horizon=horizon,
            pair_budget=pair_budget,
            pairs_tested=len(tested),
            schedule=schedule,
            params={"burn_in_fraction": get_settings().burn_in_fraction},
        )

    @staticmethod
    def transitive_compact_evidence(
        system: SystemSpec, sample: Sequence[PointSpec], depth: int, horizon: int, pair_budget: int = 256
    ) -> DiagnosticVerdict:
        """Nonempty omega_NT approximations for every sample point

        An empty approximation refutes only nonemptiness at these parameters.
        """
        sizes: List[int] = []
        first_empty = None
        for i, x in enumerate(sample):
            approx = HittingService.omega_NT_approx(system, x, depth, horizon, pair_budget)
            sizes.append(len(approx.cells))
            if not approx.cells and first_empty is None:
                first_empty = i
        verdict = Verdict.HOLDS if first_empty is None else Verdict.FAILS
        note = "consistent-with-transitive-compact" if first_empty is None else "refuted-at-parameters (outer approximation evidence)"
        logger.info(f"transitive compact evidence: {note}")
        return DiagnosticVerdict(
            property="transitive_compact",
            verdict=verdict,
            witness={"approximation_sizes": sizes, "first_empty": None if first_empty is None else sample[first_empty]},
            params={"depth": depth, "horizon": horizon, "pair_budget": pair_budget, "sample_size": len(sample)},
            notes=[note],
        )

    @staticmethod
    def invariance_evidence(
        system: SystemSpec, x: PointSpec, depth: int, horizon: int, pair_budget: int = 256
    ) -> DiagnosticVerdict:
        """Shifted words of the depth-D approximation fall in the depth-(D-1) one at H - 1"""
        if not SystemService.is_subshift(system):
            raise NotASubshift("Invariance evidence is computed on subshifts", {"kind": system.kind})
        if depth < 2:
            raise InvalidSystemError("Invariance evidence needs depth >= 2", {"depth": depth})
        upper = HittingService.omega_NT_approx(system, x, depth, horizon, pair_budget)
        lower = HittingService.omega_NT_approx(system, x, depth - 1, horizon - 1, pair_budget)
        known = {c.word for c in lower.cells}
        missing = sorted({c.word[1:] for c in upper.cells} - known)
        verdict = Verdict.HOLDS if not missing else Verdict.INCONCLUSIVE
        return DiagnosticVerdict(
            property="omega_NT_positive_invariance",
            verdict=verdict,
            witness={"missing": missing},
            params={"depth": depth, "horizon": horizon, "pair_budget": pair_budget},
            notes=["one-sided evidence; a miss does not refute invariance"],
        )


@lru_cache(maxsize=4096)
def _hitting(system: SystemSpec, u: Cell, v: Cell, horizon: int) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    if SystemService.is_subshift(system):
        exact = tuple(HittingService.subshift_hits(system, u.word, v.word, horizon))
        return exact, exact
    if isinstance(system, Wedge):
        inner_certain, inner_possible = _hitting(system.left, u.inner, v.inner, horizon)
        parity = 0 if u.side == v.side else 1
        glue = system.left_fixed
        reach: Tuple[int, ...] = ()
        if SystemService.contains(system.left, v.inner, glue):
            reach = tuple(HittingService.reach_times(system.left, u.inner, glue, horizon))
        certain = sorted({n for n in inner_certain if n % 2 == parity} | set(reach))
        possible = sorted({n for n in inner_possible if n % 2 == parity} | set(reach))
        return tuple(certain), tuple(possible)
    if isinstance(system, Product):
        lc, lp = _hitting(system.left, u.left, v.left, horizon)
        rc, rp = _hitting(system.right, u.right, v.right, horizon)
        return tuple(sorted(set(lc) & set(rc))), tuple(sorted(set(lp) & set(rp)))
    certain, possible = [], []
    for n in range(horizon + 1):
        hit_open, hit_closed = _metric_hit(system, u, v, n)
        if hit_open:
            certain.append(n)
        if hit_closed:
            possible.append(n)
    return tuple(certain), tuple(possible)


def _metric_hit(system: SystemSpec, u: BoxCell, v: BoxCell, n: int) -> Tuple[bool, bool]:
    h, k = u.side, v.side
    if isinstance(system, Rotation):
        start = u.lower(0) + n * system.alpha
        return arcs_meet(start, h, v.lower(0), k), arcs_meet(start, h, v.lower(0), k, closed=True)
    if isinstance(system, Contraction):
        scale = system.factor**n
        lo, hi = scale * u.lower(0), scale * (u.lower(0) + h)
        c = v.lower(0)
        return segments_meet(lo, hi, c, c + k), segments_meet(lo, hi, c, c + k, closed=True)
    if isinstance(system, SkewProduct):
        shift = n * system.alpha
        shear = Fraction(n * (n - 1), 2) * system.alpha
        b, d = u.lower(1), v.lower(1)
        out = []
        for closed in (False, True):
            hit = False
            for start, length in arc_pieces(u.lower(0), h, v.lower(0) - shift, k, closed=closed):
                y_start = b + n * start + shear
                if arcs_meet(y_start, h + n * length, d, k, closed=closed):
                    hit = True
                    break
            out.append(hit)
        return out[0], out[1]
    raise InvalidSystemError(f"Unsupported system {system.kind}")


__all__ = ["HittingService"]
