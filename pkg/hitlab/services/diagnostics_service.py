"""
Diagnostics Service Module

This module provides finite-horizon tests for the transitivity and mixing hierarchy,
the sensitivity notions, eight Lyapunov-number estimators and the Li-Yorke,
proximality and syndetic equicontinuity searches.

Verdicts are three-valued. ``fails-at-horizon`` is only reported with a finite
counterexample: a cell pair (or tuple) whose possible set already rules the
property out inside the window.
"""

import time
from fractions import Fraction
from functools import wraps
from itertools import combinations_with_replacement, product
from math import comb
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

from ..config.settings import get_settings
from ..schemas.diagnostics import (
    LYAPUNOV_KEYS,
    CellRun,
    DiagnosticVerdict,
    LiYorkeEvidence,
    LiYorkeWitness,
    LyapunovReport,
    LyapunovSweep,
    LyapunovSweepRow,
    ProximalCell,
    ProximalReport,
    SensitivityHierarchy,
    ThickSensitivityProfile,
)
from ..schemas.system import (
    BoxCell,
    Cell,
    EventuallyPeriodic,
    PointSpec,
    Product,
    ProductPoint,
    PrefixStream,
    SystemSpec,
    TorusPoint,
    Wedge,
    WedgePoint,
    WordSource,
)
from ..schemas.window import (
    VERDICT_SEVERITY,
    CofiniteFamily,
    SyndeticFamily,
    ThickFamily,
    ThicklySyndeticFamily,
    Verdict,
    WindowSet,
)
from ..utils.exceptions import BudgetExceeded, ConfigurationError, SampleTooSmall, Undecidable
from ..utils.logger import logger
from .family_service import FamilyService
from .hitting_service import HittingService
from .system_service import Bounds, SystemService, normalize_periodic


def timed(func: Callable) -> Callable:
    """Stamp ``runtime_ms`` on the returned report"""

    @wraps(func)
    def wrapper(*args, **kwargs):
        started = time.perf_counter()
        result = func(*args, **kwargs)
        if hasattr(result, "runtime_ms"):
            result = result.model_copy(update={"runtime_ms": (time.perf_counter() - started) * 1000})
        return result

    return wrapper


def _net(value: Fraction, threshold: Fraction) -> Fraction:
    return value if value > threshold else Fraction(0)


def _best(rows: Sequence[Sequence[Fraction]], start: int) -> Fraction:
    """max over n >= start of min over rows"""
    return max((min(row[n] for row in rows) for n in range(start, len(rows[0]))), default=Fraction(0))


# ---------------------------------------------------------------------------
# Candidate partners for proximal and Li-Yorke searches
# ---------------------------------------------------------------------------


class CandidateFactory:
    """Structured partner points inside a cell, in a fixed order

    Subshifts: the cell word grafted onto the tail of x, eventually periodic points
    with short periods, and doubling-gap perturbations that copy the grafted point
    except for isolated changes at positions growing at least geometrically.
    Metric systems: grid points of the cell at a finer dyadic resolution.
    """

    def __init__(self, system: SystemSpec, x: PointSpec, depth: int, horizon: int, span: int):
        self.system = system
        self.x = SystemService.evaluate(system, x, 0)
        self.depth = depth
        self.horizon = horizon
        self.span = span
        self.length = horizon + span + 1
        self.settings = get_settings()

    def for_cell(self, cell: Cell) -> Iterator[Tuple[str, PointSpec]]:
        return self._candidates(self.system, self.x, cell)

    def _candidates(self, system: SystemSpec, x: PointSpec, cell: Cell) -> Iterator[Tuple[str, PointSpec]]:
        if SystemService.is_subshift(system):
            yield from self._symbolic(system, x, cell.word)
        elif isinstance(system, Wedge):
            for tag, y in self._candidates(system.left, x.inner, cell.inner):
                yield tag, WedgePoint(side=cell.side, inner=y)
        elif isinstance(system, Product):
            lefts = list(self._candidates(system.left, x.left, cell.left))
            rights = list(self._candidates(system.right, x.right, cell.right))
            for (ta, a), (tb, b) in product(lefts, rights):
                yield f"{ta}x{tb}", ProductPoint(left=a, right=b)
        else:
            yield from self._grid(system, x, cell)

    def _grid(self, system: SystemSpec, x: PointSpec, cell: BoxCell) -> Iterator[Tuple[str, PointSpec]]:
        extra = self.settings.candidate_grid_extra_bits
        step = Fraction(1, 2 ** (cell.resolution + extra))
        axes = [[cell.lower(i) + j * step for j in range(2**extra)] for i in range(len(cell.corner))]
        for coords in product(*axes):
            y = TorusPoint(coords=coords)
            if y != x:
                yield "grid", y

    def _as_point(self, x: PointSpec, window: str) -> PointSpec:
        """The point agreeing with ``window`` and then with x"""
        if isinstance(x, EventuallyPeriodic):
            start = max(len(window), len(x.preperiod))
            pre = window + SystemService.window(x, len(window), start - len(window))
            return normalize_periodic(pre, SystemService.window(x, start, len(x.period)))
        return PrefixStream(source=WordSource(symbols=window))

    def _symbolic(self, system: SystemSpec, x: PointSpec, word: str) -> Iterator[Tuple[str, PointSpec]]:
        lang = SystemService.language(system)
        base = word + SystemService.window(x, len(word), self.length - len(word))
        seen = {x}
        if lang.admissible(base):
            y = self._as_point(x, base)
            if y not in seen:
                seen.add(y)
                yield "tail_graft", y

        for size in range(1, self.settings.candidate_max_period + 1):
            for period in lang.words(size):
                y = normalize_periodic(word, period)
                stretch = SystemService.window(y, 0, max(self.length, len(y.preperiod) + 2 * len(y.period)))
                if y not in seen and lang.admissible(stretch):
                    seen.add(y)
                    yield "eventually_periodic", y

        if lang.admissible(base):
            flipped = self._doubling(lang, base)
            if flipped is not None:
                y = self._as_point(x, flipped)
                if y not in seen and (not isinstance(y, EventuallyPeriodic) or lang.admissible(y.preperiod + 2 * y.period)):
                    yield "doubling_gap", y

    def _doubling(self, lang, base: str) -> Optional[str]:
        chars = list(base)
        cap = self.settings.candidate_gap_search
        target = max(self.depth, 1)
        flips: List[int] = []
        while target < len(chars):
            placed = None
            for p in range(target, min(len(chars), target + cap)):
                for s in lang.alphabet:
                    if s == chars[p]:
                        continue
                    trial = chars[:p] + [s] + chars[p + 1 :]
                    if lang.admissible("".join(trial)):
                        chars, placed = trial, p
                        break
                if placed is not None:
                    break
            if placed is None:
                break
            flips.append(placed)
            target = 2 * placed
        if not flips:
            return None
        logger.debug(f"doubling-gap flips at {flips}")
        return "".join(chars)


# ---------------------------------------------------------------------------
# Service
# ---------------------------------------------------------------------------


class DiagnosticsService:
    """
    Finite-horizon dynamical diagnostics.

    Provides:
    - transitivity, total transitivity, weak mixing and mixing tests
    - sensitivity constant, multi-sensitivity, thick-sensitivity profile, hierarchy
    - the eight Lyapunov estimators and horizon sweeps
    - Li-Yorke, proximal partner and syndetic equicontinuity searches
    """

    # -- transitivity hierarchy ---------------------------------------------

    @staticmethod
    def _pairs(system: SystemSpec, depth: int) -> List[Tuple[Cell, Cell]]:
        cells = SystemService.cell_family(system, depth)
        max_pairs = get_settings().max_pairs
        if len(cells) ** 2 > max_pairs:
            raise BudgetExceeded("Too many cell pairs", {"pairs": len(cells) ** 2, "max_pairs": max_pairs})
        return [(u, v) for u in cells for v in cells]

    @staticmethod
    def _pairwise(
        name: str,
        system: SystemSpec,
        depth: int,
        horizon: int,
        judge: Callable[[Cell, Cell], Tuple[Verdict, Dict]],
        params: Optional[Dict] = None,
    ) -> DiagnosticVerdict:
        verdict, witness = Verdict.HOLDS, None
        for u, v in DiagnosticsService._pairs(system, depth):
            result, extra = judge(u, v)
            if VERDICT_SEVERITY[result] > VERDICT_SEVERITY[verdict]:
                verdict, witness = result, {"u": u, "v": v, **extra}
                if verdict is Verdict.FAILS:
                    break
        log = logger.bind(operation=name, system=system.kind)
        if verdict is Verdict.INCONCLUSIVE:
            log.warning(f"{name} inconclusive at depth {depth}, H={horizon}")
        else:
            log.info(f"{name} at depth {depth}, H={horizon}: {verdict.value}")
        return DiagnosticVerdict(
            property=name,
            verdict=verdict,
            witness=witness,
            params={"depth": depth, "horizon": horizon, **(params or {})},
        )

    @staticmethod
    @timed
    def transitivity_test(system: SystemSpec, depth: int, horizon: int) -> DiagnosticVerdict:
        def judge(u: Cell, v: Cell):
            hits = HittingService.hitting_set(system, u, v, horizon)
            if hits.certain.members:
                return Verdict.HOLDS, {}
            if not hits.possible.members:
                return Verdict.FAILS, {}
            return Verdict.INCONCLUSIVE, {}

        return DiagnosticsService._pairwise("transitivity", system, depth, horizon, judge)

    @staticmethod
    @timed
    def total_transitivity_test(system: SystemSpec, k: int, depth: int, horizon: int) -> DiagnosticVerdict:
        """Transitivity of T^k, read off the hitting sets at multiples of k"""

        def judge(u: Cell, v: Cell):
            hits = HittingService.hitting_set(system, u, v, horizon)
            if any(n % k == 0 for n in hits.certain.members):
                return Verdict.HOLDS, {}
            if not any(n % k == 0 for n in hits.possible.members):
                return Verdict.FAILS, {}
            return Verdict.INCONCLUSIVE, {}

        return DiagnosticsService._pairwise("total_transitivity", system, depth, horizon, judge, {"k": k})

    @staticmethod
    @timed
    def weak_mixing_test(system: SystemSpec, depth: int, horizon: int) -> DiagnosticVerdict:
        """N(U, U) meets N(U, V) for every pair of depth-cells"""

        def judge(u: Cell, v: Cell):
            returns = HittingService.hitting_set(system, u, u, horizon)
            hits = HittingService.hitting_set(system, u, v, horizon)
            common = set(returns.certain.members) & set(hits.certain.members)
            if common:
                return Verdict.HOLDS, {}
            if not set(returns.possible.members) & set(hits.possible.members):
                return Verdict.FAILS, {}
            return Verdict.INCONCLUSIVE, {}

        return DiagnosticsService._pairwise("weak_mixing", system, depth, horizon, judge)

    @staticmethod
    @timed
    def mixing_test(system: SystemSpec, depth: int, horizon: int) -> DiagnosticVerdict:
        """N(U, V) contains a tail starting by the burn-in point for every pair"""
        limit = get_settings().burn_in(horizon)

        def judge(u: Cell, v: Cell):
            hits = HittingService.hitting_set(system, u, v, horizon)
            tail = FamilyService.cofinite_from(hits.certain)
            if tail is not None and tail <= limit:
                return Verdict.HOLDS, {}
            possible_tail = FamilyService.cofinite_from(hits.possible)
            if possible_tail is None or possible_tail > limit:
                missing = max(n for n in range(horizon + 1) if n not in hits.possible)
                return Verdict.FAILS, {"missing": missing}
            return Verdict.INCONCLUSIVE, {}

        return DiagnosticsService._pairwise("mixing", system, depth, horizon, judge, {"tail_start_max": limit})

    # -- sensitivity ---------------------------------------------------------

    @staticmethod
    def _diameter_rows(system: SystemSpec, cells: Sequence[Cell], horizon: int) -> List[List[Fraction]]:
        return [[low for low, _ in SystemService.diameter_profile(system, c, horizon)] for c in cells]

    @staticmethod
    def _threshold(system: SystemSpec, cells: Sequence[Cell]) -> Fraction:
        return max(SystemService.cell_diameter(system, c) for c in cells)

    @staticmethod
    def sensitivity_constant(system: SystemSpec, depth: int, horizon: int) -> float:
        """Net L_d: min over cells of the largest certified image diameter"""
        cells = SystemService.cell_family(system, depth)
        rows = DiagnosticsService._diameter_rows(system, cells, horizon)
        value = min(_best([row], 0) for row in rows)
        return float(_net(value, DiagnosticsService._threshold(system, cells)))

    @staticmethod
    def _sensitivity_sets(system: SystemSpec, depth: int, delta, horizon: int):
        cells = SystemService.cell_family(system, depth)
        return cells, [HittingService.sensitivity_set(system, c, delta, horizon) for c in cells]

    @staticmethod
    @timed
    def multi_sensitivity_test(system: SystemSpec, k: int, depth: int, delta, horizon: int) -> DiagnosticVerdict:
        """Every k-tuple of depth-cells (with repetition) has a common sensitivity time"""
        cells, sets = DiagnosticsService._sensitivity_sets(system, depth, delta, horizon)
        count = comb(len(cells) + k - 1, k)
        cap = get_settings().max_tuples
        if count > cap:
            raise BudgetExceeded(f"{count} tuples exceed max_tuples={cap}", {"tuples": count, "max_tuples": cap})

        def mask(ws: WindowSet) -> int:
            out = 0
            for n in ws.members:
                out |= 1 << n
            return out

        certain = [mask(s.certain) for s in sets]
        possible = [mask(s.possible) for s in sets]
        full = (1 << (horizon + 1)) - 1
        verdict, witness = Verdict.HOLDS, None
        for combo in combinations_with_replacement(range(len(cells)), k):
            hit_c, hit_p = full, full
            for i in combo:
                hit_c &= certain[i]
                hit_p &= possible[i]
            if hit_c:
                continue
            result = Verdict.FAILS if not hit_p else Verdict.INCONCLUSIVE
            if VERDICT_SEVERITY[result] > VERDICT_SEVERITY[verdict]:
                verdict, witness = result, {"cells": [cells[i] for i in combo]}
                if verdict is Verdict.FAILS:
                    break
        logger.info(f"multi-sensitivity k={k} at depth {depth}: {verdict.value}")
        return DiagnosticVerdict(
            property="multi_sensitivity",
            verdict=verdict,
            witness=witness,
            params={"k": k, "depth": depth, "delta": float(delta), "horizon": horizon, "tuples": count},
        )

    @staticmethod
    def thick_sensitivity_profile(system: SystemSpec, depth: int, delta, horizon: int) -> ThickSensitivityProfile:
        cells, sets = DiagnosticsService._sensitivity_sets(system, depth, delta, horizon)
        rows = [CellRun(cell=c, max_run=FamilyService.max_run(s.certain)) for c, s in zip(cells, sets)]
        return ThickSensitivityProfile(
            rows=rows,
            min_run=min(r.max_run for r in rows),
            params={"depth": depth, "delta": float(delta), "horizon": horizon},
        )

    @staticmethod
    def sensitivity_hierarchy(system: SystemSpec, depth: int, delta, horizon: int) -> SensitivityHierarchy:
        """Classify every cell's sensitivity set against the family predicates"""
        cells, sets = DiagnosticsService._sensitivity_sets(system, depth, delta, horizon)
        predicates = {
            "syndetic": SyndeticFamily(),
            "thickly_syndetic": ThicklySyndeticFamily(),
            "thick": ThickFamily(),
            "cofinite": CofiniteFamily(),
        }
        levels: Dict[str, Verdict] = {}
        witnesses: Dict[str, Optional[Cell]] = {}

        level, witness = Verdict.HOLDS, None
        for c, s in zip(cells, sets):
            result = Verdict.HOLDS if s.certain.members else Verdict.FAILS if not s.possible.members else Verdict.INCONCLUSIVE
            if VERDICT_SEVERITY[result] > VERDICT_SEVERITY[level]:
                level, witness = result, c
        levels["sensitive"], witnesses["sensitive"] = level, witness

        for name, predicate in predicates.items():
            level, witness = Verdict.HOLDS, None
            for c, s in zip(cells, sets):
                result = FamilyService.evaluate(predicate, s).verdict
                if VERDICT_SEVERITY[result] > VERDICT_SEVERITY[level]:
                    level, witness = result, c
            levels[name], witnesses[name] = level, witness
        return SensitivityHierarchy(
            levels=levels,
            witnesses=witnesses,
            params={"depth": depth, "delta": float(delta), "horizon": horizon},
        )

    # -- Lyapunov numbers ----------------------------------------------------

    @staticmethod
    def _sample_rows(
        system: SystemSpec, cells: List[Cell], depth: int, horizon: int, sample: Optional[Sequence[PointSpec]]
    ) -> List[List[Fraction]]:
        points = list(sample) if sample else [SystemService.canonical_point(system, c) for c in cells]
        homes = []
        for x in points:
            SystemService.validate_point(system, x)
            homes.append(SystemService.cell_of(system, x, depth))
        missed = [c for c in cells if c not in set(homes)]
        if missed:
            raise SampleTooSmall(
                f"Sample misses {len(missed)} of {len(cells)} depth-{depth} cells",
                {"missed": [c.model_dump(mode="json") for c in missed[:8]]},
            )
        return [
            [low for low, _ in SystemService.spread_profile(system, x, home, horizon)]
            for x, home in zip(points, homes)
        ]

    @staticmethod
    def _estimates(
        cell_rows: List[List[Fraction]], point_rows: List[List[Fraction]], burn_in: int, arity: int
    ) -> Dict[str, Fraction]:
        cap = get_settings().max_tuples
        for rows in (cell_rows, point_rows):
            count = comb(len(rows) + arity - 1, arity)
            if count > cap:
                raise BudgetExceeded(f"{count} tuples exceed max_tuples={cap}", {"tuples": count, "max_tuples": cap})

        def single(rows, start):
            return min(_best([row], start) for row in rows)

        def multi(rows, start):
            return min(_best([rows[i] for i in combo], start) for combo in combinations_with_replacement(range(len(rows)), arity))

        return {
            "L_r": single(point_rows, 0),
            "Lbar_r": single(point_rows, burn_in),
            "L_d": single(cell_rows, 0),
            "Lbar_d": single(cell_rows, burn_in),
            "L_mr": multi(point_rows, 0),
            "Lbar_mr": multi(point_rows, burn_in),
            "L_md": multi(cell_rows, 0),
            "Lbar_md": multi(cell_rows, burn_in),
        }

    @staticmethod
    @timed
    def lyapunov_numbers(
        system: SystemSpec,
        depth: int,
        horizon: int,
        burn_in: Optional[int] = None,
        arity: int = 2,
        sample: Optional[Sequence[PointSpec]] = None,
    ) -> LyapunovReport:
        """Eight Lyapunov estimates over one common discretization

        d-variants range over depth-cells, r-variants over sample points each with
        its own depth-cell as neighbourhood; bar variants only count times in
        [burn_in, H]; m-variants take a common time for k-tuples.
        """
        settings = get_settings()
        h0 = settings.burn_in(horizon) if burn_in is None else burn_in
        if not 0 <= h0 <= horizon:
            raise ConfigurationError("burn_in must lie in [0, H]", invalid_vars={"burn_in": str(h0)})
        if arity < 2:
            raise ConfigurationError("multi estimates need arity >= 2", invalid_vars={"arity": str(arity)})

        cells = SystemService.cell_family(system, depth)
        cell_rows = DiagnosticsService._diameter_rows(system, cells, horizon)
        point_rows = DiagnosticsService._sample_rows(system, cells, depth, horizon, sample)
        raw = DiagnosticsService._estimates(cell_rows, point_rows, h0, arity)
        threshold = DiagnosticsService._threshold(system, cells)
        net = {k: _net(v, threshold) for k, v in raw.items()}

        chains = [
            ("L_md >= L_mr >= Lbar_mr", net["L_md"] >= net["L_mr"] >= net["Lbar_mr"]),
            ("L_md >= Lbar_md >= Lbar_mr", net["L_md"] >= net["Lbar_md"] >= net["Lbar_mr"]),
            ("L_d >= L_md", net["L_d"] >= net["L_md"]),
            ("L_r >= L_mr", net["L_r"] >= net["L_mr"]),
            ("L_d >= L_r", net["L_d"] >= net["L_r"]),
        ]
        certified = []
        for text, ok in chains:
            if ok:
                certified.append(text)
            else:
                logger.warning(f"estimator relation {text} does not hold; discretization mismatch")
        observed = {
            "L_md <= 2*Lbar_mr": net["L_md"] <= 2 * net["Lbar_mr"],
            "L_md == Lbar_md": net["L_md"] == net["Lbar_md"],
            "L_r == Lbar_r": net["L_r"] == net["Lbar_r"],
        }
        logger.bind(operation="lyapunov_numbers", system=system.kind).info(
            f"L_d={float(net['L_d'])} L_md={float(net['L_md'])} at depth {depth}, H={horizon}"
        )
        return LyapunovReport(
            estimates={k: float(net[k]) for k in LYAPUNOV_KEYS},
            raw={k: float(raw[k]) for k in LYAPUNOV_KEYS},
            threshold=float(threshold),
            params={
                "depth": depth,
                "horizon": horizon,
                "burn_in": h0,
                "arity": arity,
                "sample_size": len(point_rows),
            },
            certified_relations=certified,
            observed_relations=observed,
        )

    @staticmethod
    def lyapunov_sweep(
        system: SystemSpec,
        depth: int,
        horizons: Sequence[int],
        arity: int = 2,
        sample: Optional[Sequence[PointSpec]] = None,
    ) -> LyapunovSweep:
        settings = get_settings()
        rows = []
        for h in sorted(horizons):
            report = DiagnosticsService.lyapunov_numbers(system, depth, h, None, arity, sample)
            rows.append(LyapunovSweepRow(horizon=h, burn_in=settings.burn_in(h), estimates=report.estimates))
        return LyapunovSweep(rows=rows, params={"depth": depth, "arity": arity})

    # -- point searches ------------------------------------------------------

    @staticmethod
    def _span(*radii: float) -> int:
        return max(SystemService.separation_length(r) for r in radii) + 1

    @staticmethod
    def orbit_distance_bounds(
        system: SystemSpec, x: PointSpec, y: PointSpec, start: int, stop: int, span: int
    ) -> List[Bounds]:
        """Bounds on d(T^n x, T^n y) for start <= n <= stop

        Symbolic distances are read from windows of ``span + 1`` symbols, so a pair
        agreeing on the whole window is only bounded by 2^-(span + 1).
        """
        if SystemService.is_subshift(system):
            a = SystemService.window(x, 0, stop + span + 1)
            b = SystemService.window(y, 0, stop + span + 1)
            out: List[Bounds] = []
            for n in range(start, stop + 1):
                j = next((i for i in range(span + 1) if a[n + i] != b[n + i]), None)
                if j is None:
                    out.append((Fraction(0), Fraction(1, 2 ** (span + 1))))
                else:
                    out.append((Fraction(1, 2**j), Fraction(1, 2**j)))
            return out
        if isinstance(system, Wedge) and x.side == y.side:
            return DiagnosticsService.orbit_distance_bounds(system.left, x.inner, y.inner, start, stop, span)
        if isinstance(system, Product):
            left = DiagnosticsService.orbit_distance_bounds(system.left, x.left, y.left, start, stop, span)
            right = DiagnosticsService.orbit_distance_bounds(system.right, x.right, y.right, start, stop, span)
            return [(max(p[0], q[0]), max(p[1], q[1])) for p, q in zip(left, right)]
        px, py = SystemService.evaluate(system, x, start), SystemService.evaluate(system, y, start)
        out = []
        for _ in range(start, stop + 1):
            d = SystemService.distance(system, px, py)
            out.append((d, d))
            px, py = SystemService.evaluate(system, px, 1), SystemService.evaluate(system, py, 1)
        return out

    @staticmethod
    def _li_yorke_check(
        system: SystemSpec, x: PointSpec, y: PointSpec, tag: str, delta: Fraction, eps: Fraction, start: int, stop: int, span: int
    ) -> Optional[LiYorkeWitness]:
        bounds = DiagnosticsService.orbit_distance_bounds(system, x, y, start, stop, span)
        n_min = min(range(len(bounds)), key=lambda i: bounds[i][1])
        n_max = max(range(len(bounds)), key=lambda i: bounds[i][0])
        if bounds[n_min][1] < eps and bounds[n_max][0] > delta:
            return LiYorkeWitness(
                point=y,
                candidate=tag,
                min_distance=float(bounds[n_min][1]),
                max_distance=float(bounds[n_max][0]),
                n_min=start + n_min,
                n_max=start + n_max,
            )
        return None

    @staticmethod
    def _distance_at(system: SystemSpec, x: PointSpec, y: PointSpec, n: int) -> Bounds:
        """d(T^n x, T^n y) from the iterates themselves"""
        px, py = SystemService.evaluate(system, x, n), SystemService.evaluate(system, y, n)
        try:
            d = SystemService.distance(system, px, py)
        except Undecidable as e:
            return Fraction(0), Fraction(1, 2 ** e.details["compared"])
        return d, d

    @staticmethod
    def _confirm_witness(
        system: SystemSpec, x: PointSpec, found: LiYorkeWitness, delta: Fraction, eps: Fraction, start: int, stop: int
    ) -> bool:
        if not (start <= found.n_min <= stop and start <= found.n_max <= stop):
            return False
        near = DiagnosticsService._distance_at(system, x, found.point, found.n_min)
        far = DiagnosticsService._distance_at(system, x, found.point, found.n_max)
        return near[1] < eps and far[0] > delta

    @staticmethod
    def li_yorke_search(
        system: SystemSpec,
        x: PointSpec,
        depth: int,
        delta,
        horizon: int,
        burn_in: Optional[int] = None,
    ) -> Optional[LiYorkeWitness]:
        """First candidate y in x's depth-cell with min distance below prox_epsilon and
        max distance above delta over [burn_in, H]"""
        settings = get_settings()
        delta, eps = Fraction(delta), Fraction(settings.prox_epsilon)
        h0 = settings.burn_in(horizon) if burn_in is None else burn_in
        span = DiagnosticsService._span(float(delta), float(eps)) if SystemService.is_subshift(_base(system)) else 0
        factory = CandidateFactory(system, x, depth, horizon, span)
        cell = SystemService.cell_of(system, factory.x, depth)
        for tag, y in factory.for_cell(cell):
            found = DiagnosticsService._li_yorke_check(system, factory.x, y, tag, delta, eps, h0, horizon, span)
            if found is None:
                continue
            if DiagnosticsService._confirm_witness(system, factory.x, found, delta, eps, h0, horizon):
                logger.info(f"Li-Yorke partner found ({tag}) at depth {depth}")
                return found
            logger.warning(f"Li-Yorke candidate ({tag}) rejected by the stepped re-scan")
        logger.info(f"no Li-Yorke partner among candidates at depth {depth}, H={horizon}")
        return None

    @staticmethod
    def li_yorke_sensitivity_evidence(
        system: SystemSpec,
        sample: Sequence[PointSpec],
        depth: int,
        delta,
        horizon: int,
        burn_in: Optional[int] = None,
    ) -> LiYorkeEvidence:
        witnesses = [DiagnosticsService.li_yorke_search(system, x, depth, delta, horizon, burn_in) for x in sample]
        found = sum(w is not None for w in witnesses)
        return LiYorkeEvidence(
            fraction=found / len(witnesses) if witnesses else 0.0,
            witnesses=witnesses,
            params={"depth": depth, "delta": float(delta), "horizon": horizon, "sample_size": len(witnesses)},
        )

    @staticmethod
    def proximal_partner_search(
        system: SystemSpec, x: PointSpec, depth: int, epsilon=None, horizon: int = 64
    ) -> ProximalReport:
        """Fraction of depth-cells holding a candidate y with min_{n <= H} d(T^n x, T^n y) < epsilon"""
        eps = Fraction(epsilon if epsilon is not None else get_settings().prox_epsilon)
        span = DiagnosticsService._span(float(eps)) if SystemService.is_subshift(_base(system)) else 0
        factory = CandidateFactory(system, x, depth, horizon, span)
        rows = []
        for cell in SystemService.cell_family(system, depth):
            hit = ProximalCell(cell=cell)
            for tag, y in factory.for_cell(cell):
                bounds = DiagnosticsService.orbit_distance_bounds(system, factory.x, y, 0, horizon, span)
                if min(high for _, high in bounds) < eps:
                    hit = ProximalCell(cell=cell, witness=y, candidate=tag)
                    break
            rows.append(hit)
        fraction = sum(r.witness is not None for r in rows) / len(rows)
        logger.info(f"proximal partners in {fraction:.3f} of depth-{depth} cells")
        return ProximalReport(
            fraction=fraction,
            cells=rows,
            params={"depth": depth, "epsilon": float(eps), "horizon": horizon},
        )

    @staticmethod
    def syndetic_equicontinuity(system: SystemSpec, x: PointSpec, epsilon, depth: int, horizon: int) -> Optional[int]:
        """Gap bound of {n : diam T^n(cell of x) <= epsilon}; None when empty or censored"""
        eps = Fraction(epsilon)
        cell = SystemService.cell_of(system, SystemService.evaluate(system, x, 0), depth)
        profile = SystemService.diameter_profile(system, cell, horizon)
        good = WindowSet.of(horizon, (n for n, (_, high) in enumerate(profile) if high <= eps))
        if not good.members:
            return None
        gap = FamilyService.max_gap(good)
        if FamilyService.tail_gap(good) > gap:
            return None
        return gap


def _base(system: SystemSpec) -> SystemSpec:
    """The innermost component deciding how distances are read"""
    if isinstance(system, Wedge):
        return _base(system.left)
    if isinstance(system, Product):
        left, right = _base(system.left), _base(system.right)
        return left if SystemService.is_subshift(left) else right
    return system


__all__ = ["DiagnosticsService", "CandidateFactory", "timed"]
