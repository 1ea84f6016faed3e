"""
Family Service Module

Finite-horizon statistics for Furstenberg families (thick, syndetic, thickly
syndetic, cofinite, IP) and the F-transitivity predicate built on hitting sets.
"""

from itertools import combinations
from typing import Dict, List, Optional, Tuple

from ..config.settings import get_settings
from ..schemas.diagnostics import DiagnosticVerdict
from ..schemas.system import SystemSpec
from ..schemas.window import (
    VERDICT_SEVERITY,
    CofiniteFamily,
    DualConsistency,
    FamilyPredicate,
    FamilyVerdict,
    IPFamily,
    IPSearch,
    SyndeticFamily,
    TaggedWindowSet,
    ThickFamily,
    ThicklySyndeticFamily,
    Verdict,
    WindowSet,
)
from ..utils.exceptions import BudgetExceeded, EmptySetError, NoRuns
from ..utils.logger import logger
from ..utils.serialization import runs
from .hitting_service import HittingService
from .system_service import SystemService


def worst(verdicts) -> Verdict:
    return max(verdicts, key=VERDICT_SEVERITY.__getitem__, default=Verdict.HOLDS)


class FamilyService:
    """
    Family statistics over WindowSets.

    Provides:
    - max_run, max_gap (leading gap included, trailing gap censored), tail_gap
    - run starts and the thickly syndetic gap
    - cofinite tail start
    - bounded IP basis search
    - three-valued family verdicts on certain/possible pairs
    - F-transitivity over all pairs of depth-cells
    """

    @staticmethod
    def max_run(s: WindowSet) -> int:
        return max((length for _, length in runs(s.members)), default=0)

    @staticmethod
    def max_gap(s: WindowSet) -> int:
        """Largest gap between consecutive members, counting the gap from 0 to min(S)

        Raises:
            EmptySetError: If S has no members
        """
        if not s.members:
            raise EmptySetError("max_gap of an empty set", {"horizon": s.horizon})
        gaps = [b - a for a, b in zip(s.members, s.members[1:])]
        return max([s.members[0]] + gaps)

    @staticmethod
    def tail_gap(s: WindowSet) -> int:
        """The censored gap H - max(S)"""
        if not s.members:
            raise EmptySetError("tail_gap of an empty set", {"horizon": s.horizon})
        return s.horizon - s.members[-1]

    @staticmethod
    def run_starts(s: WindowSet, length: int) -> WindowSet:
        """{i : {i, ..., i + length - 1} contained in S} within [0, H - length + 1]"""
        last = s.horizon - length + 1
        starts: List[int] = []
        for start, size in runs(s.members):
            starts.extend(range(start, min(start + size - length, last) + 1))
        return WindowSet.of(max(last, 0), starts)

    @staticmethod
    def thickly_syndetic_gap(s: WindowSet, length: int) -> int:
        starts = FamilyService.run_starts(s, length)
        if not starts.members or s.horizon - length + 1 < 0:
            raise NoRuns(f"No run of length {length} inside the window", {"length": length, "horizon": s.horizon})
        return FamilyService.max_gap(starts)

    @staticmethod
    def cofinite_from(s: WindowSet) -> Optional[int]:
        """Smallest m with {m, ..., H} contained in S"""
        members = s.members
        if not members or members[-1] != s.horizon:
            return None
        i = len(members) - 1
        while i > 0 and members[i - 1] == members[i] - 1:
            i -= 1
        return members[i]

    @staticmethod
    def ip_search(s: WindowSet, depth: int) -> IPSearch:
        """Lexicographically first basis of ``depth`` distinct positive integers whose
        nonempty subset sums all lie in S"""
        settings = get_settings()
        bound = min(s.horizon, settings.ip_search_bound)
        candidates = [m for m in s.members if 1 <= m <= bound]
        budget = settings.ip_node_budget
        nodes = 0

        def extend(start: int, basis: Tuple[int, ...], sums: Tuple[int, ...]) -> Optional[Tuple[int, ...]]:
            nonlocal nodes
            if len(basis) == depth:
                return basis
            for i in range(start, len(candidates)):
                nodes += 1
                if nodes > budget:
                    return None
                p = candidates[i]
                added = (p,) + tuple(t + p for t in sums)
                if all(t in s for t in added):
                    found = extend(i + 1, basis + (p,), sums + added)
                    if found is not None:
                        return found
            return None

        basis = extend(0, (), ())
        if basis is not None and not FamilyService._sums_inside(s, basis):
            basis = None
        exhaustive = nodes <= budget and bound >= s.horizon
        return IPSearch(basis=basis, exhaustive=exhaustive, nodes=nodes, bound=bound)

    @staticmethod
    def _sums_inside(s: WindowSet, basis: Tuple[int, ...]) -> bool:
        return all(sum(c) in s for k in range(1, len(basis) + 1) for c in combinations(basis, k))

    @staticmethod
    def ip_witness(s: WindowSet, depth: int) -> Optional[Tuple[int, ...]]:
        return FamilyService.ip_search(s, depth).basis

    @staticmethod
    def dual_consistency(s: WindowSet, g: WindowSet) -> DualConsistency:
        """A run of S longer than every gap of G, starting by max(G), must meet G"""
        needed = FamilyService.max_gap(g) + 1
        premise = any(
            size >= needed and start <= g.members[-1] for start, size in runs(s.members)
        )
        common = sorted(set(s.members) & set(g.members))
        return DualConsistency(
            premise=premise,
            conclusion=bool(common),
            run_length_needed=needed,
            witness=common[0] if common else None,
        )

    # -- verdicts ----------------------------------------------------------

    @staticmethod
    def evaluate(family: FamilyPredicate, sets: TaggedWindowSet) -> FamilyVerdict:
        """Three-valued verdict of a family predicate; thresholds left unset default from H"""
        certain, possible = sets.certain, sets.possible
        horizon = certain.horizon
        stats: Dict[str, object] = {}

        if isinstance(family, ThickFamily):
            need = family.min_run or max(1, horizon // 4)
            stats = {"max_run": FamilyService.max_run(certain), "max_run_possible": FamilyService.max_run(possible)}
            params = {"min_run": need}
            if stats["max_run"] >= need:
                verdict = Verdict.HOLDS
            elif stats["max_run_possible"] < need:
                verdict = Verdict.FAILS
            else:
                verdict = Verdict.INCONCLUSIVE

        elif isinstance(family, SyndeticFamily):
            bound = family.max_gap or max(1, horizon // 4)
            params = {"max_gap": bound}
            verdict, stats = FamilyService._syndetic(certain, possible, bound)

        elif isinstance(family, ThicklySyndeticFamily):
            bound = family.max_gap or max(1, horizon // 4)
            params = {"run_length": family.run_length, "max_gap": bound}
            verdict, stats = FamilyService._syndetic(
                FamilyService.run_starts(certain, family.run_length),
                FamilyService.run_starts(possible, family.run_length),
                bound,
            )

        elif isinstance(family, CofiniteFamily):
            limit = family.tail_start_max if family.tail_start_max is not None else get_settings().burn_in(horizon)
            params = {"tail_start_max": limit}
            tail, tail_possible = FamilyService.cofinite_from(certain), FamilyService.cofinite_from(possible)
            stats = {"tail_start": tail, "tail_start_possible": tail_possible}
            if tail is not None and tail <= limit:
                verdict = Verdict.HOLDS
            elif tail_possible is None or tail_possible > limit:
                verdict = Verdict.FAILS
            else:
                verdict = Verdict.INCONCLUSIVE

        elif isinstance(family, IPFamily):
            params = {"depth": family.depth}
            found = FamilyService.ip_search(certain, family.depth)
            stats = {"basis": found.basis, "nodes": found.nodes, "bound": found.bound}
            if found.basis is not None:
                verdict = Verdict.HOLDS
            else:
                refuted = FamilyService.ip_search(possible, family.depth)
                verdict = Verdict.FAILS if refuted.basis is None and refuted.exhaustive else Verdict.INCONCLUSIVE

        return FamilyVerdict(family=family.family, statistic=stats, verdict=verdict, params={"horizon": horizon, **params})

    @staticmethod
    def _syndetic(certain: WindowSet, possible: WindowSet, bound: int) -> Tuple[Verdict, Dict[str, object]]:
        stats: Dict[str, object] = {"max_gap": None, "tail_gap": None}
        if certain.members:
            stats = {"max_gap": FamilyService.max_gap(certain), "tail_gap": FamilyService.tail_gap(certain)}
            if stats["max_gap"] <= bound and stats["tail_gap"] <= bound:
                return Verdict.HOLDS, stats
        if not possible.members or FamilyService.max_gap(possible) > bound:
            return Verdict.FAILS, stats
        return Verdict.INCONCLUSIVE, stats

    # -- transitivity ------------------------------------------------------

    @staticmethod
    def family_transitivity(system: SystemSpec, family: FamilyPredicate, depth: int, horizon: int) -> DiagnosticVerdict:
        """Apply a family predicate to N(U, V) for every ordered pair of depth-cells"""
        cells = SystemService.cell_family(system, depth)
        max_pairs = get_settings().max_pairs
        if len(cells) ** 2 > max_pairs:
            raise BudgetExceeded("Too many cell pairs", {"pairs": len(cells) ** 2, "max_pairs": max_pairs})
        log = logger.bind(operation="family_transitivity", system=system.kind)

        verdict = Verdict.HOLDS
        witness = None
        counts = {v.value: 0 for v in Verdict}
        for u in cells:
            for v in cells:
                result = FamilyService.evaluate(family, HittingService.hitting_set(system, u, v, horizon))
                counts[result.verdict.value] += 1
                if VERDICT_SEVERITY[result.verdict] > VERDICT_SEVERITY[verdict]:
                    verdict = result.verdict
                    witness = {"u": u, "v": v, "family_verdict": result}

        log.info(f"{family.family}-transitivity at depth {depth}, H={horizon}: {verdict.value}")
        return DiagnosticVerdict(
            property=f"{family.family}_transitivity",
            verdict=verdict,
            witness=witness,
            params={"depth": depth, "horizon": horizon, "family": family.model_dump()},
            notes=[f"{counts[v.value]} pairs {v.value}" for v in Verdict if counts[v.value]],
        )


__all__ = ["FamilyService", "worst"]
