"""
Entropy Service Module

Topological sequence entropy through separated sets. Subshift counts are exact:
two points are (k, eps)-separated exactly when their windows
x[n_j : n_j + L(eps) + 1] differ for some j < k, so sep(k) is the number of
realizable labelings of the union of those windows. Metric systems get greedy
lower bounds over a dyadic sample.
"""

from fractions import Fraction
from itertools import product
from math import log
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..config.settings import get_settings
from ..schemas.entropy import (
    ArithmeticSequence,
    EntropyEstimate,
    ExplicitSequence,
    FullSequence,
    GeometricSequence,
    SepProfile,
    SequenceSpec,
)
from ..schemas.system import (
    Contraction,
    PointSpec,
    Product,
    ProductPoint,
    Rotation,
    SkewProduct,
    SystemSpec,
    TorusPoint,
    Wedge,
    WedgePoint,
)
from ..utils.exceptions import BudgetExceeded, ConfigurationError, InvalidSystemError, NotASubshift, WindowOverflow
from ..utils.logger import logger
from ..utils.serialization import dump_json, rows_to_csv
from .system_service import SystemService, normalize_periodic


class EntropyService:
    """
    Separated-set counting.

    Provides:
    - the time sequence n_0 = 0 < n_1 < ... of a SequenceSpec
    - exact sep(k) on subshifts, greedy sep(k) on any system
    - slope estimates of log sep(k) and the profile behind them
    """

    @staticmethod
    def sequence_times(seq: SequenceSpec, k: int) -> List[int]:
        """n_0, ..., n_{k-1} with n_0 = 0"""
        if k < 1:
            raise ConfigurationError("k must be positive", invalid_vars={"k": str(k)})
        if isinstance(seq, FullSequence):
            times = list(range(k))
        elif isinstance(seq, ArithmeticSequence):
            times = [0] + [seq.a * j + seq.b for j in range(k - 1)]
        elif isinstance(seq, GeometricSequence):
            times = [0] + [seq.c**j for j in range(1, k)]
        elif isinstance(seq, ExplicitSequence):
            if len(seq.values) < k - 1:
                raise ConfigurationError(
                    f"Explicit sequence lists {len(seq.values)} times, k = {k} needs {k - 1}",
                    invalid_vars={"sequence": "too short"},
                )
            times = [0] + list(seq.values[: k - 1])
        else:
            raise InvalidSystemError(f"Unknown sequence kind {seq.kind}")

        limit = get_settings().max_horizon
        if times[-1] > limit:
            raise BudgetExceeded("Sequence time exceeds max_horizon", {"time": times[-1], "max_horizon": limit})
        return times

    @staticmethod
    def window_positions(times: Sequence[int], span: int) -> List[int]:
        """Union of the windows [n_j, n_j + span]"""
        return sorted({n + i for n in times for i in range(span + 1)})

    @staticmethod
    def sep_count_exact(system: SystemSpec, seq: SequenceSpec, k: int, epsilon) -> int:
        """Maximal cardinality of a (k, eps)-separated set, counted exactly

        Raises:
            NotASubshift: If the system has no word language
            BadDelta: If eps lies outside (0, 1)
            WindowOverflow: If n_{k-1} + L(eps) exceeds max_window
        """
        if not SystemService.is_subshift(system):
            raise NotASubshift(f"Exact separated counts need a subshift, got {system.kind}", {"kind": system.kind})
        span = SystemService.separation_length(epsilon)
        times = EntropyService.sequence_times(seq, k)
        limit = get_settings().max_window
        if times[-1] + span > limit:
            raise WindowOverflow(
                "Window union exceeds max_window",
                {"last": times[-1] + span, "max_window": limit},
            )
        positions = EntropyService.window_positions(times, span)
        return SystemService.language(system).count_patterns(positions)

    @staticmethod
    def sep_greedy(system: SystemSpec, sample: Sequence[PointSpec], seq: SequenceSpec, k: int, epsilon) -> int:
        """Size of the greedy separated subset of the sample, in lexicographic order of
        the point representations; a lower bound for sep(k)"""
        epsilon = Fraction(epsilon)
        times = EntropyService.sequence_times(seq, k)
        ordered = sorted(sample, key=dump_json)

        if SystemService.is_subshift(system):
            span = SystemService.separation_length(epsilon)
            signatures = set()
            for x in ordered:
                signatures.add(tuple(SystemService.window(x, n, span + 1) for n in times))
            return len(signatures)

        chosen: List[List[PointSpec]] = []
        for x in ordered:
            orbit = [SystemService.evaluate(system, x, n) for n in times]
            separated = all(
                any(SystemService.distance(system, p, q) > epsilon for p, q in zip(orbit, other)) for other in chosen
            )
            if separated:
                chosen.append(orbit)
        return len(chosen)

    @staticmethod
    def sample_points(system: SystemSpec, bits: Optional[int] = None) -> List[PointSpec]:
        """Dyadic sample with about 2^bits points: grid points for metric systems,
        eventually periodic points through every admissible word of length bits for subshifts"""
        bits = get_settings().greedy_grid_bits if bits is None else bits
        if SystemService.is_subshift(system):
            lang = SystemService.language(system)
            out = []
            for word in lang.words(bits):
                found = lang.extension(word)
                if found is not None:
                    out.append(normalize_periodic(*found))
            return out
        if isinstance(system, (Rotation, Contraction)):
            return [TorusPoint(coords=(Fraction(i, 2**bits),)) for i in range(2**bits)]
        if isinstance(system, SkewProduct):
            half = max(1, bits // 2)
            grid = [Fraction(i, 2**half) for i in range(2**half)]
            return [TorusPoint(coords=(a, b)) for a, b in product(grid, grid)]
        if isinstance(system, Wedge):
            inner = EntropyService.sample_points(system.left, bits)
            return [WedgePoint(side=side, inner=p) for side in ("left", "right") for p in inner]
        if isinstance(system, Product):
            half = max(1, bits // 2)
            left = EntropyService.sample_points(system.left, half)
            right = EntropyService.sample_points(system.right, half)
            return [ProductPoint(left=p, right=q) for p, q in product(left, right)]
        raise InvalidSystemError(f"Unsupported system {system.kind}")

    @staticmethod
    def _slope(counts: Sequence[int], k_max: int) -> float:
        """Least-squares slope of log sep(k) over the upper half of the k range"""
        ks = np.arange(max(1, k_max // 2), k_max + 1)
        values = np.log(np.array([counts[k - 1] for k in ks], dtype=float))
        slope = float(np.polyfit(ks, values, 1)[0])
        return max(slope, 0.0)

    @staticmethod
    def sep_profile(system: SystemSpec, seq: SequenceSpec, epsilon, k_max: int) -> SepProfile:
        """sep(k) for k = 1..k_max with the fitted slope"""
        if k_max < 2:
            raise ConfigurationError("k_max must be at least 2", invalid_vars={"k_max": str(k_max)})
        log_ = logger.bind(operation="sep_profile", system=system.kind)
        if SystemService.is_subshift(system):
            method = "exact"
            counts = [EntropyService.sep_count_exact(system, seq, k, epsilon) for k in range(1, k_max + 1)]
        else:
            method = "greedy"
            sample = EntropyService.sample_points(system)
            counts = [EntropyService.sep_greedy(system, sample, seq, k, epsilon) for k in range(1, k_max + 1)]
        slope = EntropyService._slope(counts, k_max)
        log_.debug(f"eps={float(epsilon)}: counts={counts}, slope={slope:.6f}")
        return SepProfile(counts=counts, epsilon=float(epsilon), slope=slope, method=method)

    @staticmethod
    def seq_entropy_estimate(system: SystemSpec, seq: SequenceSpec, epsilons: Sequence[float], k_max: int) -> EntropyEstimate:
        """Max over eps of the fitted slope of log sep(k)

        Exact on subshifts; a lower-bound estimate elsewhere.
        """
        if not epsilons:
            raise ConfigurationError("At least one epsilon is required", missing_vars=["epsilons"])
        if any(b >= a for a, b in zip(epsilons, epsilons[1:])):
            raise ConfigurationError("epsilons must be strictly decreasing", invalid_vars={"epsilons": str(list(epsilons))})

        profiles = [EntropyService.sep_profile(system, seq, eps, k_max) for eps in epsilons]
        per_epsilon: Dict[str, float] = {str(p.epsilon): p.slope for p in profiles}
        value = max(p.slope for p in profiles)
        logger.info(f"Sequence entropy estimate for {system.kind}: {value:.6f} ({profiles[0].method})")
        return EntropyEstimate(
            value=value,
            method=profiles[0].method,
            k_max=k_max,
            per_epsilon=per_epsilon,
            profiles=profiles,
        )

    @staticmethod
    def profile_rows(profile: SepProfile) -> List[List[float]]:
        return [[k, c, log(c)] for k, c in zip(profile.ks, profile.counts)]

    @staticmethod
    def profile_csv(profile: SepProfile) -> str:
        """CSV with columns k, sep, log_sep"""
        return rows_to_csv(["k", "sep", "log_sep"], EntropyService.profile_rows(profile))


__all__ = ["EntropyService"]
