"""
System Service Module

This module provides exact evaluation of orbits, distances and cell geometry for
every supported system kind.
"""

from bisect import bisect_left
from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import floor, lcm
from typing import List, Optional, Tuple

from ..config.settings import get_settings
from ..schemas.system import (
    SUBSHIFT_KINDS,
    BoxCell,
    Cell,
    Contraction,
    DiffSetSubshift,
    EventuallyPeriodic,
    NewpropSource,
    PointSpec,
    Product,
    ProductCell,
    ProductPoint,
    PrefixStream,
    Rotation,
    SkewProduct,
    SparseOnesSource,
    SystemSpec,
    TorusPoint,
    Wedge,
    WedgeCell,
    WedgePoint,
    WordCell,
    WordSource,
)
from ..utils.exceptions import (
    BadDelta,
    BudgetExceeded,
    DenominatorOverflow,
    DepthLimitExceeded,
    InadmissibleCell,
    InvalidSystemError,
    PrefixExhausted,
    SideMismatch,
    Undecidable,
)
from ..utils.intervals import circle_distance, sup_circle_norm
from ..utils.logger import logger
from .construction_service import ConstructionService
from .language_service import LanguageService, WordLanguage

Bounds = Tuple[Fraction, Fraction]

_CHUNK = 4096


def normalize_periodic(preperiod: str, period: str) -> EventuallyPeriodic:
    """Canonical representation: primitive period, shortest preperiod"""
    size = len(period)
    for d in range(1, size + 1):
        if size % d == 0 and period[:d] * (size // d) == period:
            period = period[:d]
            break
    while preperiod and preperiod[-1] == period[-1]:
        period = period[-1] + period[:-1]
        preperiod = preperiod[:-1]
    return EventuallyPeriodic(preperiod=preperiod, period=period)


def _periodic_window(preperiod: str, period: str, start: int, length: int) -> str:
    out = preperiod[start : start + length]
    need = length - len(out)
    if need > 0:
        k = (max(start, len(preperiod)) - len(preperiod)) % len(period)
        rotated = period[k:] + period[:k]
        out += (rotated * (need // len(period) + 1))[:need]
    return out


@lru_cache(maxsize=16)
def _sparse(source: NewpropSource) -> SparseOnesSource:
    bundle = ConstructionService.newprop_bundle(source.base, source.marker_length)
    return SparseOnesSource(ones=tuple(ConstructionService.newprop_ones(bundle, source.length)), length=source.length)


def _dimension(system: SystemSpec) -> int:
    return 2 if isinstance(system, SkewProduct) else 1


class SystemService:
    """
    Exact dynamics on finitely presented systems.

    Provides:
    - symbol access and orbit evaluation T^n x
    - the metric of every system kind
    - cell families, membership and canonical points
    - exact (or certified) bounds on diam T^n(C) and on sup_{y in C} d(T^n x, T^n y)
    """

    # -- classification ----------------------------------------------------

    @staticmethod
    def is_subshift(system: SystemSpec) -> bool:
        return system.kind in SUBSHIFT_KINDS

    @staticmethod
    def language(system: SystemSpec) -> WordLanguage:
        return LanguageService.for_system(system)

    @staticmethod
    def separation_length(delta) -> int:
        """Largest j with 2^-j > delta; separation above delta is decided by windows of length j + 1"""
        delta = Fraction(delta)
        if not 0 < delta < 1:
            raise BadDelta(f"delta must lie in (0, 1), got {delta}", {"delta": float(delta)})
        j = 0
        while Fraction(1, 2 ** (j + 1)) > delta:
            j += 1
        return j

    # -- symbols -----------------------------------------------------------

    @staticmethod
    def available(x: PointSpec) -> Optional[int]:
        """Number of known symbols, None for infinitely many"""
        if isinstance(x, PrefixStream):
            return x.available
        if isinstance(x, EventuallyPeriodic):
            return None
        raise InvalidSystemError(f"{x.kind} point has no symbol sequence", {"kind": x.kind})

    @staticmethod
    def window(x: PointSpec, start: int, length: int) -> str:
        """Symbols x[start : start + length]"""
        if isinstance(x, EventuallyPeriodic):
            return _periodic_window(x.preperiod, x.period, start, length)
        if not isinstance(x, PrefixStream):
            raise InvalidSystemError(f"{x.kind} point has no symbol sequence", {"kind": x.kind})
        if start + length > x.available:
            raise PrefixExhausted(
                f"Need {start + length} symbols, prefix has {x.available}",
                {"requested": start + length, "available": x.available},
            )
        source = x.source
        if isinstance(source, WordSource):
            return source.symbols[start : start + length]
        if isinstance(source, NewpropSource):
            source = _sparse(source)
        chars = ["0"] * length
        ones = source.ones
        for i in range(bisect_left(ones, start), bisect_left(ones, start + length)):
            chars[ones[i] - start] = "1"
        return "".join(chars)

    @staticmethod
    def prefix(x: PointSpec, length: int) -> str:
        return SystemService.window(x, 0, length)

    @staticmethod
    def symbol_at(x: PointSpec, i: int) -> str:
        return SystemService.window(x, i, 1)

    # -- evaluation --------------------------------------------------------

    @staticmethod
    def _check_denominators(values: Tuple[Fraction, ...]) -> None:
        limit = get_settings().denominator_limit
        for v in values:
            if v.denominator > limit:
                raise DenominatorOverflow("Exact orbit denominator exceeds the configured limit", {"limit_bits": limit.bit_length()})

    @staticmethod
    def _shift(x: PointSpec, n: int) -> PointSpec:
        if isinstance(x, EventuallyPeriodic):
            pre, per = x.preperiod, x.period
            if n <= len(pre):
                return normalize_periodic(pre[n:], per)
            k = (n - len(pre)) % len(per)
            return normalize_periodic("", per[k:] + per[:k])
        if not isinstance(x, PrefixStream):
            raise InvalidSystemError(f"{x.kind} point does not live in a subshift", {"kind": x.kind})
        if n > x.available:
            raise PrefixExhausted(f"Cannot shift by {n}, prefix has {x.available}", {"n": n, "available": x.available})
        source = x.source
        if isinstance(source, WordSource):
            return PrefixStream(source=WordSource(symbols=source.symbols[n:]))
        if isinstance(source, NewpropSource):
            source = _sparse(source)
        ones = tuple(p - n for p in source.ones[bisect_left(source.ones, n) :])
        return PrefixStream(source=SparseOnesSource(ones=ones, length=source.length - n))

    @staticmethod
    def _coords(system: SystemSpec, x: PointSpec) -> Tuple[Fraction, ...]:
        if not isinstance(x, TorusPoint) or len(x.coords) != _dimension(system):
            raise InvalidSystemError(f"{system.kind} needs a {_dimension(system)}-coordinate torus point", {"point": x.kind})
        return x.coords

    @staticmethod
    def evaluate(system: SystemSpec, x: PointSpec, n: int) -> PointSpec:
        """T^n x, exact"""
        if n < 0:
            raise InvalidSystemError("Iterates are only defined for n >= 0", {"n": n})
        if SystemService.is_subshift(system):
            return SystemService._shift(x, n)
        if isinstance(system, Rotation):
            (a,) = SystemService._coords(system, x)
            out = ((a + n * system.alpha) % 1,)
        elif isinstance(system, SkewProduct):
            a, b = SystemService._coords(system, x)
            alpha = system.alpha
            out = ((a + n * alpha) % 1, (b + n * a + Fraction(n * (n - 1), 2) * alpha) % 1)
        elif isinstance(system, Contraction):
            (a,) = SystemService._coords(system, x)
            out = (system.factor**n * a,)
        elif isinstance(system, Wedge):
            if not isinstance(x, WedgePoint):
                raise SideMismatch("Wedge systems evaluate wedge points only", {"point": x.kind})
            side = x.side if n % 2 == 0 else ("right" if x.side == "left" else "left")
            return WedgePoint(side=side, inner=SystemService.evaluate(system.left, x.inner, n))
        elif isinstance(system, Product):
            if not isinstance(x, ProductPoint):
                raise InvalidSystemError("Product systems evaluate product points only", {"point": x.kind})
            return ProductPoint(
                left=SystemService.evaluate(system.left, x.left, n),
                right=SystemService.evaluate(system.right, x.right, n),
            )
        else:
            raise InvalidSystemError(f"Unsupported system {system.kind}")
        SystemService._check_denominators(out)
        return TorusPoint(coords=out)

    # -- metric ------------------------------------------------------------

    @staticmethod
    def first_disagreement(p: PointSpec, q: PointSpec) -> Optional[int]:
        """Smallest index where p and q differ, None if they are equal"""
        lp, lq = SystemService.available(p), SystemService.available(q)
        if lp is None and lq is None:
            limit = max(len(p.preperiod), len(q.preperiod)) + lcm(len(p.period), len(q.period))
        else:
            limit = min(v for v in (lp, lq) if v is not None)
        for start in range(0, limit, _CHUNK):
            size = min(_CHUNK, limit - start)
            a, b = SystemService.window(p, start, size), SystemService.window(q, start, size)
            if a != b:
                return start + next(i for i in range(size) if a[i] != b[i])
        if (lp is None and lq is None) or p == q:
            return None
        raise Undecidable(
            "Points agree on every available symbol",
            {"compared": limit},
        )

    @staticmethod
    def distance(system: SystemSpec, p: PointSpec, q: PointSpec) -> Fraction:
        if SystemService.is_subshift(system):
            j = SystemService.first_disagreement(p, q)
            return Fraction(0) if j is None else Fraction(1, 2**j)
        if isinstance(system, Rotation):
            return circle_distance(SystemService._coords(system, p)[0], SystemService._coords(system, q)[0])
        if isinstance(system, SkewProduct):
            a, b = SystemService._coords(system, p), SystemService._coords(system, q)
            return max(circle_distance(a[0], b[0]), circle_distance(a[1], b[1]))
        if isinstance(system, Contraction):
            return abs(SystemService._coords(system, p)[0] - SystemService._coords(system, q)[0])
        if isinstance(system, Wedge):
            if not (isinstance(p, WedgePoint) and isinstance(q, WedgePoint)):
                raise SideMismatch("Wedge distances need wedge points")
            inner = system.left
            if p.side == q.side:
                return SystemService.distance(inner, p.inner, q.inner)
            glue = system.left_fixed
            return SystemService.distance(inner, p.inner, glue) + SystemService.distance(inner, glue, q.inner)
        if isinstance(system, Product):
            return max(
                SystemService.distance(system.left, p.left, q.left),
                SystemService.distance(system.right, p.right, q.right),
            )
        raise InvalidSystemError(f"Unsupported system {system.kind}")

    # -- validation --------------------------------------------------------

    @staticmethod
    def validate_system(system: SystemSpec) -> SystemSpec:
        if SystemService.is_subshift(system):
            if SystemService.language(system).extension("") is None:
                raise InvalidSystemError(f"{system.kind} has no points", {"kind": system.kind})
        elif isinstance(system, Wedge):
            if system.left != system.right or system.left_fixed != system.right_fixed:
                raise InvalidSystemError("Wedge sides must be the same system glued at the same point")
            SystemService.validate_system(system.left)
            glue = system.left_fixed
            SystemService.validate_point(system.left, glue)
            if SystemService.distance(system.left, SystemService.evaluate(system.left, glue, 1), glue) != 0:
                raise InvalidSystemError("Wedge glue point is not a fixed point", {"glue": glue.model_dump(mode="json")})
        elif isinstance(system, Product):
            SystemService.validate_system(system.left)
            SystemService.validate_system(system.right)
        return system

    @staticmethod
    def validate_point(system: SystemSpec, x: PointSpec) -> PointSpec:
        if SystemService.is_subshift(system):
            lang = SystemService.language(system)
            if isinstance(x, EventuallyPeriodic):
                word = x.preperiod + x.period * 2
                if not lang.admissible(word):
                    raise InvalidSystemError("Eventually periodic point is not admissible", {"word": word})
            elif isinstance(x, PrefixStream):
                source = x.source
                if isinstance(source, WordSource):
                    if not lang.admissible(source.symbols):
                        raise InvalidSystemError("Prefix is not admissible")
                elif not {"0", "1"} <= set(system.alphabet):
                    raise InvalidSystemError("Sparse prefixes need the symbols 0 and 1")
                elif isinstance(system, DiffSetSubshift) and isinstance(source, SparseOnesSource):
                    if not lang.ones_admissible(source.ones):
                        raise InvalidSystemError("Prefix is not admissible")
            else:
                raise InvalidSystemError(f"{x.kind} point does not live in a subshift", {"kind": x.kind})
        elif isinstance(system, Wedge):
            if not isinstance(x, WedgePoint):
                raise SideMismatch("Wedge systems need wedge points", {"point": x.kind})
            SystemService.validate_point(system.left, x.inner)
        elif isinstance(system, Product):
            if not isinstance(x, ProductPoint):
                raise InvalidSystemError("Product systems need product points", {"point": x.kind})
            SystemService.validate_point(system.left, x.left)
            SystemService.validate_point(system.right, x.right)
        else:
            SystemService._coords(system, x)
        return x

    @staticmethod
    def validate_cell(system: SystemSpec, cell: Cell) -> Cell:
        if SystemService.is_subshift(system):
            if not isinstance(cell, WordCell) or not SystemService.language(system).admissible(cell.word):
                raise InadmissibleCell("Cylinder is empty", {"cell": cell.model_dump(mode="json")})
        elif isinstance(system, Wedge):
            if not isinstance(cell, WedgeCell):
                raise InadmissibleCell("Wedge systems need wedge cells", {"cell": cell.kind})
            SystemService.validate_cell(system.left, cell.inner)
        elif isinstance(system, Product):
            if not isinstance(cell, ProductCell):
                raise InadmissibleCell("Product systems need product cells", {"cell": cell.kind})
            SystemService.validate_cell(system.left, cell.left)
            SystemService.validate_cell(system.right, cell.right)
        elif not isinstance(cell, BoxCell) or len(cell.corner) != _dimension(system):
            raise InadmissibleCell(f"{system.kind} needs {_dimension(system)}-dimensional boxes", {"cell": cell.kind})
        return cell

    # -- cells -------------------------------------------------------------

    @staticmethod
    def family_size(system: SystemSpec, depth: int) -> int:
        if SystemService.is_subshift(system):
            return len(SystemService.language(system).words(depth))
        if isinstance(system, Wedge):
            return 2 * SystemService.family_size(system.left, depth)
        if isinstance(system, Product):
            return SystemService.family_size(system.left, depth) * SystemService.family_size(system.right, depth)
        return 2 ** (depth * _dimension(system))

    @staticmethod
    def cell_family(system: SystemSpec, depth: int) -> List[Cell]:
        """All depth-cells in lexicographic order"""
        settings = get_settings()
        if depth < 1:
            raise InvalidSystemError("Cell depth must be positive", {"depth": depth})
        if depth > settings.max_depth:
            raise DepthLimitExceeded(f"Depth {depth} exceeds max_depth={settings.max_depth}", {"depth": depth})
        if not SystemService.is_subshift(system) and SystemService.family_size(system, depth) > settings.max_cells:
            raise BudgetExceeded("Cell family exceeds max_cells", {"depth": depth, "max_cells": settings.max_cells})

        if SystemService.is_subshift(system):
            cells: List[Cell] = [WordCell(word=w) for w in SystemService.language(system).words(depth)]
        elif isinstance(system, Wedge):
            inner = SystemService.cell_family(system.left, depth)
            cells = [WedgeCell(side=side, inner=c) for side in ("left", "right") for c in inner]
        elif isinstance(system, Product):
            cells = [
                ProductCell(left=a, right=b)
                for a, b in product(SystemService.cell_family(system.left, depth), SystemService.cell_family(system.right, depth))
            ]
        else:
            cells = [
                BoxCell(resolution=depth, corner=corner)
                for corner in product(range(2**depth), repeat=_dimension(system))
            ]
        if len(cells) > settings.max_cells:
            raise BudgetExceeded("Cell family exceeds max_cells", {"depth": depth, "max_cells": settings.max_cells})
        logger.debug(f"cell_family({system.kind}, depth={depth}): {len(cells)} cells")
        return cells

    @staticmethod
    def cell_of(system: SystemSpec, x: PointSpec, depth: int) -> Cell:
        if SystemService.is_subshift(system):
            return WordCell(word=SystemService.prefix(x, depth))
        if isinstance(system, Wedge):
            return WedgeCell(side=x.side, inner=SystemService.cell_of(system.left, x.inner, depth))
        if isinstance(system, Product):
            return ProductCell(
                left=SystemService.cell_of(system.left, x.left, depth),
                right=SystemService.cell_of(system.right, x.right, depth),
            )
        coords = SystemService._coords(system, x)
        return BoxCell(resolution=depth, corner=tuple(floor(c * 2**depth) for c in coords))

    @staticmethod
    def contains(system: SystemSpec, cell: Cell, x: PointSpec) -> bool:
        if SystemService.is_subshift(system):
            return SystemService.window(x, 0, len(cell.word)) == cell.word
        if isinstance(system, Wedge):
            if cell.side == x.side:
                return SystemService.contains(system.left, cell.inner, x.inner)
            glue = system.left_fixed
            return (
                SystemService.distance(system.left, x.inner, glue) == 0
                and SystemService.contains(system.left, cell.inner, glue)
            )
        if isinstance(system, Product):
            return SystemService.contains(system.left, cell.left, x.left) and SystemService.contains(
                system.right, cell.right, x.right
            )
        coords = SystemService._coords(system, x)
        return all(floor(c * 2**cell.resolution) == k for c, k in zip(coords, cell.corner))

    @staticmethod
    def canonical_point(system: SystemSpec, cell: Cell) -> PointSpec:
        """A fixed, exactly representable point of the cell"""
        if SystemService.is_subshift(system):
            found = SystemService.language(system).extension(cell.word)
            if found is None:
                raise InadmissibleCell("Cylinder is empty", {"word": cell.word})
            return normalize_periodic(*found)
        if isinstance(system, Wedge):
            return WedgePoint(side=cell.side, inner=SystemService.canonical_point(system.left, cell.inner))
        if isinstance(system, Product):
            return ProductPoint(
                left=SystemService.canonical_point(system.left, cell.left),
                right=SystemService.canonical_point(system.right, cell.right),
            )
        return TorusPoint(coords=tuple(cell.lower(i) for i in range(len(cell.corner))))

    # -- geometry ----------------------------------------------------------

    @staticmethod
    def diameter_profile(system: SystemSpec, cell: Cell, horizon: int) -> List[Bounds]:
        """Bounds on diam T^n(cell) for n = 0..horizon"""
        if SystemService.is_subshift(system):
            reach = get_settings().image_max_offset
            free = SystemService.language(system).free_positions(cell.word, horizon + reach + 1)
            out: List[Bounds] = []
            nxt = None
            next_free = [None] * len(free)
            for p in range(len(free) - 1, -1, -1):
                if free[p]:
                    nxt = p
                next_free[p] = nxt
            for n in range(horizon + 1):
                p = next_free[n]
                if p is not None and p - n <= reach:
                    value = Fraction(1, 2 ** (p - n))
                    out.append((value, value))
                else:
                    out.append((Fraction(0), Fraction(1, 2 ** (reach + 1))))
            return out
        if isinstance(system, Wedge):
            return SystemService.diameter_profile(system.left, cell.inner, horizon)
        if isinstance(system, Product):
            left = SystemService.diameter_profile(system.left, cell.left, horizon)
            right = SystemService.diameter_profile(system.right, cell.right, horizon)
            return [(max(a[0], b[0]), max(a[1], b[1])) for a, b in zip(left, right)]
        return [SystemService.image_diameter_bounds(system, cell, n) for n in range(horizon + 1)]

    @staticmethod
    def image_diameter_bounds(system: SystemSpec, cell: Cell, n: int) -> Bounds:
        """lower <= diam T^n(cell) <= upper"""
        if SystemService.is_subshift(system) or isinstance(system, (Wedge, Product)):
            return SystemService.diameter_profile(system, cell, n)[n]
        h = cell.side
        if isinstance(system, Rotation):
            value = min(h, Fraction(1, 2))
        elif isinstance(system, SkewProduct):
            value = sup_circle_norm(-(n + 1) * h, (n + 1) * h)
        elif isinstance(system, Contraction):
            value = system.factor**n * h
        else:
            raise InvalidSystemError(f"Unsupported system {system.kind}")
        return value, value

    @staticmethod
    def cell_diameter(system: SystemSpec, cell: Cell) -> Fraction:
        return SystemService.image_diameter_bounds(system, cell, 0)[1]

    @staticmethod
    def point_spread(system: SystemSpec, x: PointSpec, cell: Cell, n: int) -> Bounds:
        """Bounds on sup over y in cell of d(T^n x, T^n y), for x in cell"""
        if SystemService.is_subshift(system):
            return SystemService.image_diameter_bounds(system, cell, n)
        if isinstance(system, Wedge):
            return SystemService.point_spread(system.left, x.inner, cell.inner, n)
        if isinstance(system, Product):
            a = SystemService.point_spread(system.left, x.left, cell.left, n)
            b = SystemService.point_spread(system.right, x.right, cell.right, n)
            return max(a[0], b[0]), max(a[1], b[1])
        coords = SystemService._coords(system, x)
        h = cell.side
        lows = [cell.lower(i) - c for i, c in enumerate(coords)]
        if isinstance(system, Rotation):
            value = sup_circle_norm(lows[0], lows[0] + h)
        elif isinstance(system, Contraction):
            value = system.factor**n * max(-lows[0], lows[0] + h)
        else:
            dx_lo, dy_lo = lows
            value = max(
                sup_circle_norm(dx_lo, dx_lo + h),
                sup_circle_norm(dy_lo + n * dx_lo, dy_lo + h + n * (dx_lo + h)),
            )
        return value, value

    @staticmethod
    def spread_profile(system: SystemSpec, x: PointSpec, cell: Cell, horizon: int) -> List[Bounds]:
        if SystemService.is_subshift(system):
            return SystemService.diameter_profile(system, cell, horizon)
        if isinstance(system, Wedge):
            return SystemService.spread_profile(system.left, x.inner, cell.inner, horizon)
        return [SystemService.point_spread(system, x, cell, n) for n in range(horizon + 1)]


__all__ = ["SystemService", "normalize_periodic", "Bounds"]
