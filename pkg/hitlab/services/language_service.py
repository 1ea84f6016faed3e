"""
Language Service Module

Admissible-word languages of the supported subshifts. Every question the other
services ask about a subshift X reduces to one of these:

- is a word admissible (is the cylinder C[w] nonempty)?
- can u be followed, after a filler of a given length, by v?
- which positions p admit two different symbols over C[u] (``free`` positions)?
- how many distinct labelings of a finite position set are realized by points of X?

The full shift answers in closed form, subshifts of finite type through a transfer
graph built with networkx (pruned to states that start an infinite path), and
difference-set subshifts through the zero-fill rule: inserting 1s only adds pair
constraints, so zeros are always the least constrained filler.
"""

from abc import ABC, abstractmethod
from collections import defaultdict
from functools import lru_cache
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

import networkx as nx

from ..schemas.system import SFT, DiffSetSubshift, FullShift, SystemSpec
from ..utils.exceptions import NotASubshift
from ..utils.logger import logger
from .construction_service import p_contains


class WordLanguage(ABC):
    """Language of a one-sided subshift over ``alphabet``"""

    alphabet: str

    def over_alphabet(self, word: str) -> bool:
        return all(a in self.alphabet for a in word)

    @abstractmethod
    def admissible(self, word: str) -> bool:
        ...

    @abstractmethod
    def join_gaps(self, u: str, v: str, max_gap: int) -> List[bool]:
        """Entry g says whether u f v is admissible for some filler f with |f| = g"""

    @abstractmethod
    def free_positions(self, u: str, limit: int) -> List[bool]:
        """Entry p says whether position p carries two different symbols over C[u]"""

    @abstractmethod
    def count_patterns(self, positions: Sequence[int]) -> int:
        """Number of distinct restrictions x|positions over points x of X"""

    def joinable(self, u: str, gap: int, v: str) -> bool:
        return self.join_gaps(u, v, gap)[gap]

    def extension(self, u: str) -> Optional[Tuple[str, str]]:
        """(preperiod, period) of an eventually periodic point in C[u], None if C[u] is empty"""
        if not self.admissible(u):
            return None
        return u, self.alphabet[0]

    def words(self, length: int) -> List[str]:
        """All admissible words of the given length in lexicographic order"""
        out: List[str] = []

        def extend(prefix: str) -> None:
            if len(prefix) == length:
                out.append(prefix)
                return
            for a in self.alphabet:
                w = prefix + a
                if self.admissible(w):
                    extend(w)

        extend("")
        return out


class FullShiftLanguage(WordLanguage):
    def __init__(self, alphabet: str):
        self.alphabet = alphabet

    def admissible(self, word: str) -> bool:
        return self.over_alphabet(word)

    def join_gaps(self, u: str, v: str, max_gap: int) -> List[bool]:
        ok = self.admissible(u) and self.admissible(v)
        return [ok] * (max_gap + 1)

    def free_positions(self, u: str, limit: int) -> List[bool]:
        return [p >= len(u) for p in range(limit)]

    def count_patterns(self, positions: Sequence[int]) -> int:
        return len(self.alphabet) ** len(set(positions))


class SFTLanguage(WordLanguage):
    """Transfer-graph language of a subshift of finite type

    States are the last (m - 1) symbols read, m the longest forbidden word; shorter
    states exist only at the start. Only essential states (those from which an
    infinite path leaves) are kept, so a word is admissible exactly when it can be
    read from the empty state.
    """

    def __init__(self, alphabet: str, forbidden: Iterable[str]):
        self.alphabet = alphabet
        self.forbidden = tuple(forbidden)
        self.memory = max(len(f) for f in self.forbidden) - 1
        self.graph = nx.DiGraph()
        self._delta: Dict[str, Dict[str, str]] = defaultdict(dict)
        self._build()

    def _bad(self, word: str) -> bool:
        return any(word.endswith(f) for f in self.forbidden)

    def _build(self) -> None:
        k = self.memory
        raw: Dict[str, Dict[str, str]] = defaultdict(dict)
        self.graph.add_node("")
        frontier = [""]
        seen = {""}
        while frontier:
            state = frontier.pop()
            for a in self.alphabet:
                word = state + a
                if self._bad(word):
                    continue
                nxt = word[-k:] if k else ""
                raw[state][a] = nxt
                self.graph.add_edge(state, nxt)
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)

        cyclic = set()
        for component in nx.strongly_connected_components(self.graph):
            node = next(iter(component))
            if len(component) > 1 or self.graph.has_edge(node, node):
                cyclic |= component
        essential = set(cyclic)
        for node in cyclic:
            essential |= nx.ancestors(self.graph, node)
        self.essential: FrozenSet[str] = frozenset(essential)
        for state in essential:
            for a, nxt in raw[state].items():
                if nxt in essential:
                    self._delta[state][a] = nxt
        logger.debug(f"SFT graph: {self.graph.number_of_nodes()} states, {len(self.essential)} essential")

    def read(self, state: str, word: str) -> Optional[str]:
        if state not in self.essential:
            return None
        for a in word:
            state = self._delta[state].get(a)
            if state is None:
                return None
        return state

    def step(self, states: FrozenSet[str]) -> FrozenSet[str]:
        return frozenset(nxt for s in states for nxt in self._delta[s].values())

    def symbols_out(self, states: FrozenSet[str]) -> Set[str]:
        return {a for s in states for a in self._delta[s]}

    def admissible(self, word: str) -> bool:
        return self.read("", word) is not None

    def extension(self, u: str) -> Optional[Tuple[str, str]]:
        state = self.read("", u)
        if state is None:
            return None
        path = ""
        seen: Dict[str, int] = {}
        while state not in seen:
            seen[state] = len(path)
            a = min(self._delta[state])
            path += a
            state = self._delta[state][a]
        i = seen[state]
        return u + path[:i], path[i:]

    def join_gaps(self, u: str, v: str, max_gap: int) -> List[bool]:
        start = self.read("", u)
        if start is None:
            return [False] * (max_gap + 1)
        good = frozenset(s for s in self.essential if self.read(s, v) is not None)
        states = frozenset({start})
        out = []
        for _ in range(max_gap + 1):
            out.append(bool(states & good))
            states = self.step(states)
        return out

    def free_positions(self, u: str, limit: int) -> List[bool]:
        out = [False] * limit
        start = self.read("", u)
        if start is None:
            return out
        states = frozenset({start})
        for p in range(len(u), limit):
            out[p] = len(self.symbols_out(states)) >= 2
            states = self.step(states)
        return out

    def count_patterns(self, positions: Sequence[int]) -> int:
        labeled = set(positions)
        if not labeled:
            return 1
        layer: Dict[FrozenSet[str], int] = {frozenset({""}): 1}
        for p in range(max(labeled) + 1):
            nxt_layer: Dict[FrozenSet[str], int] = defaultdict(int)
            for states, count in layer.items():
                if p in labeled:
                    for a in self.alphabet:
                        moved = frozenset(self._delta[s][a] for s in states if a in self._delta[s])
                        if moved:
                            nxt_layer[moved] += count
                else:
                    nxt_layer[self.step(states)] += count
            layer = nxt_layer
        return sum(layer.values())


class DiffSetLanguage(WordLanguage):
    """Lambda_P: every two 1-positions differ by an element of P"""

    alphabet = "01"

    def __init__(self, system: DiffSetSubshift):
        self.system = system
        self.p = system.p

    def in_p(self, n: int) -> bool:
        return p_contains(self.p, n)

    @staticmethod
    def ones(word: str) -> List[int]:
        return [i for i, a in enumerate(word) if a == "1"]

    def ones_admissible(self, ones: Sequence[int]) -> bool:
        for j in range(1, len(ones)):
            for i in range(j):
                if not self.in_p(ones[j] - ones[i]):
                    return False
        return True

    def admissible(self, word: str) -> bool:
        return self.over_alphabet(word) and self.ones_admissible(self.ones(word))

    def join_gaps(self, u: str, v: str, max_gap: int) -> List[bool]:
        if not (self.admissible(u) and self.admissible(v)):
            return [False] * (max_gap + 1)
        a_ones, b_ones = self.ones(u), self.ones(v)
        out = []
        for g in range(max_gap + 1):
            shift = len(u) + g
            out.append(all(self.in_p(shift + b - a) for a in a_ones for b in b_ones))
        return out

    def free_positions(self, u: str, limit: int) -> List[bool]:
        out = [False] * limit
        if not self.admissible(u):
            return out
        a_ones = self.ones(u)
        for p in range(len(u), limit):
            out[p] = all(self.in_p(p - a) for a in a_ones)
        return out

    def count_patterns(self, positions: Sequence[int]) -> int:
        ordered = sorted(set(positions))
        total = 0
        stack = [(0, ())]
        while stack:
            i, chosen = stack.pop()
            if i == len(ordered):
                total += 1
                continue
            stack.append((i + 1, chosen))
            p = ordered[i]
            if all(self.in_p(p - q) for q in chosen):
                stack.append((i + 1, chosen + (p,)))
        return total


class LanguageService:
    @staticmethod
    @lru_cache(maxsize=64)
    def for_system(system: SystemSpec) -> WordLanguage:
        if isinstance(system, FullShift):
            return FullShiftLanguage(system.alphabet)
        if isinstance(system, SFT):
            return SFTLanguage(system.alphabet, system.forbidden)
        if isinstance(system, DiffSetSubshift):
            return DiffSetLanguage(system)
        raise NotASubshift(f"{system.kind} has no word language", {"kind": system.kind})


__all__ = ["WordLanguage", "FullShiftLanguage", "SFTLanguage", "DiffSetLanguage", "LanguageService"]
