"""Brute-force ground truth on explicit cylinder graphs.

Vertex v_ij (row i, column j) has linear index i + n*j, so column j occupies
indices n*j .. n*j + n - 1. Vertex sets are bitmasks over these indices; the
public helpers also accept iterables of (i, j) pairs or flag sequences.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

from .errors import ResourceLimitError
from .words import CyclicWord, as_word, can_follow, is_initial, is_suitable

DEFAULT_BUDGET = 16


@dataclass(frozen=True)
class CylinderGraph:
    n: int
    m: int
    adjacency: tuple[tuple[int, ...], ...]

    @property
    def order(self) -> int:
        return self.n * self.m

    def index(self, i: int, j: int) -> int:
        return i % self.n + self.n * j

    def coords(self, v: int) -> tuple[int, int]:
        return v % self.n, v // self.n

    def edges(self) -> set[tuple[int, int]]:
        return {(u, v) for u, nbrs in enumerate(self.adjacency) for v in nbrs if u < v}

    def column(self, j: int) -> range:
        return range(self.n * j, self.n * (j + 1))

    def mask(self, vertices: Iterable) -> int:
        """Bitmask from (i, j) pairs or linear indices."""
        out = 0
        for v in vertices:
            if isinstance(v, tuple):
                v = self.index(*v)
            out |= 1 << v
        return out

    def flags(self, mask: int) -> list[bool]:
        return [bool(mask >> v & 1) for v in range(self.order)]

    def format_set(self, mask: int) -> str:
        """Diagnostic text form: ``i,j`` pairs joined by spaces."""
        return " ".join(f"{i},{j}" for i, j in map(self.coords, _bits(mask)))


def _bits(mask: int) -> Iterable[int]:
    v = 0
    while mask:
        if mask & 1:
            yield v
        mask >>= 1
        v += 1


def build_cylinder(n: int, m: int) -> CylinderGraph:
    if n < 3 or m < 2:
        raise ValueError(f"need n >= 3 and m >= 2, got n={n}, m={m}")
    adj = []
    for j in range(m):
        for i in range(n):
            nbrs = [(i - 1) % n + n * j, (i + 1) % n + n * j]
            if j > 0:
                nbrs.append(i + n * (j - 1))
            if j < m - 1:
                nbrs.append(i + n * (j + 1))
            adj.append(tuple(sorted(nbrs)))
    return CylinderGraph(n, m, tuple(adj))


def _to_mask(g: CylinderGraph, s) -> int:
    if isinstance(s, int):
        return s
    s = list(s)
    if len(s) == g.order and all(isinstance(x, bool) for x in s):
        return sum(1 << v for v, x in enumerate(s) if x)
    return g.mask(s)


def _neighbour_masks(g: CylinderGraph) -> list[int]:
    return [sum(1 << u for u in nbrs) for nbrs in g.adjacency]


def is_2_dominating(g: CylinderGraph, s) -> bool:
    mask = _to_mask(g, s)
    for v, nm in enumerate(_neighbour_masks(g)):
        if not mask >> v & 1 and (nm & mask).bit_count() < 2:
            return False
    return True


def is_quasi_2_dominating(g: CylinderGraph, r) -> bool:
    """Like 2-domination, but outside vertices in the last column need only one neighbour."""
    mask = _to_mask(g, r)
    last = g.n * (g.m - 1)
    for v, nm in enumerate(_neighbour_masks(g)):
        if mask >> v & 1:
            continue
        need = 1 if v >= last else 2
        if (nm & mask).bit_count() < need:
            return False
    return True


def brute_minimum_set(n: int, m: int, budget: int = DEFAULT_BUDGET) -> int:
    """A minimum 2-dominating set of C_n x P_m as a bitmask, by exhaustive search.

    Subsets are tried in order of increasing size, so the first hit is minimum.
    """
    if n * m > budget:
        raise ResourceLimitError(f"n*m = {n * m} vertices exceeds the brute-force budget of {budget}")
    g = build_cylinder(n, m)
    nbr = _neighbour_masks(g)
    full = (1 << g.order) - 1
    for k in range(g.order + 1):
        for combo in combinations(range(g.order), k):
            mask = 0
            for v in combo:
                mask |= 1 << v
            outside = full & ~mask
            ok = True
            while outside:
                low = outside & -outside
                v = low.bit_length() - 1
                if (nbr[v] & mask).bit_count() < 2:
                    ok = False
                    break
                outside ^= low
            if ok:
                return mask
    raise AssertionError("the full vertex set is always 2-dominating")


def brute_gamma2(n: int, m: int, budget: int = DEFAULT_BUDGET) -> int:
    return brute_minimum_set(n, m, budget).bit_count()


def word_list_decode(words: Sequence) -> tuple[list[bool], list[list[int]]]:
    """Vertex flags (label 0 means "in the set") and the labels, column by column."""
    words = [as_word(w) for w in words]
    if not words:
        raise ValueError("need at least one word")
    n = words[0].n
    if any(w.n != n for w in words):
        raise ValueError("all words must have the same length")
    labels = [list(w.trits) for w in words]
    flags = [t == 0 for col in labels for t in col]
    return flags, labels


def word_list_validate(words: Sequence, strict: bool = False) -> bool:
    words = [as_word(w) for w in words]
    if not words or any(w.n != words[0].n for w in words):
        return False
    if not all(is_suitable(w) for w in words):
        return False
    if not is_initial(words[0], strict=strict):
        return False
    return all(can_follow(nxt, prev) for prev, nxt in zip(words, words[1:]))


def labels_from_set(g: CylinderGraph, r) -> list[CyclicWord] | None:
    """Label each column of `r`: 0 in r, 1 with >= 2 r-neighbours in its own or
    the previous column, 2 with exactly one. Returns None if some vertex
    outside r has no such neighbour, since no label applies then.
    """
    mask = _to_mask(g, r)
    n = g.n
    columns = []
    for j in range(g.m):
        col = []
        for i in range(n):
            v = g.index(i, j)
            if mask >> v & 1:
                col.append(0)
                continue
            near = [g.index(i - 1, j), g.index(i + 1, j)]
            if j > 0:
                near.append(g.index(i, j - 1))
            hits = sum(mask >> u & 1 for u in near)
            if hits == 0:
                return None
            col.append(1 if hits >= 2 else 2)
        columns.append(CyclicWord(tuple(col)))
    return columns
