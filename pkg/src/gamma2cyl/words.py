"""Circular column words over {0, 1, 2} and the relations between them.

A column of the cylinder C_n x P_m is an n-cycle. Given a vertex set R, each
vertex gets a label: 0 if it is in R, 1 if it already has two R-neighbours in
its own or the previous column, 2 if it has exactly one. Reading the labels of
one column top to bottom gives a word of length n, and every pattern check
below looks at the circular window (w[i-1], w[i], w[i+1]) with indices mod n.

Words are ordered by their base-3 value with position 0 most significant.
That order fixes the row/column indices used by the transfer matrix, the
state vectors and the matrix cache file.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import ResourceLimitError

MAX_N = 15

# Forbidden windows, written left-to-right as (w[i-1], w[i], w[i+1]).
NOT_SUITABLE = ("111", "211", "112", "212", "020")
NOT_INITIAL = ("110", "011", "012", "210")
# A label-2 vertex in the first column must have exactly one in-column
# neighbour in the set; "222" leaves the middle vertex with none.
NOT_STRICT_INITIAL = ("222",)


def _window_code(text: str) -> int:
    a, b, c = (int(ch) for ch in text)
    return 9 * a + 3 * b + c


def _window_table(*forbidden: Iterable[str]) -> np.ndarray:
    ok = np.ones(27, dtype=bool)
    for group in forbidden:
        for text in group:
            ok[_window_code(text)] = False
    return ok


SUITABLE_WINDOW = _window_table(NOT_SUITABLE)
INITIAL_WINDOW = _window_table(NOT_SUITABLE, NOT_INITIAL)
STRICT_INITIAL_WINDOW = _window_table(NOT_SUITABLE, NOT_INITIAL, NOT_STRICT_INITIAL)


def _follow_ok(prev: int, left: int, mid: int, right: int) -> bool:
    # prev is q_i, (left, mid, right) is (p_{i-1}, p_i, p_{i+1})
    if prev == 0:
        return mid in (0, 1) or (left != 0 and right != 0)
    if prev == 1:
        if mid == 0:
            return True
        if mid == 1:
            return left == 0 and right == 0
        return left == 0 or right == 0
    return mid == 0


# FOLLOW_WINDOW[27 * q_i + window code of p around i]
FOLLOW_WINDOW = np.array(
    [_follow_ok(q, a, b, c) for q, a, b, c in product(range(3), repeat=4)],
    dtype=bool,
)


@dataclass(frozen=True)
class CyclicWord:
    trits: tuple[int, ...]

    def __post_init__(self) -> None:
        trits = tuple(int(t) for t in self.trits)
        if len(trits) < 3:
            raise ValueError(f"a cyclic word needs n >= 3 symbols, got {len(trits)}")
        if any(t not in (0, 1, 2) for t in trits):
            raise ValueError(f"symbols must be 0, 1 or 2: {trits}")
        object.__setattr__(self, "trits", trits)

    @classmethod
    def parse(cls, text: str) -> CyclicWord:
        text = text.strip()
        if not text or any(ch not in "012" for ch in text):
            raise ValueError(f"not a word over 0/1/2: {text!r}")
        return cls(tuple(int(ch) for ch in text))

    @classmethod
    def from_key(cls, key: int, n: int) -> CyclicWord:
        trits = []
        for _ in range(n):
            key, r = divmod(key, 3)
            trits.append(r)
        return cls(tuple(reversed(trits)))

    def __str__(self) -> str:
        return "".join(map(str, self.trits))

    def __len__(self) -> int:
        return len(self.trits)

    def __getitem__(self, i: int) -> int:
        return self.trits[i % len(self.trits)]

    @property
    def n(self) -> int:
        return len(self.trits)

    @property
    def key(self) -> int:
        k = 0
        for t in self.trits:
            k = 3 * k + t
        return k

    def windows(self) -> Iterator[int]:
        """Yield the code 9*w[i-1] + 3*w[i] + w[i+1] for i = 0..n-1."""
        w = self.trits
        n = len(w)
        for i in range(n):
            yield 9 * w[i - 1] + 3 * w[i] + w[(i + 1) % n]

    def rotate(self, k: int) -> CyclicWord:
        k %= self.n
        return CyclicWord(self.trits[k:] + self.trits[:k])


def as_word(w: CyclicWord | str | Sequence[int]) -> CyclicWord:
    if isinstance(w, CyclicWord):
        return w
    if isinstance(w, str):
        return CyclicWord.parse(w)
    return CyclicWord(tuple(w))


def is_suitable(w) -> bool:
    w = as_word(w)
    return all(SUITABLE_WINDOW[c] for c in w.windows())


def is_initial(w, strict: bool = False) -> bool:
    """Return True if `w` may label the first column.

    With ``strict=True`` words containing "222" are also rejected, since such
    a column cannot come from any set whose first-column 2s have exactly one
    in-column neighbour in the set.
    """
    w = as_word(w)
    table = STRICT_INITIAL_WINDOW if strict else INITIAL_WINDOW
    return all(table[c] for c in w.windows())


def is_final(w) -> bool:
    w = as_word(w)
    return is_suitable(w) and 2 not in w.trits


def weight(w) -> int:
    return as_word(w).trits.count(0)


def can_follow(p, q) -> bool:
    """Return True if column word `p` may come right after column word `q`."""
    p, q = as_word(p), as_word(q)
    if p.n != q.n:
        raise ValueError(f"word lengths differ: {p.n} != {q.n}")
    return all(FOLLOW_WINDOW[27 * qi + c] for qi, c in zip(q.trits, p.windows()))


def suitable_keys(n: int, window_ok: np.ndarray = SUITABLE_WINDOW) -> np.ndarray:
    """Sorted base-3 keys of all length-n circular words passing `window_ok`.

    Words are grown one position at a time; a window is checked as soon as its
    right end is placed, and the two windows that wrap around are checked once
    the word is complete.
    """
    keys = np.arange(9, dtype=np.int64)
    digits = np.arange(3, dtype=np.int64)
    for _ in range(3, n + 1):
        keys = (keys[:, None] * 3 + digits).ravel()
        keys = keys[window_ok[keys % 27]]
    first = keys // 3 ** (n - 1)
    second = (keys // 3 ** (n - 2)) % 3
    wrap_last = (keys % 9) * 3 + first
    wrap_first = (keys % 3) * 9 + first * 3 + second
    return keys[window_ok[wrap_last] & window_ok[wrap_first]]


def key_digits(keys: np.ndarray, n: int) -> np.ndarray:
    powers = 3 ** np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((keys[:, None] // powers) % 3).astype(np.uint8)


def circular_windows(digits: np.ndarray) -> np.ndarray:
    """Window codes for every row of a digit matrix, shape (rows, n)."""
    d = digits.astype(np.int64)
    return 9 * np.roll(d, 1, axis=1) + 3 * d + np.roll(d, -1, axis=1)


@dataclass(frozen=True)
class WordTable:
    """All suitable words of one length, in canonical order.

    Arrays are indexed by rank: ``keys[r]`` is the base-3 value of word r,
    ``digits[r]`` its symbols, and so on.
    """

    n: int
    keys: np.ndarray
    digits: np.ndarray
    weights: np.ndarray
    initial: np.ndarray
    final: np.ndarray
    strict_initial: np.ndarray = field(repr=False)

    def __len__(self) -> int:
        return len(self.keys)

    def word(self, rank: int) -> CyclicWord:
        return CyclicWord(tuple(int(t) for t in self.digits[rank]))

    @cached_property
    def words(self) -> list[CyclicWord]:
        return [self.word(r) for r in range(len(self))]

    def index_of(self, w) -> int:
        w = as_word(w)
        if w.n != self.n:
            raise KeyError(f"word {w} has length {w.n}, table is for n={self.n}")
        key = w.key
        r = int(np.searchsorted(self.keys, key))
        if r == len(self.keys) or self.keys[r] != key:
            raise KeyError(f"{w} is not a suitable word")
        return r

    def __contains__(self, w) -> bool:
        try:
            self.index_of(w)
        except (KeyError, ValueError):
            return False
        return True

    @property
    def initial_indices(self) -> np.ndarray:
        return np.flatnonzero(self.initial)

    @property
    def final_indices(self) -> np.ndarray:
        return np.flatnonzero(self.final)


def check_n(n: int, max_n: int = MAX_N) -> None:
    if n < 3:
        raise ValueError(f"cycle length must satisfy n >= 3, got n={n}")
    if n > max_n:
        raise ResourceLimitError(f"n={n} exceeds the configured cap of {max_n}")


def enumerate_words(n: int, max_n: int = MAX_N) -> WordTable:
    check_n(n, max_n)
    keys = suitable_keys(n)
    digits = key_digits(keys, n)
    windows = circular_windows(digits)
    return WordTable(
        n=n,
        keys=keys,
        digits=digits,
        weights=(digits == 0).sum(axis=1).astype(np.int64),
        initial=INITIAL_WINDOW[windows].all(axis=1),
        final=~(digits == 2).any(axis=1),
        strict_initial=STRICT_INITIAL_WINDOW[windows].all(axis=1),
    )


def count_circular(n: int, window_ok: np.ndarray = SUITABLE_WINDOW) -> int:
    """Count circular words whose windows all pass, as trace(T**n).

    States are ordered pairs of adjacent symbols; T links (a, b) to (b, c)
    when the window abc is allowed. Exact integer arithmetic, no enumeration.
    """
    states = list(product(range(3), repeat=2))
    T = [[0] * 9 for _ in range(9)]
    for i, (a, b) in enumerate(states):
        for c in range(3):
            if window_ok[9 * a + 3 * b + c]:
                T[i][3 * b + c] = 1
    P = [[int(i == j) for j in range(9)] for i in range(9)]
    for _ in range(n):
        P = [[sum(P[i][k] * T[k][j] for k in range(9)) for j in range(9)] for i in range(9)]
    return sum(P[i][i] for i in range(9))
