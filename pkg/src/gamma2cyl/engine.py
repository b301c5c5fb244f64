"""Transfer-matrix computation of the 2-domination number of C_n x P_m.

State vector X^m is indexed by suitable words: X^m[p] is the least size of a
quasi-2-dominating set of C_n x P_m whose last column reads p (INF if there is
none). X^1 comes from the initial words and X^{m+1} = A (x) X^m, where
A[p, q] = weight(p) whenever p can follow q. The 2-domination number is the
minimum of X^m over final words.

Once X^{m0+a} = b (x) X^{m0} the sequence of vectors repeats up to a shift, and
gamma2(n, m + a) = gamma2(n, m) + b for every m >= m0.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

import numpy as np

from .errors import ResourceLimitError
from .tropical import INF, TropicalMatrix, load_matrix, matvec, save_matrix, shifted_equal
from .words import (
    FOLLOW_WINDOW,
    MAX_N,
    SUITABLE_WINDOW,
    WordTable,
    enumerate_words,
)

log = logging.getLogger(__name__)

DEFAULT_MEMORY_BUDGET = 8 * 2**30
DEFAULT_MAX_STEPS = 20
DEFAULT_MAX_PERIOD = 6

# Pair states kept in memory at once while growing (p, q) prefixes.
_FRONTIER_LIMIT = 1 << 20
# Bytes per stored entry during assembly: two int64 keys, two int64 ranks,
# sort permutation and the final int32 index + int8 value.
_ASSEMBLY_BYTES_PER_ENTRY = 48


def count_transitions(n: int) -> int:
    """Exact number of pairs (p, q) with p suitable, q suitable, p can follow q.

    Counts closed walks of length n over states (q_i, p_i, q_{i+1}, p_{i+1}),
    so it is independent of the matrix builder.
    """
    pairs = [(q, p) for q in range(3) for p in range(3)]
    T = np.zeros((81, 81), dtype=np.int64)
    for s1, (q0, p0) in enumerate(pairs):
        for s2, (q1, p1) in enumerate(pairs):
            for s3, (q2, p2) in enumerate(pairs):
                if (
                    SUITABLE_WINDOW[9 * p0 + 3 * p1 + p2]
                    and SUITABLE_WINDOW[9 * q0 + 3 * q1 + q2]
                    and FOLLOW_WINDOW[27 * q1 + 9 * p0 + 3 * p1 + p2]
                ):
                    T[9 * s1 + s2, 9 * s2 + s3] = 1
    return int(np.trace(np.linalg.matrix_power(T, n)))


def estimate_matrix_bytes(n: int) -> tuple[int, int]:
    """Return (nnz, peak bytes) for building the transition matrix of length n."""
    nnz = count_transitions(n)
    return nnz, nnz * _ASSEMBLY_BYTES_PER_ENTRY + 16 * _FRONTIER_LIMIT * 9


def _grow(p: np.ndarray, q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # append one symbol to q, then to p, checking the windows that just closed
    q = (q[:, None] * 3 + np.arange(3)).ravel()
    p = np.repeat(p, 3)
    keep = SUITABLE_WINDOW[q % 27]
    p, q = p[keep], q[keep]
    p = (p[:, None] * 3 + np.arange(3)).ravel()
    q = np.repeat(q, 3)
    centre = (q // 3) % 3
    window = p % 27
    keep = SUITABLE_WINDOW[window] & FOLLOW_WINDOW[27 * centre + window]
    return p[keep], q[keep]


def _close(p: np.ndarray, q: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    # the two windows that wrap from position n-1 back to 0
    top = 3 ** (n - 1)
    p0, q0 = p // top, q // top
    p1, q1 = (p // (top // 3)) % 3, (q // (top // 3)) % 3
    p_last = (p % 9) * 3 + p0
    q_last = (q % 9) * 3 + q0
    p_first = (p % 3) * 9 + p0 * 3 + p1
    q_first = (q % 3) * 9 + q0 * 3 + q1
    keep = (
        SUITABLE_WINDOW[p_last]
        & SUITABLE_WINDOW[q_last]
        & SUITABLE_WINDOW[p_first]
        & SUITABLE_WINDOW[q_first]
        & FOLLOW_WINDOW[27 * (q % 3) + p_last]
        & FOLLOW_WINDOW[27 * q0 + p_first]
    )
    return p[keep], q[keep]


def _complete(p: np.ndarray, q: np.ndarray, depth: int, n: int) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    stack = [(p, q, depth)]
    while stack:
        p, q, depth = stack.pop()
        if depth == n:
            yield _close(p, q, n)
        elif len(p) > _FRONTIER_LIMIT // 9:
            half = len(p) // 2
            stack.append((p[half:], q[half:], depth))
            stack.append((p[:half], q[:half], depth))
        else:
            p, q = _grow(p, q)
            stack.append((p, q, depth + 1))


def transition_pairs(n: int, threads: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Keys of every (p, q) with p, q suitable and p able to follow q."""
    seed = np.arange(9, dtype=np.int64)
    p = np.tile(seed, 9)
    q = np.repeat(seed, 9)
    p, q = _grow(p, q)
    if n == 3:
        return _close(p, q, 3)
    chunks = np.array_split(np.arange(len(p)), max(1, threads))

    def run(idx):
        parts = list(_complete(p[idx], q[idx], 3, n))
        return [a for a, _ in parts], [b for _, b in parts]

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(run, chunks))
    else:
        results = [run(chunks[0])]
    ps = [a for r in results for a in r[0]]
    qs = [b for r in results for b in r[1]]
    return np.concatenate(ps), np.concatenate(qs)


def build_initial_vector(table: WordTable, strict: bool = True) -> np.ndarray:
    """X^1[p] = weight(p) for initial words p, INF for the rest.

    By default words containing "222" are left out: their middle vertex would
    be a first-column 2 with no neighbour in the set, and keeping them lets
    X^m undercount (gamma2 of C_4 x P_4 comes out as 7 instead of 8).
    ``strict=False`` keeps the plain forbidden-window definition, for
    comparison only.
    """
    mask = table.strict_initial if strict else table.initial
    return np.where(mask, table.weights, INF).astype(np.int64)


def build_transition_matrix(
    table: WordTable,
    memory_budget: int = DEFAULT_MEMORY_BUDGET,
    threads: int = 1,
) -> TropicalMatrix:
    """A[p, q] = weight(p) if p can follow q; rows are p, columns q, by table rank."""
    nnz, need = estimate_matrix_bytes(table.n)
    if need > memory_budget:
        raise ResourceLimitError(
            f"transition matrix for n={table.n} has {nnz} entries and needs about "
            f"{need / 2**30:.2f} GiB, over the budget of {memory_budget / 2**30:.2f} GiB"
        )
    p_keys, q_keys = transition_pairs(table.n, threads=threads)
    rows = np.searchsorted(table.keys, p_keys)
    cols = np.searchsorted(table.keys, q_keys)
    del p_keys, q_keys
    s = len(table)
    A = TropicalMatrix.from_triplets(s, s, rows, cols, table.weights[rows])
    if A.nnz != nnz:
        raise AssertionError(f"built {A.nnz} entries, expected {nnz}")
    return A


@dataclass(frozen=True)
class TransferSystem:
    n: int
    table: WordTable
    A: TropicalMatrix
    X1: np.ndarray
    final_indices: np.ndarray
    strict_initial: bool = True

    def __len__(self) -> int:
        return len(self.table)

    def vectors(self, count: int) -> Iterator[np.ndarray]:
        """Yield X^1, X^2, ..., X^count."""
        x = self.X1
        for m in range(1, count + 1):
            if m > 1:
                x = matvec(self.A, x)
            finite = x[x < INF]
            if len(finite) and finite.max() > self.n * m:
                raise AssertionError(f"entry above n*m={self.n * m} at step {m}")
            yield x

    def gamma2(self, x: np.ndarray) -> int:
        """Minimum of a state vector over final words."""
        value = x[self.final_indices].min()
        if value >= INF:
            raise AssertionError("no final word is reachable")
        return int(value)


def cache_path(cache_dir: str | Path, n: int) -> Path:
    return Path(cache_dir) / f"tropmat_n{n}.bin"


def build_system(
    n: int,
    *,
    strict_initial: bool = True,
    memory_budget: int = DEFAULT_MEMORY_BUDGET,
    cache_dir: str | Path | None = None,
    max_n: int = MAX_N,
    threads: int = 1,
) -> TransferSystem:
    table = enumerate_words(n, max_n=max_n)
    A = None
    path = cache_path(cache_dir, n) if cache_dir is not None else None
    if path is not None and path.exists():
        try:
            A = load_matrix(path, n=n, size=len(table))
            log.info("loaded transition matrix from %s", path)
        except ValueError as exc:
            log.warning("ignoring cache %s: %s", path, exc)
    if A is None:
        A = build_transition_matrix(table, memory_budget=memory_budget, threads=threads)
        if path is not None:
            path.parent.mkdir(parents=True, exist_ok=True)
            save_matrix(path, A, n)
    return TransferSystem(
        n=n,
        table=table,
        A=A,
        X1=build_initial_vector(table, strict=strict_initial),
        final_indices=table.final_indices,
        strict_initial=strict_initial,
    )


def iterate(system: TransferSystem, m: int) -> np.ndarray:
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    for x in system.vectors(m):
        pass
    return x


def gamma2_fixed(n: int, m: int, system: TransferSystem | None = None) -> int:
    if n < 3 or m < 2:
        raise ValueError(f"need n >= 3 and m >= 2, got n={n}, m={m}")
    if system is None:
        system = build_system(n)
    elif system.n != n:
        raise ValueError(f"system is for n={system.n}, not n={n}")
    return system.gamma2(iterate(system, m))


@dataclass(frozen=True)
class Recurrence:
    """gamma2(n, m + a) - gamma2(n, m) = b for m >= m0, plus the seed values."""

    n: int
    m0: int
    a: int
    b: int
    boundary: dict[int, int]
    remaining: dict[int, int]

    def __post_init__(self) -> None:
        if self.m0 < 2 or self.a < 1 or self.b < 1:
            raise ValueError(f"invalid recurrence (m0={self.m0}, a={self.a}, b={self.b})")
        if sorted(self.boundary) != list(range(self.m0, self.m0 + self.a)):
            raise ValueError("boundary values must cover m0..m0+a-1")
        if sorted(self.remaining) != list(range(2, self.m0)):
            raise ValueError("remaining values must cover 2..m0-1")
        if any(v < 1 for v in [*self.boundary.values(), *self.remaining.values()]):
            raise ValueError("values must be positive")

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "m0": self.m0,
            "a": self.a,
            "b": self.b,
            "boundary": {str(m): v for m, v in sorted(self.boundary.items())},
            "remaining": {str(m): v for m, v in sorted(self.remaining.items())},
        }

    @classmethod
    def from_dict(cls, data: dict) -> Recurrence:
        return cls(
            n=int(data["n"]),
            m0=int(data["m0"]),
            a=int(data["a"]),
            b=int(data["b"]),
            boundary={int(k): int(v) for k, v in data["boundary"].items()},
            remaining={int(k): int(v) for k, v in data["remaining"].items()},
        )


def find_recurrence(
    n: int,
    max_steps: int = DEFAULT_MAX_STEPS,
    max_period: int = DEFAULT_MAX_PERIOD,
    system: TransferSystem | None = None,
) -> Recurrence | None:
    """Search X^1..X^max_steps for the first X^{m0+a} = b (x) X^{m0}.

    Pairs are tried by increasing m0 >= 2, then increasing period a. Returns
    None when no pair fits inside the computed range.
    """
    if n < 3:
        raise ValueError(f"cycle length must satisfy n >= 3, got n={n}")
    if system is None:
        system = build_system(n)
    X = [None, *system.vectors(max_steps)]  # X[m] is X^m
    for m0 in range(2, max_steps):
        for a in range(1, min(max_period, max_steps - m0) + 1):
            b = shifted_equal(X[m0], X[m0 + a])
            if b is None:
                continue
            if b < 1:
                raise AssertionError(f"n={n}: vectors repeat with zero shift at m0={m0}, a={a}")
            return Recurrence(
                n=n,
                m0=m0,
                a=a,
                b=b,
                boundary={m: system.gamma2(X[m]) for m in range(m0, m0 + a)},
                remaining={m: system.gamma2(X[m]) for m in range(2, m0)},
            )
    return None


@dataclass(frozen=True)
class ClosedForm:
    rec: Recurrence

    def evaluate(self, m: int) -> int:
        if m < 2:
            raise ValueError(f"m must be >= 2, got {m}")
        if m < self.rec.m0:
            return self.rec.remaining[m]
        return self.extended(m)

    def extended(self, m: int) -> int:
        """The periodic-linear solution, continued to any integer m (also below m0)."""
        r = self.rec
        q, k = divmod(m - r.m0, r.a)
        return r.boundary[r.m0 + k] + r.b * q

    def is_exception(self, m: int) -> bool:
        """True if gamma2(n, m) is a pre-periodic value off the linear solution."""
        return m < self.rec.m0 and self.evaluate(m) != self.extended(m)

    def __call__(self, m: int) -> int:
        return self.evaluate(m)


def solve_closed_form(rec: Recurrence) -> ClosedForm:
    return ClosedForm(rec)


def residue_pattern(n: int) -> tuple[int, int]:
    """Period and increment conjectured from the residue of n mod 3."""
    r = n % 3
    if r == 0:
        return 1, n // 3
    if r == 1:
        return 2, (2 * n + 1) // 3
    return 2, (2 * n + 2) // 3


def class_formula(n: int, m: int) -> int | None:
    """Conjectured gamma2(C_n x P_m) for large m; None where no class formula is stated (n = 5)."""
    r = n % 3
    if r == 0:
        return n * (m + 2) // 3
    if r == 1:
        k = (2 * n + 1) // 3
        return -(-k * (m + 1) // 2) + (n - 4) // 3
    if n == 5:
        return None
    return (n + 1) * (m + 1) // 3 + (n - 8) // 3


@dataclass
class Check:
    name: str
    expected: object
    actual: object

    @property
    def ok(self) -> bool:
        return self.expected == self.actual


@dataclass
class ConjectureReport:
    n: int
    checks: list[Check] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def pattern_ok(self) -> bool:
        return all(c.ok for c in self.checks if c.name in ("a", "b"))

    @property
    def formula_ok(self) -> bool | None:
        formula = [c for c in self.checks if c.name.startswith("f(")]
        return all(c.ok for c in formula) if formula else None

    def lines(self) -> list[str]:
        out = [
            f"{c.name}: expected {c.expected}, got {c.actual} -> {'match' if c.ok else 'MISMATCH'}"
            for c in self.checks
        ]
        return out + self.notes


def conjecture_check(n: int, rec: Recurrence, sample: int = 40) -> ConjectureReport:
    """Compare a recurrence with the residue-class pattern and class formulas.

    Mismatches are reported, never raised. Formula values are compared for
    m0 <= m < m0 + sample.
    """
    if rec.n != n:
        raise ValueError(f"recurrence is for n={rec.n}, not n={n}")
    report = ConjectureReport(n)
    a, b = residue_pattern(n)
    report.checks.append(Check("a", a, rec.a))
    report.checks.append(Check("b", b, rec.b))
    form = solve_closed_form(rec)
    if class_formula(n, rec.m0) is None:
        report.notes.append(
            f"n={n}: no class formula; gamma2 is piecewise by parity of m "
            f"({', '.join(f'f({m})={form.evaluate(m)}' for m in range(2, 8))}, ...)"
        )
        return report
    for m in range(rec.m0, rec.m0 + sample):
        report.checks.append(Check(f"f({m})", class_formula(n, m), form.evaluate(m)))
    return report


def formula_threshold(n: int, rec: Recurrence) -> int:
    """Smallest m from which every value follows the linear solution."""
    form = solve_closed_form(rec)
    m = rec.m0
    while m > 2 and not form.is_exception(m - 1):
        m -= 1
    return m


__all__ = [
    "ClosedForm",
    "ConjectureReport",
    "DEFAULT_MAX_PERIOD",
    "DEFAULT_MAX_STEPS",
    "DEFAULT_MEMORY_BUDGET",
    "Recurrence",
    "TransferSystem",
    "build_initial_vector",
    "build_system",
    "build_transition_matrix",
    "class_formula",
    "conjecture_check",
    "count_transitions",
    "estimate_matrix_bytes",
    "find_recurrence",
    "formula_threshold",
    "gamma2_fixed",
    "iterate",
    "residue_pattern",
    "solve_closed_form",
]
