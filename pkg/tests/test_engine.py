import math

import numpy as np
import pytest

from gamma2cyl.engine import (
    Recurrence,
    build_initial_vector,
    build_system,
    build_transition_matrix,
    class_formula,
    conjecture_check,
    count_transitions,
    find_recurrence,
    formula_threshold,
    gamma2_fixed,
    iterate,
    residue_pattern,
    solve_closed_form,
)
from gamma2cyl.errors import ResourceLimitError
from gamma2cyl.oracle import brute_gamma2, build_cylinder, is_quasi_2_dominating, labels_from_set
from gamma2cyl.tropical import INF, load_matrix
from gamma2cyl.words import can_follow, enumerate_words, weight

inf = math.inf


def test_initial_vector_n3(system):
    s = system(3)
    t = s.table
    assert len(s.X1) == 17
    assert s.X1[t.index_of("000")] == 3
    assert s.X1[t.index_of("011")] == INF
    assert s.X1[t.index_of("222")] == INF
    assert s.X1[t.index_of("022")] == 1
    assert build_initial_vector(t, strict=False)[t.index_of("222")] == 0


def test_initial_vector_support(system):
    s = system(6)
    finite = s.X1 < INF
    assert np.array_equal(finite, s.table.strict_initial)
    assert np.array_equal(s.X1[finite], s.table.weights[finite])


def test_transition_matrix_n3(system):
    s = system(3)
    A, t = s.A, s.table
    assert (A.nrows, A.ncols) == (17, 17)
    assert A.get(t.index_of("000"), t.index_of("222")) == 3
    assert A.get(t.index_of("012"), t.index_of("000")) == inf
    A.validate()


@pytest.mark.parametrize("n", [3, 4, 5])
def test_transition_matrix_all_pairs(n):
    t = enumerate_words(n)
    A = build_transition_matrix(t)
    for r, p in enumerate(t.words):
        for c, q in enumerate(t.words):
            expected = weight(p) if can_follow(p, q) else inf
            assert A.get(r, c) == expected


@pytest.mark.parametrize("n", range(3, 10))
def test_entry_count_matches_transfer_count(system, n):
    A = system(n).A
    assert A.nnz == count_transitions(n)


def test_entry_counts_frozen():
    # nnz * 4 bytes reproduces the reported matrix sizes (0.32 KB, 1.18 KB, 4.64 KB, 19.82 KB, 82.34 KB)
    counts = {3: 81, 4: 303, 5: 1188, 6: 5075, 7: 21080}
    for n, nnz in counts.items():
        assert count_transitions(n) == nnz
    assert [round(c * 4 / 1024, 2) for c in counts.values()] == [0.32, 1.18, 4.64, 19.82, 82.34]


def test_memory_budget():
    with pytest.raises(ResourceLimitError, match="budget"):
        build_transition_matrix(enumerate_words(8), memory_budget=1 << 20)


def test_threads_give_identical_matrix():
    t = enumerate_words(7)
    A1 = build_transition_matrix(t, threads=1)
    A3 = build_transition_matrix(t, threads=3)
    assert np.array_equal(A1.indptr, A3.indptr)
    assert np.array_equal(A1.indices, A3.indices)
    assert np.array_equal(A1.data, A3.data)


def test_cache_reuse(tmp_path):
    s1 = build_system(5, cache_dir=tmp_path)
    path = tmp_path / "tropmat_n5.bin"
    assert path.exists()
    cached = load_matrix(path, n=5, size=92)
    assert np.array_equal(cached.to_dense(), s1.A.to_dense())
    s2 = build_system(5, cache_dir=tmp_path)
    assert np.array_equal(s2.A.to_dense(), s1.A.to_dense())
    path.write_bytes(b"garbage!" + path.read_bytes()[8:])
    s3 = build_system(5, cache_dir=tmp_path)
    assert s3.A.nnz == s1.A.nnz


def test_iterate_m1_and_n3_m2(system):
    s = system(3)
    assert np.array_equal(iterate(s, 1), s.X1)
    x2 = iterate(s, 2)
    # oracle: cheapest quasi-2-dominating set of C_3 x P_2 with column 1 all in the set
    assert x2[s.table.index_of("000")] == 4
    with pytest.raises(ValueError):
        iterate(s, 0)


def quasi_minima(n, m):
    g = build_cylinder(n, m)
    best = {}
    for mask in range(1 << g.order):
        if is_quasi_2_dominating(g, mask):
            last = str(labels_from_set(g, mask)[-1])
            best[last] = min(best.get(last, inf), mask.bit_count())
    return best


@pytest.mark.parametrize("n, m", [(3, 2), (3, 3), (4, 2), (4, 3)])
def test_state_vector_semantics(system, n, m):
    s = system(n)
    x = iterate(s, m)
    best = quasi_minima(n, m)
    for r, w in enumerate(s.table.words):
        expected = best.get(str(w), inf)
        got = inf if x[r] >= INF else int(x[r])
        assert got == expected, str(w)


def test_verbatim_initial_words_undercount():
    loose = build_system(4, strict_initial=False)
    assert gamma2_fixed(4, 4, loose) == 7
    assert brute_gamma2(4, 4) == 8
    assert gamma2_fixed(4, 4) == 8


@pytest.mark.parametrize("n, m, expected", [(3, 2, 3), (5, 2, 5), (4, 3, 6)])
def test_gamma2_fixed_examples(n, m, expected):
    assert gamma2_fixed(n, m) == expected


def test_gamma2_fixed_errors(system):
    with pytest.raises(ValueError):
        gamma2_fixed(2, 3)
    with pytest.raises(ValueError):
        gamma2_fixed(3, 1)
    with pytest.raises(ValueError):
        gamma2_fixed(4, 3, system(3))


@pytest.mark.parametrize("n, triple", [(3, (5, 1, 1)), (4, (6, 2, 3)), (9, (8, 1, 3))])
def test_find_recurrence_examples(system, n, triple):
    rec = find_recurrence(n, system=system(n))
    assert (rec.m0, rec.a, rec.b) == triple
    assert len(rec.boundary) == rec.a and len(rec.remaining) == rec.m0 - 2


def test_find_recurrence_not_found(system):
    assert find_recurrence(3, max_steps=4, system=system(3)) is None
    assert find_recurrence(4, max_steps=20, max_period=1, system=system(4)) is None


@pytest.mark.parametrize("n", range(3, 10))
def test_closed_form_matches_iteration(system, n):
    s = system(n)
    rec = find_recurrence(n, system=s)
    form = solve_closed_form(rec)
    values = [s.gamma2(x) for x in s.vectors(30)]
    for m in range(2, 31):
        assert form.evaluate(m) == values[m - 1]
    for m in range(rec.m0, 31 - rec.a):
        assert values[m + rec.a - 1] - values[m - 1] == rec.b


@pytest.mark.parametrize("n", range(3, 10))
def test_all_zero_column_bounded(system, n):
    s = system(n)
    zero = s.table.index_of("0" * n)
    for m, x in enumerate(s.vectors(20), start=1):
        assert x[zero] <= n * m


def test_closed_form_examples(system):
    assert solve_closed_form(find_recurrence(3, system=system(3))).evaluate(100) == 102
    assert solve_closed_form(find_recurrence(10, system=system(10))).evaluate(9) == 37
    form = solve_closed_form(find_recurrence(7, system=system(7)))
    assert form.evaluate(11) == 31
    with pytest.raises(ValueError):
        form.evaluate(1)


def test_exception_marker(system):
    form = solve_closed_form(find_recurrence(4, system=system(4)))
    assert form.evaluate(2) == 4 and form.is_exception(2)
    assert not form.is_exception(3) and not form.is_exception(20)
    assert formula_threshold(4, form.rec) == 3


def test_recurrence_validation_and_json():
    rec = Recurrence(3, 5, 1, 1, {5: 7}, {2: 3, 3: 4, 4: 6})
    data = rec.to_dict()
    assert data == {"n": 3, "m0": 5, "a": 1, "b": 1, "boundary": {"5": 7}, "remaining": {"2": 3, "3": 4, "4": 6}}
    assert Recurrence.from_dict(data) == rec
    with pytest.raises(ValueError):
        Recurrence(3, 5, 1, 0, {5: 7}, {2: 3, 3: 4, 4: 6})
    with pytest.raises(ValueError):
        Recurrence(3, 5, 2, 1, {5: 7}, {2: 3, 3: 4, 4: 6})
    with pytest.raises(ValueError):
        Recurrence(3, 5, 1, 1, {5: 7}, {2: 3, 4: 6})


def test_conjecture_check_n6(system):
    rec = find_recurrence(6, system=system(6))
    report = conjecture_check(6, rec)
    assert report.pattern_ok and (rec.a, rec.b) == (1, 2)
    assert report.formula_ok


def test_conjecture_check_n13_from_reported_values():
    rec = Recurrence(13, 10, 2, 9, {10: 53, 11: 57},
                     {2: 13, 3: 18, 4: 24, 5: 28, 6: 34, 7: 39, 8: 44, 9: 48})
    report = conjecture_check(13, rec)
    assert report.pattern_ok
    assert report.formula_ok


def test_conjecture_check_n5_reports_exception(system):
    report = conjecture_check(5, find_recurrence(5, system=system(5)))
    assert report.pattern_ok
    assert report.formula_ok is None
    assert any("piecewise" in line for line in report.lines())


def test_conjecture_check_reports_mismatch_without_raising():
    rec = Recurrence(6, 7, 1, 3, {7: 18}, {2: 6, 3: 8, 4: 11, 5: 13, 6: 16})
    report = conjecture_check(6, rec)
    assert not report.pattern_ok and report.formula_ok is False
    assert any("MISMATCH" in line for line in report.lines())


def test_residue_pattern_and_class_formula():
    assert residue_pattern(9) == (1, 3)
    assert residue_pattern(10) == (2, 7)
    assert residue_pattern(11) == (2, 8)
    assert class_formula(5, 10) is None
    assert class_formula(10, 9) == 37 and class_formula(8, 7) == 24


@pytest.mark.slow
@pytest.mark.parametrize("n, triple", [(11, (10, 2, 8)), (12, (11, 1, 4))])
def test_find_recurrence_large(n, triple):
    rec = find_recurrence(n)
    assert (rec.m0, rec.a, rec.b) == triple
