from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gamma2cyl.errors import ResourceLimitError
from gamma2cyl.words import (
    CyclicWord,
    can_follow,
    count_circular,
    enumerate_words,
    is_final,
    is_initial,
    is_suitable,
    weight,
)

TABLE_COUNTS = {3: 17, 4: 40, 5: 92, 6: 235, 7: 590, 8: 1456, 9: 3617, 10: 9004,
                11: 22376, 12: 55603, 13: 138218, 14: 343564, 15: 853937}


def naive_windows(text):
    ring = text[-1] + text + text[0]
    return [ring[i:i + 3] for i in range(len(text))]


def naive_suitable(text):
    return not any(w in ("111", "211", "112", "212", "020") for w in naive_windows(text))


def naive_initial(text):
    return naive_suitable(text) and not any(w in ("110", "011", "012", "210") for w in naive_windows(text))


def naive_can_follow(p, q):
    n = len(p)
    for i in range(n):
        left, mid, right = p[i - 1], p[i], p[(i + 1) % n]
        if q[i] == "0":
            ok = mid in "01" or (left != "0" and right != "0")
        elif q[i] == "1":
            ok = mid == "0" or (mid == "1" and left == right == "0") or (mid == "2" and "0" in (left, right))
        else:
            ok = mid == "0"
        if not ok:
            return False
    return True


words = st.integers(3, 9).flatmap(lambda n: st.lists(st.integers(0, 2), min_size=n, max_size=n))


@pytest.mark.parametrize("text, expected", [("000", True), ("002", False), ("222", True)])
def test_is_suitable_examples(text, expected):
    assert is_suitable(text) is expected


@pytest.mark.parametrize("text, expected", [("000", True), ("011", False), ("010", True)])
def test_is_initial_examples(text, expected):
    assert is_initial(text) is expected


@pytest.mark.parametrize("text, expected", [("000", True), ("012", False), ("010", True)])
def test_is_final_examples(text, expected):
    assert is_final(text) is expected


@pytest.mark.parametrize("text, expected", [("000", 3), ("222", 0), ("012", 1)])
def test_weight_examples(text, expected):
    assert weight(text) == expected


@pytest.mark.parametrize("p, q, expected", [("000", "000", True), ("000", "222", True), ("012", "000", False)])
def test_can_follow_examples(p, q, expected):
    assert can_follow(p, q) is expected


def test_can_follow_length_mismatch():
    with pytest.raises(ValueError):
        can_follow("000", "0000")


def test_word_validation():
    with pytest.raises(ValueError):
        CyclicWord((0, 1))
    with pytest.raises(ValueError):
        CyclicWord.parse("0130")
    w = CyclicWord.parse("0121")
    assert str(w) == "0121"
    assert w.key == 0 * 27 + 1 * 9 + 2 * 3 + 1
    assert CyclicWord.from_key(w.key, 4) == w
    assert w[-1] == 1 and w[4] == 0


def test_strict_initial_drops_222_windows():
    assert is_initial("222") and not is_initial("222", strict=True)
    assert is_initial("02220") and not is_initial("02220", strict=True)
    assert is_initial("0220", strict=True)


@pytest.mark.parametrize("n, size", [(3, 17), (7, 590), (12, 55603)])
def test_enumerate_words_sizes(n, size):
    assert len(enumerate_words(n)) == size


def test_enumerate_words_errors():
    with pytest.raises(ValueError, match="n >= 3"):
        enumerate_words(2)
    with pytest.raises(ResourceLimitError, match="cap of 15"):
        enumerate_words(16)
    with pytest.raises(ResourceLimitError, match="cap of 10"):
        enumerate_words(11, max_n=10)


@pytest.mark.parametrize("n", range(3, 8))
def test_enumeration_matches_exhaustive_scan(n):
    expected = []
    for trits in product("012", repeat=n):
        text = "".join(trits)
        if naive_suitable(text):
            expected.append(text)
    table = enumerate_words(n)
    assert [str(w) for w in table.words] == expected  # product order is base-3 order
    for r, text in enumerate(expected):
        assert table.initial[r] == naive_initial(text)
        assert table.final[r] == ("2" not in text)
        assert table.weights[r] == text.count("0")
        assert table.index_of(text) == r


@pytest.mark.parametrize("n", range(3, 16))
def test_transfer_count_agrees_with_table(n):
    assert count_circular(n) == TABLE_COUNTS[n]


@pytest.mark.parametrize("n", range(3, 12))
def test_enumeration_size_matches_transfer_count(n):
    assert len(enumerate_words(n)) == count_circular(n)


def test_table_invariants():
    t = enumerate_words(6)
    assert np.all(np.diff(t.keys) > 0)
    zero = t.index_of("000000")
    assert t.initial[zero] and t.final[zero] and t.strict_initial[zero]
    assert t.weights[zero] == 6
    assert t.weights.min() >= 0 and t.weights.max() <= 6
    assert np.all(t.strict_initial <= t.initial)
    assert "000002" not in t and "000000" in t
    with pytest.raises(KeyError):
        t.index_of("0020")


@settings(max_examples=300, deadline=None)
@given(words, st.integers(0, 20))
def test_rotation_invariance(trits, k):
    w = CyclicWord(tuple(trits))
    r = w.rotate(k)
    assert is_suitable(r) == is_suitable(w)
    assert is_initial(r) == is_initial(w)
    assert is_initial(r, strict=True) == is_initial(w, strict=True)
    assert is_final(r) == is_final(w)
    assert weight(r) == weight(w)


@settings(max_examples=300, deadline=None)
@given(st.integers(3, 8).flatmap(lambda n: st.tuples(
    st.lists(st.integers(0, 2), min_size=n, max_size=n),
    st.lists(st.integers(0, 2), min_size=n, max_size=n),
    st.integers(0, n),
)))
def test_can_follow_matches_rules_and_rotates(case):
    p, q, k = case
    pw, qw = CyclicWord(tuple(p)), CyclicWord(tuple(q))
    ps, qs = str(pw), str(qw)
    assert can_follow(pw, qw) == naive_can_follow(ps, qs)
    assert can_follow(pw.rotate(k), qw.rotate(k)) == can_follow(pw, qw)


@settings(max_examples=300, deadline=None)
@given(words)
def test_subset_chains(trits):
    w = CyclicWord(tuple(trits))
    if is_initial(w) or is_final(w):
        assert is_suitable(w)
    assert is_suitable(w) == naive_suitable(str(w))
