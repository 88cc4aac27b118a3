import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lpvmax.strings import (
    EMPTY,
    concat,
    enumerate_strings,
    format_string,
    parse_string,
    scheduling_lift,
    scheduling_product,
)


def test_enumerate_binary_alphabet_up_to_two():
    s = enumerate_strings(1, 0, 2)
    assert list(s) == [(), (0,), (1,), (0, 0), (0, 1), (1, 0), (1, 1)]


def test_enumerate_counts_and_single_letter():
    assert len(enumerate_strings(2, 3, 3)) == 27
    assert list(enumerate_strings(0, 2, 4)) == [(0, 0), (0, 0, 0), (0, 0, 0, 0)]


def test_enumerate_rejects_bad_bounds():
    with pytest.raises(ValueError):
        enumerate_strings(2, 3, 1)
    with pytest.raises(ValueError):
        enumerate_strings(-1, 0, 1)


def test_string_set_index_and_membership():
    s = enumerate_strings(2, 1, 2)
    assert s.index((2, 1)) == 3 + 7
    assert (2, 1) in s and (3,) not in s


@given(st.integers(0, 3), st.integers(0, 4))
def test_enumerate_size_sorted_unique(n_p, n):
    s = list(enumerate_strings(n_p, n, n))
    assert len(s) == (1 + n_p) ** n
    assert len(set(s)) == len(s)
    assert s == sorted(s)


def test_scheduling_product_examples():
    p = np.array([[0.0, 3.0], [2.0, 7.0]])
    assert scheduling_product((0, 0, 0), np.zeros((5, 2)), 4) == 1.0
    assert scheduling_product((1, 0), np.array([[9.0], [0.5]]), 1) == 0.5
    # p_1(t) = 2 at t = 1, p_2(t-1) = 3 at t = 0
    assert scheduling_product((1, 2), p, 1) == 6.0


def test_scheduling_product_errors():
    with pytest.raises(ValueError):
        scheduling_product(EMPTY, np.zeros((3, 1)), 2)
    with pytest.raises(IndexError):
        scheduling_product((0, 0, 0), np.zeros((3, 1)), 1)
    with pytest.raises(ValueError):
        scheduling_product((2,), np.zeros((3, 1)), 1)


def test_concat_examples():
    assert concat(EMPTY, None, (1,)) == (1,)
    assert concat((1, 0), 2, (0, 1)) == (1, 0, 2, 0, 1)
    assert concat((0,), None, EMPTY) == (0,)


strings = st.lists(st.integers(0, 2), min_size=1, max_size=3).map(tuple)


@given(strings, strings, st.integers(0, 2**31 - 1))
def test_product_splits_over_concatenation(a, b, seed):
    p = np.random.default_rng(seed).uniform(-1, 1, (10, 2))
    t = 9
    whole = scheduling_product(concat(a, None, b), p, t)
    assert np.isclose(whole, scheduling_product(a, p, t) * scheduling_product(b, p, t - len(a)))


@given(st.integers(1, 3), st.integers(0, 2**31 - 1))
def test_lift_matches_products(length, seed):
    p = np.random.default_rng(seed).uniform(-1, 1, (6, 2))
    w = scheduling_lift(p, length)
    for t in range(length - 1, 6):
        expected = [scheduling_product(eta, p, t) for eta in enumerate_strings(2, length, length)]
        assert np.allclose(w[t], expected)
    assert not w[:length - 1].any()


@given(st.lists(st.integers(0, 12), max_size=4).map(tuple))
def test_format_parse_round_trip(eta):
    n_p = 12
    assert parse_string(format_string(eta, n_p), n_p) == eta
    small = tuple(c % 3 for c in eta)
    assert parse_string(format_string(small, 2), 2) == small


def test_format_examples():
    assert format_string((1, 0, 2), 2) == "102"
    assert format_string((1, 0, 12), 12) == "1-0-12"
    assert format_string(EMPTY) == "e"
