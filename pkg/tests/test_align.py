import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hmatranslit.align import (
    STEP, CharCostModel, align, alignment_cost, attention_trace, execute_actions,
    format_alignment, monotone_align_kernel, oracle_actions,
)
from hmatranslit.text import NamePair
from hmatranslit.toy import ToyLanguage


def brute_force(first, cont, fanout=0.1):
    """All monotone total alignments with their costs, computed directly."""
    n, m = first.shape
    out = []
    for links in itertools.combinations_with_replacement(range(n), m):
        total = 0.0
        for j, i in enumerate(links):
            opens = j == 0 or links[j - 1] != i
            total += first[i, j] if opens else cont[i, j]
        total += fanout * (m - len(set(links)))
        out.append((total, links))
    return out


def expected_choice(cost, cont=None):
    cands = brute_force(cost, cost if cont is None else cont)
    best = min(c for c, _ in cands)
    optimal = [l for c, l in cands if c <= best + 1e-9]
    # earlier source positions win, deciding from the last target character back
    return best, min(optimal, key=lambda l: l[::-1])


@pytest.mark.parametrize("n,m", [(n, m) for n in range(1, 6) for m in range(1, 6)])
def test_dp_optimal_random_costs(n, m):
    rng = np.random.default_rng(100 * n + m)
    for _ in range(20):
        cost = rng.random((n, m))
        links, total = monotone_align_kernel(cost, cost, 0.1)
        best, choice = expected_choice(cost)
        assert total == pytest.approx(best, abs=1e-12)
        assert tuple(links) == choice


@pytest.mark.parametrize("n,m", [(n, m) for n in range(1, 6) for m in range(1, 6)])
def test_dp_optimal_identity_costs_with_ties(n, m):
    rng = np.random.default_rng(7 * n + m)
    for _ in range(20):
        x = "".join(rng.choice(list("ab"), n))
        y = "".join(rng.choice(list("ab"), m))
        links = align(x, y)
        best, choice = expected_choice((np.array([[a != b for b in y] for a in x], dtype=float)))
        assert alignment_cost(x, y, links) == pytest.approx(best, abs=1e-12)
        assert links == choice


@pytest.mark.parametrize("n,m", [(n, m) for n in range(1, 6) for m in range(1, 6)])
def test_dp_optimal_with_segment_roles(n, m):
    rng = np.random.default_rng(1000 + 10 * n + m)
    for _ in range(20):
        first, cont = rng.random((n, m)), rng.random((n, m))
        links, total = monotone_align_kernel(first, cont, 0.1)
        best, choice = expected_choice(first, cont)
        assert total == pytest.approx(best, abs=1e-12)
        assert tuple(links) == choice


def test_dp_integer_costs_many_ties():
    rng = np.random.default_rng(5)
    for _ in range(200):
        n, m = rng.integers(1, 6, size=2)
        cost = rng.integers(0, 2, size=(n, m)).astype(float)
        links, total = monotone_align_kernel(cost, cost, 0.1)
        best, choice = expected_choice(cost)
        assert total == pytest.approx(best, abs=1e-12)
        assert tuple(links) == choice


def test_identical_words_align_diagonally():
    assert align("abcd", "abcd") == (0, 1, 2, 3)


def test_thanos_alignment():
    x, y = "थनोस", "thanos"
    links = align(x, y)
    assert links == (0, 0, 0, 1, 2, 3)
    actions = oracle_actions(x, y, links)
    assert actions == ("t", "h", "a", STEP, "n", STEP, "o", STEP, "s", STEP)
    assert attention_trace(actions) == [0, 0, 0, 1, 2, 3]
    assert format_alignment(x, y, links) == "थ→tha न→n ो→o स→s"


def test_oracle_structure():
    actions = oracle_actions("abc", "x", (2,))
    assert actions == (STEP, STEP, "x", STEP)
    assert actions.count(STEP) == 3


@pytest.mark.parametrize("nx", range(1, 5))
@pytest.mark.parametrize("ny", range(1, 5))
def test_roundtrip_exhaustive(nx, ny):
    for x in itertools.product("abc", repeat=nx):
        x = "".join(x)
        for y in itertools.product("abc", repeat=ny):
            y = "".join(y)
            actions = oracle_actions(x, y, align(x, y))
            assert execute_actions(x, actions) == y
            assert actions.count(STEP) == nx
            assert actions[-1] == STEP


@settings(max_examples=200, deadline=None)
@given(st.text("αβγδε", min_size=1, max_size=12), st.text("abcdefgh", min_size=1, max_size=20))
def test_roundtrip_random(x, y):
    assert execute_actions(x, oracle_actions(x, y, align(x, y))) == y


def test_execute_rejects_overrun():
    with pytest.raises(ValueError, match="overrun"):
        execute_actions("ab", [STEP, STEP, STEP])
    with pytest.raises(ValueError, match="overrun"):
        execute_actions("ab", [STEP, STEP, "x"])


def test_oracle_rejects_bad_links():
    with pytest.raises(ValueError):
        oracle_actions("ab", "xy", (1, 0))
    with pytest.raises(ValueError):
        oracle_actions("ab", "xy", (0,))
    with pytest.raises(ValueError):
        oracle_actions("ab", "xy", (0, 2))


def test_align_rejects_empty():
    with pytest.raises(ValueError):
        align("", "x")


def test_cost_model_recovers_toy_segmentation():
    lang = ToyLanguage.build(0)
    rng = np.random.default_rng(0)
    words = lang.random_words(60, rng, 3, 8)
    pairs = lang.pairs(words)
    model = CharCostModel.fit(pairs)
    good = 0
    for w, p in zip(words, pairs):
        expected = tuple(i for i, ch in enumerate(w) for _ in lang.table[ch])
        links = align(p.source, p.target, model)
        good += links == expected
        assert alignment_cost(p.source, p.target, links, model) <= alignment_cost(
            p.source, p.target, expected, model) + 1e-9
    assert good / len(words) >= 0.9


def test_cost_model_matrix_floor():
    model = CharCostModel.fit([NamePair("ab", "xy")])
    first, cont = model.matrices("az", "xq")
    assert first.shape == cont.shape == (2, 2)
    assert first[1, 0] == model.floor and first[0, 1] == model.floor
    assert first[0, 0] < model.floor
