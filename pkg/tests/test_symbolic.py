import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from intervalzeta.maps import TriState
from intervalzeta.symbolic import (
    CylinderCapExceeded,
    SymbolWord,
    admissible_path_count,
    admissible_word_count,
    cover_gaps,
    cylinder_level,
    cylinder_levels,
    detect_markov,
    generating_check,
    itinerary,
    refine_cylinders,
)

MAPS = ["tent", "weighted_tent", "three_interval", "logistic4", "logistic38", "identity_branch"]


def as_table(cyls):
    return [(str(c.word), c.lo, c.hi) for c in cyls]


def test_tent_cylinders(tent):
    assert as_table(refine_cylinders(tent.fmap, 1)) == [("1", 0.0, 0.5), ("2", 0.5, 1.0)]
    assert as_table(refine_cylinders(tent.fmap, 2)) == [
        ("11", 0.0, 0.25), ("12", 0.25, 0.5), ("21", 0.75, 1.0), ("22", 0.5, 0.75)]


def test_logistic38_level_two(logistic38):
    table = {str(c.word): c for c in refine_cylinders(logistic38.fmap, 2)}
    assert not table["21"].degenerate
    assert table["11"].lo == 0.0
    assert table["11"].hi == pytest.approx((1 - math.sqrt(1 - 2 / 3.8)) / 2, abs=1e-14)


def test_identity_branch_cylinders(ident):
    cyls = refine_cylinders(ident.fmap, 4)
    wide = [c for c in cyls if not c.degenerate]
    assert as_table(wide) == [("1111", 0.0, 0.5), ("2111", 0.5, 1.0)]
    assert all(c.lo == c.hi == 0.5 for c in cyls if c.degenerate)


def test_itinerary_examples(tent):
    assert str(itinerary(tent.fmap, 2 / 3, 3)) == "222"
    assert str(itinerary(tent.fmap, 0.0, 5)) == "11111"
    assert str(itinerary(tent.fmap, 0.5, 2)) == "12"


def test_symbol_word_rendering():
    assert str(SymbolWord.parse("212")) == "212"
    assert str(SymbolWord((1, 12, 3))) == "1.12.3"
    assert SymbolWord.parse("1.12.3").symbols == (1, 12, 3)
    with pytest.raises(ValueError):
        SymbolWord(())


def test_detect_markov_examples(tent, three, logistic38):
    assert detect_markov(tent.fmap).matrix.tolist() == [[1, 1], [1, 1]]
    assert detect_markov(three.fmap).matrix.tolist() == [[0, 1, 1], [1, 1, 1], [1, 1, 1]]
    assert detect_markov(logistic38.fmap) is None


def test_admissible_word_count(tent, three):
    assert admissible_word_count(detect_markov(tent.fmap), 3) == 8
    assert admissible_word_count(detect_markov(three.fmap), 1) == 2
    ts = detect_markov(three.fmap)
    # exact big-integer result
    a = np.array([[0, 1, 1], [1, 1, 1], [1, 1, 1]], dtype=object)
    p = np.identity(3, dtype=object)
    for _ in range(40):
        p = p.dot(a)
    assert admissible_word_count(ts, 40) == int(np.trace(p))


def test_cylinder_cap(three):
    with pytest.raises(CylinderCapExceeded):
        cylinder_level(three.fmap, 12, cap=1000)
    with pytest.raises(ValueError):
        cylinder_level(three.fmap, 25)


def test_generating_verdicts(tent, logistic4, ident):
    assert generating_check(tent.fmap).state == TriState.YES
    assert generating_check(ident.fmap).state == TriState.NO
    assert generating_check(logistic4.fmap).state in (TriState.YES, TriState.UNKNOWN)


@pytest.mark.parametrize("name", MAPS)
def test_cover_and_nesting(presets, name):
    fmap = presets[name].fmap
    prev = None
    for level in cylinder_levels(fmap, 8):
        assert cover_gaps(level) <= 1e-12
        wide = level.hi > level.lo
        lo, hi = np.sort(level.lo[wide]), np.sort(level.hi[wide])
        # interiors disjoint: sorted intervals touch at most at endpoints
        assert np.all(lo[1:] >= hi[:-1] - 1e-12)
        assert len(level) <= fmap.n_pieces ** level.m
        if prev is not None:
            parents = {tuple(w): (a, b) for w, a, b in zip(prev.words, prev.lo, prev.hi)}
            for w, a, b in zip(level.words, level.lo, level.hi):
                pa, pb = parents[tuple(w[:-1])]
                assert pa - 1e-12 <= a <= b <= pb + 1e-12
        prev = level


@pytest.mark.parametrize("name", ["tent", "three_interval"])
def test_markov_cylinder_count(presets, name):
    fmap = presets[name].fmap
    ts = detect_markov(fmap)
    for level in cylinder_levels(fmap, 9):
        assert int(np.sum(level.hi > level.lo)) == admissible_path_count(ts, level.m)


def test_full_branch_count_equality(tent, logistic4):
    for cfg in (tent, logistic4):
        assert len(cylinder_level(cfg.fmap, 7)) == 2 ** 7


@settings(max_examples=150, deadline=None)
@given(name=st.sampled_from(MAPS), x=st.floats(0.0, 1.0), m=st.integers(1, 7))
def test_itinerary_matches_cylinder(presets, name, x, m):
    fmap = presets[name].fmap
    level = cylinder_level(fmap, m)
    # stay clear of boundaries, where rounding may move an orbit onto a breakpoint
    inside = (level.lo + 1e-9 < x) & (x < level.hi - 1e-9)
    hits = np.flatnonzero(inside)
    if len(hits) != 1:
        return  # boundary point
    word = SymbolWord.from_indices(level.words[hits[0]])
    assert itinerary(fmap, x, m) == word
