import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from intervalzeta.maps import iterate
from intervalzeta.periodic import (
    build_representative_set,
    fixed_points_in_cylinder,
    representativity_certificate,
    trace_sums,
)
from intervalzeta.series import markov_transfer_matrix
from intervalzeta.symbolic import Cylinder, SymbolWord, admissible_word_count, detect_markov, itinerary
from intervalzeta.validation import validate_map
from intervalzeta.weights import ConstantWeight, orbit_weight_product

MAPS = ["tent", "weighted_tent", "three_interval", "logistic4", "logistic38", "identity_branch"]


@pytest.fixture(scope="module")
def reps(presets):
    return {name: build_representative_set(presets[name].fmap, 10) for name in MAPS}


def cyl(word, lo, hi):
    return Cylinder(SymbolWord.parse(word), lo, hi)


def test_fixed_point_examples(tent, ident, three):
    r = fixed_points_in_cylinder(tent.fmap, cyl("22", 0.5, 0.75))
    assert r.kind == "point" and r.x == pytest.approx(2 / 3, abs=1e-12)
    r = fixed_points_in_cylinder(tent.fmap, cyl("12", 0.25, 0.5))
    assert r.kind == "point" and r.x == pytest.approx(0.4, abs=1e-12)
    r = fixed_points_in_cylinder(ident.fmap, cyl("11", 0.0, 0.5))
    assert r.kind == "interval" and r.interval == (0.0, 0.5)
    assert fixed_points_in_cylinder(tent.fmap, cyl("21", 0.75, 1.0)).x == pytest.approx(0.8)
    # degenerate cylinder {0} of the 3-interval map: f^2(0) = 1
    assert fixed_points_in_cylinder(three.fmap, cyl("11", 0.0, 0.0)).kind == "empty"


def test_counts_examples(presets, reps):
    assert reps["tent"].counts()[:3] == [2, 4, 8]
    assert reps["identity_branch"].counts()[:5] == [1] * 5
    assert reps["logistic4"].counts()[:3] == [2, 4, 8]
    for m in range(1, 6):
        (rec,) = reps["identity_branch"].records(m, presets["identity_branch"].fmap)
        assert str(rec.word) == "1" * m and rec.degenerate


def test_logistic4_period_two(logistic4, reps):
    recs = reps["logistic4"].records(2, logistic4.fmap)
    xs = sorted(r.x for r in recs if str(r.word) in ("12", "21"))
    assert xs == pytest.approx([(5 - math.sqrt(5)) / 8, (5 + math.sqrt(5)) / 8], abs=1e-9)
    assert sorted(r.x for r in recs if str(r.word) in ("11", "22")) == pytest.approx([0.0, 0.75], abs=1e-12)


def test_trace_examples(presets, reps):
    t = trace_sums(presets["tent"].fmap, presets["tent"].weight, reps["tent"])
    assert t.real.tolist() == [2.0 ** m for m in range(1, 11)]
    t = trace_sums(presets["weighted_tent"].fmap, presets["weighted_tent"].weight, reps["weighted_tent"])
    np.testing.assert_allclose(t.real, 0.75 ** np.arange(1, 11), rtol=1e-12)
    assert t[1].real == pytest.approx(0.5625)
    t = trace_sums(presets["identity_branch"].fmap, presets["identity_branch"].weight, reps["identity_branch"])
    assert t.real.tolist() == [1.0] * 10


def test_absolute_traces_use_modulus(tent, reps):
    w = ConstantWeight(tent.fmap, ([0.0, 0.5], -0.25))
    t = trace_sums(tent.fmap, w, reps["tent"], 6, absolute=True)
    np.testing.assert_allclose(t.real, 0.75 ** np.arange(1, 7), rtol=1e-12)


@pytest.mark.parametrize("name", ["tent", "weighted_tent", "three_interval", "identity_branch"])
def test_markov_trace_identity(presets, reps, name):
    cfg = presets[name]
    ts = detect_markov(cfg.fmap)
    m_mat = markov_transfer_matrix(ts, cfg.weight.partition_values)
    t = trace_sums(cfg.fmap, cfg.weight, reps[name])
    power = np.eye(ts.n)
    for m in range(1, 11):
        power = power @ m_mat
        assert abs(np.trace(power) - t[m - 1]) <= 1e-10 * (1 + abs(t[m - 1]))


def test_three_interval_counts_match_words(three, reps):
    ts = detect_markov(three.fmap)
    assert reps["three_interval"].counts() == [admissible_word_count(ts, m) for m in range(1, 11)]


def test_logistic38_counts(reps):
    assert reps["logistic38"].counts() == [2, 4, 2, 8, 12, 16, 30, 32, 74, 104]


@pytest.mark.parametrize("name", MAPS)
def test_record_invariants(presets, reps, name):
    cfg = presets[name]
    rep = reps[name]
    for m in range(1, 9):
        recs = rep.records(m, cfg.fmap, cfg.weight)
        words = [r.word for r in recs]
        assert len(set(words)) == len(words)
        for r in recs:
            assert abs(iterate(cfg.fmap, r.x, m) - r.x) <= 1e-8
            if not r.degenerate:
                assert itinerary(cfg.fmap, r.x, m, snap=1e-11) == r.word
                direct = orbit_weight_product(cfg.fmap, cfg.weight, r.x, m)
                assert abs(direct - r.weight_product) <= 1e-10 * max(1.0, abs(direct))


@pytest.mark.parametrize("name", MAPS)
def test_period_doubling_inclusion(presets, reps, name):
    cfg = presets[name]
    rep = reps[name]
    for m in range(1, 6):
        doubled = {str(r.word) for r in rep.records(2 * m, cfg.fmap)}
        for r in rep.records(m, cfg.fmap):
            assert str(r.word) * 2 in doubled


def test_certificates(presets):
    labels = {}
    for name in ("tent", "logistic38", "identity_branch"):
        cfg = presets[name]
        labels[name] = representativity_certificate(cfg.fmap, validate_map(cfg.fmap))
    assert labels["tent"].label == "slope-resonance-free"
    assert "generating" in labels["tent"].conditions
    assert labels["logistic38"].label == "negative-schwarzian"
    assert labels["identity_branch"].label == "constructed"
    assert not labels["identity_branch"].per_f_representative


def test_period_bound(tent):
    with pytest.raises(ValueError):
        build_representative_set(tent.fmap, 21)


@settings(max_examples=30, deadline=None)
@given(k=st.integers(2, 4), m=st.integers(1, 6))
def test_full_affine_branch_crossings(k, m):
    # k increasing branches onto [0, 1] (x -> kx mod 1 with closed pieces): every
    # length-m cylinder is a full branch of f^m and crosses the diagonal once
    from intervalzeta.maps import PiecewiseMonotoneMap
    bps = [i / k for i in range(k + 1)]
    fmap = PiecewiseMonotoneMap.from_branches(bps, [("affine", float(k), -float(i)) for i in range(k)])
    assert build_representative_set(fmap, m).counts()[m - 1] == k ** m
