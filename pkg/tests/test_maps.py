import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from intervalzeta.maps import (
    Branch,
    MapError,
    PiecewiseMonotoneMap,
    TriState,
    branch_inverse,
    eval_map,
    iterate,
    schwarzian_check,
    slope_resonance_check,
)
from intervalzeta.validation import validate_map
from intervalzeta.weights import (
    AffineWeight,
    ConstantWeight,
    ReciprocalDerivativeWeight,
    orbit_weight_product,
    word_weight_products,
)
from intervalzeta.symbolic import itinerary


def affine_map(breakpoints, slopes_intercepts):
    return PiecewiseMonotoneMap.from_branches(
        breakpoints, [("affine", s, b) for s, b in slopes_intercepts])


def test_eval_map_examples(tent, logistic4):
    assert eval_map(tent.fmap, 0.3) == pytest.approx(0.6, abs=1e-15)
    assert eval_map(tent.fmap, 0.5) == 1.0
    assert eval_map(logistic4.fmap, 0.25) == 0.75


def test_eval_map_domain_error(tent):
    with pytest.raises(ValueError):
        eval_map(tent.fmap, 1.5)


def test_tie_rule_uses_lower_branch(ident):
    # both branches give 0.5 at 0.5, but the lower index owns the breakpoint
    assert ident.fmap.piece_index(0.5) == 0
    assert ident.fmap.piece_index(np.array([0.0, 0.5, 0.5000001, 1.0])).tolist() == [0, 0, 1, 1]


def test_branch_inverse_examples(tent, logistic4):
    assert branch_inverse(tent.fmap, 2, 0.5) == pytest.approx(0.75, abs=1e-15)
    assert branch_inverse(tent.fmap, 1, 1.0) == pytest.approx(0.5, abs=1e-15)
    assert branch_inverse(logistic4.fmap, 1, 2.0) is None


def test_structural_errors():
    with pytest.raises(MapError, match="breakpoints not increasing"):
        affine_map([0.0, 0.7, 0.5, 1.0], [(1, 0), (1, 0), (1, 0)])
    with pytest.raises(MapError):
        affine_map([0.0, 0.5, 1.0], [(2, 0)])
    with pytest.raises(MapError):
        Branch.quadratic(-4.0, 4.0, 0.0, 0.0, 1.0)  # vertex inside the domain
    with pytest.raises(MapError):
        Branch.affine(0.0, 0.5, 0.0, 1.0)


def test_orbit_weight_product_examples(tent, weighted_tent):
    assert orbit_weight_product(tent.fmap, tent.weight, 0.123, 7) == 1
    half = ConstantWeight.uniform(tent.fmap, 0.5)
    assert orbit_weight_product(tent.fmap, half, 2 / 3, 3) == pytest.approx(0.125)
    assert orbit_weight_product(weighted_tent.fmap, weighted_tent.weight, 2 / 3, 2) == pytest.approx(0.0625)
    # symbolic word product oracle, itinerary 22
    word = itinerary(weighted_tent.fmap, 2 / 3, 2).indices()[None, :]
    oracle = word_weight_products(weighted_tent.fmap, weighted_tent.weight, np.array([2 / 3]), word)
    assert oracle[0] == pytest.approx(0.0625)


def test_orbit_product_overflow_guard(tent):
    big = ConstantWeight.uniform(tent.fmap, 1e30)
    prod = orbit_weight_product(tent.fmap, big, 0.3, 8)
    assert prod.real == pytest.approx(1e240, rel=1e-12)


def test_validation_examples(tent, logistic38):
    rep = validate_map(tent.fmap)
    assert rep.continuity_residuals == (0.0,) and rep.into_ok
    broken = affine_map([0.0, 0.5, 1.0], [(2, 0), (-1, 1)])
    res = validate_map(broken).continuity_residuals
    assert res[0] == pytest.approx(0.5)
    assert not validate_map(broken).continuous
    rep = validate_map(logistic38.fmap)
    assert rep.into_ok and rep.schwarzian_negative == TriState.YES
    assert max(br.image()[1] for br in logistic38.fmap.branches) == pytest.approx(0.95)


def test_schwarzian_examples(tent, logistic4):
    assert schwarzian_check(logistic4.fmap) == TriState.YES
    assert schwarzian_check(tent.fmap) == TriState.NO
    mixed = PiecewiseMonotoneMap.from_branches(
        [0.0, 0.5, 1.0], [("affine", 2.0, 0.0), ("quadratic", 0.0 + 2.0, -6.0, 5.0)])
    assert schwarzian_check(mixed) == TriState.NO
    # 4x(1-x): f' = 4 - 8x, f'' = -8, f''' = 0, so Sf = -(3/2) 64 / (4 - 8x)^2
    br = logistic4.fmap.branches[0]
    assert br.schwarzian(0.1) == pytest.approx(-96.0 / (4 - 0.8) ** 2)


def test_slope_resonance_examples(tent):
    assert slope_resonance_check(tent.fmap, 20).resonance_free
    m = affine_map([0.0, 0.4, 1.0], [(2.0, 0.0), (-0.5, 1.0)])
    found = slope_resonance_check(m, 4)
    assert not found.resonance_free and found.witness == (2, 2)
    m3 = affine_map([0.0, 0.25, 1.0], [(3.0, 0.0), (-3.0, 1.5)])
    assert slope_resonance_check(m3, 10).resonance_free
    with pytest.raises(ValueError):
        slope_resonance_check(tent.fmap, 65)


def test_weight_rejections(logistic4):
    with pytest.raises(MapError, match="weight not bounded variation"):
        ReciprocalDerivativeWeight(logistic4.fmap, 1.0)
    with pytest.raises(MapError):
        ReciprocalDerivativeWeight(logistic4.fmap, 1j)


def test_total_variation_constant_is_sum_of_jumps(three):
    w = ConstantWeight(three.fmap, (1.0, -2.0, [0.0, 1.0]))
    assert w.total_variation() == pytest.approx(3.0 + abs(-2.0 - 1j))


def test_affine_weight_sup_is_exact(tent):
    w = AffineWeight(tent.fmap, (0.0, 0.3, 1.0), (0.0, -2.0, 1.0))
    assert w.sup_abs(0.1, 0.9, 0) == pytest.approx(2.0)
    lo, hi = np.array([0.0, 0.4]), np.array([0.2, 1.0])
    np.testing.assert_allclose(w.sup_abs_array(lo, hi, np.zeros(2, int)),
                               [w.sup_abs(0.0, 0.2, 0), w.sup_abs(0.4, 1.0, 0)])


MAPS = ["tent", "weighted_tent", "three_interval", "logistic4", "logistic38", "identity_branch"]


@settings(max_examples=200, deadline=None)
@given(name=st.sampled_from(MAPS), x=st.floats(0.0, 1.0))
def test_eval_map_stays_in_unit_interval(presets, name, x):
    assert 0.0 <= eval_map(presets[name].fmap, x) <= 1.0


@settings(max_examples=200, deadline=None)
@given(name=st.sampled_from(MAPS), i=st.integers(0, 2), u=st.floats(0.0, 1.0))
def test_inverse_roundtrip(presets, name, i, u):
    fmap = presets[name].fmap
    br = fmap.branches[i % fmap.n_pieces]
    lo, hi = br.image()
    y = lo + u * (hi - lo)
    x = br.inverse(y)
    assert x is not None and br.lo <= x <= br.hi
    assert abs(br(x) - y) <= 1e-10


@settings(max_examples=150, deadline=None)
@given(name=st.sampled_from(MAPS), x=st.floats(0.0, 1.0), m=st.integers(1, 8), k=st.integers(1, 8),
       values=st.lists(st.floats(0.2, 2.0), min_size=3, max_size=3))
def test_orbit_product_cocycle(presets, name, x, m, k, values):
    fmap = presets[name].fmap
    w = ConstantWeight(fmap, tuple(values[: fmap.n_pieces]))
    whole = orbit_weight_product(fmap, w, x, m + k)
    split = orbit_weight_product(fmap, w, x, m) * orbit_weight_product(fmap, w, iterate(fmap, x, m), k)
    assert abs(whole - split) <= 1e-10 * max(1.0, abs(whole))


def test_reciprocal_weight_values(tent, three):
    w = ReciprocalDerivativeWeight(three.fmap, 2.0)
    np.testing.assert_allclose(w.partition_values.real, [1.0, 2 / 3, 2 / 3])
    assert w(0.1) == pytest.approx(1.0)
    assert w.scaled(3.0).scale == 6.0
    with pytest.raises(MapError):
        w.scaled(-1.0)
    assert math.isclose(ReciprocalDerivativeWeight(tent.fmap, 1.0).total_variation(), 0.0)
