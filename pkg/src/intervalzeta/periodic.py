"""Fixed points of ``f^m`` per cylinder, representative sets and trace sums.

On a length-``m`` cylinder ``f^m`` is the composition of the branches named
by the word, and it is monotone, so ``h(x) = f^m(x) - x`` is handled case by
case:

* affine composite -- closed form; slope exactly 1 with ``h == 0`` gives the
  whole cylinder (an interval of periodic points);
* decreasing composite -- ``h`` strictly decreasing, one bracketed bisection;
* increasing nonlinear composite -- sign changes on a 64-point grid, each
  refined by bisection; touching zeros are flagged as tangential.

Every operation here works on whole cylinder levels at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .maps import PiecewiseMonotoneMap, STRUCT_TOL, TriState, slope_resonance_check
from .symbolic import (
    Cylinder,
    CylinderLevel,
    SymbolWord,
    cylinder_levels,
    itinerary,
    DEFAULT_CYLINDER_CAP,
)
from .weights import ConstantWeight, Weight, word_weight_products

FIXED_TOL = 1e-10
GRID_POINTS = 64
BISECT_STEPS = 64
BOUNDARY_TOL = 1e-11
MAX_PERIOD = 20
EPS = np.finfo(float).eps


@dataclass(frozen=True)
class FixedPointResult:
    """Solutions of ``f^m(x) = x`` inside one cylinder.

    ``kind`` is ``"empty"``, ``"point"`` or ``"interval"``.  For ``"point"``
    every isolated root found is in ``roots`` and ``x`` is the first one.
    """

    kind: str
    x: Optional[float] = None
    interval: Optional[tuple] = None
    roots: tuple = ()
    tangential: bool = False

    @classmethod
    def empty(cls):
        return cls("empty")

    @classmethod
    def point(cls, roots, tangential=False):
        roots = tuple(float(r) for r in roots)
        return cls("point", roots[0], None, roots, tangential)

    @classmethod
    def span(cls, u, v):
        return cls("interval", None, (float(u), float(v)))


def _compose(fmap, words, x):
    """``f^m`` along each row of ``words``; ``x`` has shape (rows,) or (rows, k)."""
    a, b, c = fmap.coefficient_arrays()
    for k in range(words.shape[1]):
        idx = words[:, k]
        if x.ndim == 2:
            idx = idx[:, None]
        x = (a[idx] * x + b[idx]) * x + c[idx]
    return x


def _bisect(fmap, words, lo, hi, decreasing):
    """Root of ``h`` in [lo, hi] per row; ``decreasing`` says h(lo) >= 0 >= h(hi)."""
    lo, hi = lo.copy(), hi.copy()
    for _ in range(BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        hm = _compose(fmap, words, mid) - mid
        go_right = np.where(decreasing, hm > 0, hm < 0)
        lo = np.where(go_right, mid, lo)
        hi = np.where(go_right, hi, mid)
    return 0.5 * (lo + hi)


def _affine_composite(fmap, words):
    _, b, c = fmap.coefficient_arrays()
    s = np.ones(len(words))
    t = np.zeros(len(words))
    for k in range(words.shape[1]):
        idx = words[:, k]
        s, t = b[idx] * s, b[idx] * t + c[idx]
    return s, t


def _grid_roots(fmap, word, lo, hi, grid_h, grid_x):
    """Root analysis for one increasing nonlinear row (slow path)."""
    roots = []
    tangential = False
    near = np.abs(grid_h) <= FIXED_TOL
    j = 0
    n = len(grid_h)
    words = word[None, :]
    while j < n:
        if near[j]:
            k = j
            while k + 1 < n and near[k + 1]:
                k += 1
            left = grid_h[j - 1] if j > 0 else None
            right = grid_h[k + 1] if k + 1 < n else None
            if j == 0 and k == n - 1:
                roots.append(grid_x[(j + k) // 2])
                tangential = True
            elif j == 0 or k == n - 1:
                roots.append(grid_x[j] if j == 0 else grid_x[k])
            elif left * right < 0:
                a, b = np.array([grid_x[j - 1]]), np.array([grid_x[k + 1]])
                roots.append(float(_bisect(fmap, words, a, b, np.array([left > 0]))[0]))
            else:
                roots.append(grid_x[(j + k) // 2])
                tangential = True
            j = k + 1
            continue
        if j + 1 < n and not near[j + 1] and grid_h[j] * grid_h[j + 1] < 0:
            a, b = np.array([grid_x[j]]), np.array([grid_x[j + 1]])
            roots.append(float(_bisect(fmap, words, a, b, np.array([grid_h[j] > 0]))[0]))
        j += 1
    return roots, tangential


EMPTY, POINT, INTERVAL = 0, 1, 2


@dataclass
class LevelRoots:
    """Fixed-point data for a whole cylinder level, one entry per cylinder."""

    kind: np.ndarray
    x: np.ndarray
    tangential: np.ndarray
    extra: dict

    def result(self, r: int, lo: float, hi: float) -> FixedPointResult:
        if self.kind[r] == EMPTY:
            return FixedPointResult.empty()
        if self.kind[r] == INTERVAL:
            return FixedPointResult.span(lo, hi)
        roots = self.extra.get(r, (self.x[r],))
        return FixedPointResult.point(roots, bool(self.tangential[r]))


def fixed_points_level(fmap: PiecewiseMonotoneMap, level: CylinderLevel) -> LevelRoots:
    """Solve ``f^m(x) = x`` on every cylinder of ``level`` at once."""
    words = level.words.astype(np.int64)
    lo, hi = level.lo, level.hi
    rows = len(lo)
    kind = np.zeros(rows, dtype=np.int8)
    xs = np.full(rows, np.nan)
    tang = np.zeros(rows, dtype=bool)
    extra = {}
    if rows == 0:
        return LevelRoots(kind, xs, tang, extra)

    orient = np.prod(fmap.orientation()[words].astype(np.int64), axis=1)
    a_coef = fmap.coefficient_arrays()[0]
    affine = np.all(a_coef[words] == 0.0, axis=1)
    degenerate = lo == hi

    # degenerate cylinders: a single candidate point
    sel = np.flatnonzero(degenerate)
    if len(sel):
        h = _compose(fmap, words[sel], lo[sel]) - lo[sel]
        hit = sel[np.abs(h) <= FIXED_TOL]
        kind[hit] = POINT
        xs[hit] = lo[hit]

    sel = np.flatnonzero(affine & ~degenerate)
    if len(sel):
        s, t = _affine_composite(fmap, words[sel])
        ident = s == 1.0
        whole = sel[ident & (np.abs(t) <= STRUCT_TOL)]
        kind[whole] = INTERVAL
        with np.errstate(divide="ignore", invalid="ignore"):
            x = t / (1.0 - s)
        # slack outside the cylinder is judged in h-space: |s - 1| * overshoot
        overshoot = np.maximum(lo[sel] - x, x - hi[sel])
        slack = np.maximum(FIXED_TOL, 64 * EPS * np.abs(s))
        inside = ~ident & ((overshoot <= 0) | (np.abs(s - 1.0) * overshoot <= slack))
        hit = sel[inside]
        kind[hit] = POINT
        xs[hit] = np.clip(x[inside], lo[hit], hi[hit])

    sel = np.flatnonzero(~affine & ~degenerate & (orient < 0))
    if len(sel):
        w = words[sel]
        hl = _compose(fmap, w, lo[sel]) - lo[sel]
        hh = _compose(fmap, w, hi[sel]) - hi[sel]
        ok = (hl >= -FIXED_TOL) & (hh <= FIXED_TOL)
        roots = _bisect(fmap, w, lo[sel], hi[sel], np.ones(len(sel), dtype=bool))
        roots = np.where(np.abs(hl) <= FIXED_TOL, lo[sel], roots)
        roots = np.where(np.abs(hh) <= FIXED_TOL, hi[sel], roots)
        kind[sel[ok]] = POINT
        xs[sel[ok]] = roots[ok]

    sel = np.flatnonzero(~affine & ~degenerate & (orient > 0))
    if len(sel):
        w = words[sel]
        frac = np.linspace(0.0, 1.0, GRID_POINTS)
        gx = lo[sel, None] + (hi[sel] - lo[sel])[:, None] * frac[None, :]
        gx[:, -1] = hi[sel]
        gh = _compose(fmap, w, gx) - gx
        near = np.abs(gh) <= FIXED_TOL
        change = (gh[:, :-1] * gh[:, 1:] < 0) & ~near[:, :-1] & ~near[:, 1:]
        n_change = change.sum(axis=1)
        simple = (n_change == 1) & ~near.any(axis=1)
        if np.any(simple):
            ridx = np.flatnonzero(simple)
            j = np.argmax(change[ridx], axis=1)
            a = gx[ridx, j]
            b = gx[ridx, j + 1]
            dec = gh[ridx, j] > 0
            kind[sel[ridx]] = POINT
            xs[sel[ridx]] = _bisect(fmap, w[ridx], a, b, dec)
        for q in np.flatnonzero(~simple & (near.any(axis=1) | (n_change > 0))):
            roots, tangential = _grid_roots(fmap, w[q], lo[sel[q]], hi[sel[q]], gh[q], gx[q])
            if roots:
                r = sel[q]
                kind[r] = POINT
                xs[r] = roots[0]
                tang[r] = tangential
                if len(roots) > 1:
                    extra[int(r)] = tuple(roots)
    return LevelRoots(kind, xs, tang, extra)


def fixed_points_in_cylinder(fmap: PiecewiseMonotoneMap, cyl: Cylinder, m: Optional[int] = None) -> FixedPointResult:
    if m is not None and m != len(cyl.word):
        raise ValueError("cylinder word length must equal m")
    level = CylinderLevel(len(cyl.word), np.array([cyl.lo]), np.array([cyl.hi]),
                          cyl.word.indices()[None, :])
    return fixed_points_level(fmap, level).result(0, cyl.lo, cyl.hi)


@dataclass
class PeriodBlock:
    """Representatives of period ``m`` (points of ``Fix f^m``), column-wise, sorted by word."""

    m: int
    x: np.ndarray
    words: np.ndarray
    degenerate: np.ndarray
    tangential: np.ndarray

    def __len__(self):
        return len(self.x)


@dataclass(frozen=True)
class PeriodicPointRecord:
    x: float
    m: int
    word: SymbolWord
    weight_product: complex
    degenerate: bool
    tangential: bool = False


@dataclass
class RepresentativeSet:
    by_period: dict
    provenance: str = "constructed"
    conditions: tuple = ()
    warnings: list = field(default_factory=list)

    @property
    def m_max(self) -> int:
        return max(self.by_period) if self.by_period else 0

    def counts(self) -> list:
        return [len(self.by_period[m]) for m in sorted(self.by_period)]

    def records(self, m: int, fmap: PiecewiseMonotoneMap, weight: Optional[Weight] = None) -> list:
        block = self.by_period[m]
        weight = weight or ConstantWeight.uniform(fmap)
        prods = word_weight_products(fmap, weight, block.x, block.words.astype(np.int64))
        return [
            PeriodicPointRecord(float(x), m, SymbolWord.from_indices(w), complex(p), bool(d), bool(t))
            for x, w, p, d, t in zip(block.x, block.words, prods, block.degenerate, block.tangential)
        ]


def _select_representatives(fmap, level, roots: LevelRoots) -> PeriodBlock:
    lo, hi = level.lo, level.hi
    x = np.where(roots.kind == INTERVAL, 0.5 * (lo + hi), roots.x)
    keep = roots.kind != EMPTY
    on_edge = (roots.kind == POINT) & ((lo == hi) | (x - lo <= BOUNDARY_TOL) | (hi - x <= BOUNDARY_TOL))
    seen = {}
    for r in np.flatnonzero(on_edge):
        xr = float(x[r])
        if xr not in seen:
            seen[xr] = itinerary(fmap, xr, level.m, snap=BOUNDARY_TOL).indices()
        if not np.array_equal(seen[xr], level.words[r]):
            keep[r] = False
    return PeriodBlock(
        level.m,
        x[keep],
        level.words[keep],
        (roots.kind == INTERVAL)[keep],
        roots.tangential[keep],
    )


def build_representative_set(fmap: PiecewiseMonotoneMap, m_max: int,
                             cap: int = DEFAULT_CYLINDER_CAP) -> RepresentativeSet:
    """One periodic point per admissible periodic word, for every period up to ``m_max``.

    A fixed point on a cylinder boundary is kept only by the cylinder whose
    word is its tie-rule itinerary; an interval of periodic points is
    represented by its midpoint.
    """
    if not 1 <= m_max <= MAX_PERIOD:
        raise ValueError(f"m_max must lie in [1, {MAX_PERIOD}]")
    by_period = {}
    warnings = []
    for level in cylinder_levels(fmap, m_max, cap):
        block = _select_representatives(fmap, level, fixed_points_level(fmap, level))
        if np.any(block.tangential):
            warnings.append(f"period {level.m}: {int(block.tangential.sum())} tangential fixed point(s)")
        by_period[level.m] = block
    return RepresentativeSet(by_period, warnings=warnings)


def trace_sums(fmap: PiecewiseMonotoneMap, weight: Weight, rep: RepresentativeSet,
               m_max: Optional[int] = None, absolute: bool = False) -> np.ndarray:
    """``T_1 .. T_{m_max}``: sums of weight products over each period's representatives.

    ``absolute=True`` sums moduli instead, i.e. the trace sums of ``|g|``.
    Summation runs in sorted-word order with compensated addition.
    """
    m_max = m_max or rep.m_max
    out = np.zeros(m_max, dtype=complex)
    for m in range(1, m_max + 1):
        block = rep.by_period[m]
        if len(block) == 0:
            continue
        prods = word_weight_products(fmap, weight, block.x, block.words.astype(np.int64))
        if absolute:
            out[m - 1] = math.fsum(np.abs(prods))
        else:
            out[m - 1] = complex(math.fsum(prods.real), math.fsum(prods.imag))
    return out


@dataclass(frozen=True)
class Certificate:
    """Which sufficient conditions make ``Per f`` itself representative.

    ``label`` is ``"constructed"`` when none holds: the zeta function is then
    the representative-set variant.
    """

    conditions: tuple
    label: str

    @property
    def per_f_representative(self) -> bool:
        return bool(self.conditions)


_LABEL_PRIORITY = ("slope-resonance-free", "negative-schwarzian", "generating")


def representativity_certificate(fmap: PiecewiseMonotoneMap, report) -> Certificate:
    held = []
    if report.generating == TriState.YES:
        held.append("generating")
    if report.schwarzian_negative == TriState.YES:
        held.append("negative-schwarzian")
    if report.slope_resonance_free == TriState.YES:
        held.append("slope-resonance-free")
    for label in _LABEL_PRIORITY:
        if label in held:
            return Certificate(tuple(sorted(held, key=_LABEL_PRIORITY.index)), label)
    return Certificate((), "constructed")


def resonance_state(fmap: PiecewiseMonotoneMap, bound: int = 20) -> TriState:
    if not fmap.all_affine:
        return TriState.NOT_APPLICABLE
    return TriState.YES if slope_resonance_check(fmap, bound).resonance_free else TriState.NO
