"""Cylinders, itineraries and Markov transition structure.

Cylinders of length ``m`` (maximal intervals on which ``f^m`` is monotone)
are built by iterated pullback: a length-(k+1) cylinder is
``J_i ∩ f_i^{-1}(C)`` for a length-k cylinder ``C``.  Levels are held
column-wise in :class:`CylinderLevel` so whole levels can be pushed through
the branches with numpy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from .maps import PiecewiseMonotoneMap, STRUCT_TOL, TriState

DEFAULT_CYLINDER_CAP = 2 ** 22
MAX_LEVEL = 24
GENERATING_WIDTH = 1e-9


class CylinderCapExceeded(RuntimeError):
    pass


@dataclass(frozen=True, order=True)
class SymbolWord:
    """Itinerary word with 1-based symbols."""

    symbols: tuple

    def __post_init__(self):
        if not self.symbols:
            raise ValueError("symbol words are nonempty")
        if any(s < 1 for s in self.symbols):
            raise ValueError("symbols are 1-based")

    @classmethod
    def parse(cls, text: str) -> "SymbolWord":
        parts = text.split(".") if "." in text else list(text)
        return cls(tuple(int(p) for p in parts))

    @classmethod
    def from_indices(cls, row) -> "SymbolWord":
        return cls(tuple(int(v) + 1 for v in row))

    def __len__(self):
        return len(self.symbols)

    def __str__(self):
        if max(self.symbols) > 9:
            return ".".join(str(s) for s in self.symbols)
        return "".join(str(s) for s in self.symbols)

    def indices(self) -> np.ndarray:
        return np.array(self.symbols, dtype=np.int64) - 1


@dataclass(frozen=True)
class Cylinder:
    word: SymbolWord
    lo: float
    hi: float

    @property
    def degenerate(self) -> bool:
        return self.lo == self.hi

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi


@dataclass
class CylinderLevel:
    """All length-``m`` cylinders, sorted lexicographically by word.

    ``words`` holds 0-based piece indices, one row per cylinder.
    """

    m: int
    lo: np.ndarray
    hi: np.ndarray
    words: np.ndarray

    def __len__(self):
        return len(self.lo)

    @property
    def degenerate(self) -> np.ndarray:
        return self.lo == self.hi

    def cylinders(self) -> list:
        return [
            Cylinder(SymbolWord.from_indices(w), float(a), float(b))
            for w, a, b in zip(self.words, self.lo, self.hi)
        ]

    def max_width(self) -> float:
        return float(np.max(self.hi - self.lo)) if len(self) else 0.0


def _sorted_level(m, lo, hi, words) -> CylinderLevel:
    order = np.lexsort(words.T[::-1])
    return CylinderLevel(m, lo[order], hi[order], words[order])


def first_level(fmap: PiecewiseMonotoneMap) -> CylinderLevel:
    bp = np.asarray(fmap.breakpoints)
    words = np.arange(fmap.n_pieces, dtype=np.int8 if fmap.n_pieces < 128 else np.int16)[:, None]
    return CylinderLevel(1, bp[:-1].copy(), bp[1:].copy(), words)


def pullback(fmap: PiecewiseMonotoneMap, level: CylinderLevel) -> CylinderLevel:
    """Length-(m+1) cylinders from length-m ones."""
    los, his, words = [], [], []
    for i, br in enumerate(fmap.branches):
        ylo, yhi = br.image()
        a = np.maximum(level.lo, ylo)
        b = np.minimum(level.hi, yhi)
        keep = b >= a - STRUCT_TOL
        if not np.any(keep):
            continue
        a, b = a[keep], b[keep]
        point = (b - a) <= STRUCT_TOL
        mid = np.clip(0.5 * (a + b), ylo, yhi)
        a = np.where(point, mid, a)
        b = np.where(point, mid, b)
        xa = br.inverse_array(a)
        xb = br.inverse_array(b)
        lo = np.minimum(xa, xb)
        hi = np.where(point, lo, np.maximum(xa, xb))
        w = np.empty((len(lo), level.m + 1), dtype=level.words.dtype)
        w[:, 0] = i
        w[:, 1:] = level.words[keep]
        los.append(lo)
        his.append(hi)
        words.append(w)
    if not los:
        empty = np.empty(0)
        return CylinderLevel(level.m + 1, empty, empty, np.empty((0, level.m + 1), dtype=level.words.dtype))
    return _sorted_level(level.m + 1, np.concatenate(los), np.concatenate(his), np.concatenate(words))


def cylinder_levels(fmap: PiecewiseMonotoneMap, m: int, cap: int = DEFAULT_CYLINDER_CAP) -> Iterator[CylinderLevel]:
    """Yield levels 1..m.  Aborts once a level would hold more than ``cap`` cylinders."""
    if not 1 <= m <= MAX_LEVEL:
        raise ValueError(f"cylinder length must lie in [1, {MAX_LEVEL}]")
    level = first_level(fmap)
    yield level
    for _ in range(m - 1):
        # a level can hold at most N times the previous one
        if len(level) * fmap.n_pieces > cap:
            raise CylinderCapExceeded(
                f"level {level.m + 1} may hold {len(level) * fmap.n_pieces} cylinders (cap {cap})"
            )
        level = pullback(fmap, level)
        yield level


def cylinder_level(fmap: PiecewiseMonotoneMap, m: int, cap: int = DEFAULT_CYLINDER_CAP) -> CylinderLevel:
    level = None
    for level in cylinder_levels(fmap, m, cap):
        pass
    return level


def refine_cylinders(fmap: PiecewiseMonotoneMap, m: int, cap: int = DEFAULT_CYLINDER_CAP) -> list:
    """Length-``m`` cylinders as :class:`Cylinder` objects, sorted by word."""
    return cylinder_level(fmap, m, cap).cylinders()


def itinerary(fmap: PiecewiseMonotoneMap, x: float, m: int, snap: float = 0.0) -> SymbolWord:
    """First ``m`` symbols of the itinerary of ``x`` under the tie rule.

    With ``snap > 0`` orbit points within ``snap`` of a breakpoint are moved
    onto it before the piece is chosen, which makes the tie rule robust to
    rounding for orbits that run through breakpoints.
    """
    bp = fmap.breakpoints
    out = []
    for _ in range(m):
        if snap > 0.0:
            j = min(range(len(bp)), key=lambda k: abs(bp[k] - x))
            if abs(bp[j] - x) <= snap:
                x = bp[j]
        i = fmap.piece_index(x)
        out.append(i + 1)
        x = min(1.0, max(0.0, fmap.branches[i](x)))
    return SymbolWord(tuple(out))


@dataclass(frozen=True)
class TransitionStructure:
    """0/1 matrix with ``matrix[i, j] = 1`` iff ``J_j ⊆ f(J_i)`` (0-based)."""

    matrix: np.ndarray
    markov: bool = True

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def _breakpoint_index(bp, y) -> Optional[int]:
    for k, a in enumerate(bp):
        if abs(a - y) <= STRUCT_TOL:
            return k
    return None


def detect_markov(fmap: PiecewiseMonotoneMap) -> Optional[TransitionStructure]:
    bp = fmap.breakpoints
    n = fmap.n_pieces
    t = np.zeros((n, n), dtype=np.int64)
    for i, br in enumerate(fmap.branches):
        ylo, yhi = br.image()
        p, q = _breakpoint_index(bp, ylo), _breakpoint_index(bp, yhi)
        if p is None or q is None:
            return None
        t[i, p:q] = 1
    return TransitionStructure(t)


def _int_matmul(a, b):
    n = len(a)
    return [[sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n)] for i in range(n)]


def admissible_word_count(ts: TransitionStructure, m: int) -> int:
    """``trace(t^m)`` in exact integer arithmetic."""
    if m < 1:
        raise ValueError("m must be >= 1")
    base = [[int(v) for v in row] for row in ts.matrix]
    result = None
    power = base
    e = m
    while e:
        if e & 1:
            result = power if result is None else _int_matmul(result, power)
        e >>= 1
        if e:
            power = _int_matmul(power, power)
    return sum(result[i][i] for i in range(len(result)))


def admissible_path_count(ts: TransitionStructure, m: int) -> int:
    """Number of admissible length-``m`` words, ``1^T t^(m-1) 1`` (exact integers)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    base = [[int(v) for v in row] for row in ts.matrix]
    row = [1] * len(base)
    for _ in range(m - 1):
        row = [sum(row[i] * base[i][j] for i in range(len(base))) for j in range(len(base))]
    return sum(row)


def is_primitive(t: np.ndarray) -> bool:
    n = t.shape[0]
    # Wielandt: a primitive matrix has A^k > 0 for k = n^2 - 2n + 2
    reach = (t > 0).astype(np.int64)
    power = reach.copy()
    for _ in range(max(1, n * n - 2 * n + 2) - 1):
        power = np.minimum((power @ reach), 1)
    return bool(np.all(power > 0))


@dataclass(frozen=True)
class GeneratingVerdict:
    state: TriState
    reason: str
    max_widths: tuple = ()


def _has_identity_cylinder(fmap: PiecewiseMonotoneMap, level: CylinderLevel) -> bool:
    if not fmap.all_affine:
        return False
    _, b, c = fmap.coefficient_arrays()
    s = np.ones(len(level))
    t = np.zeros(len(level))
    for k in range(level.m):
        idx = level.words[:, k]
        s, t = b[idx] * s, b[idx] * t + c[idx]
    ident = (s == 1.0) & (np.abs(t) <= STRUCT_TOL) & (level.hi > level.lo)
    return bool(np.any(ident))


def generating_check(fmap: PiecewiseMonotoneMap, max_level: int = MAX_LEVEL,
                     cap: int = 2 ** 15) -> GeneratingVerdict:
    """Sufficient test for the generating property of ``(J_1, ..., J_N)``.

    Yes: an expanding affine Markov map with primitive transitions, or a level
    whose widest cylinder is narrower than 1e-9.  No: some ``f^m`` is the
    identity on a nondegenerate cylinder (a whole interval shares one
    itinerary).  Otherwise unknown.
    """
    ts = detect_markov(fmap)
    if (ts is not None and fmap.all_affine
            and all(abs(br.slope) > 1.0 for br in fmap.branches) and is_primitive(ts.matrix)):
        return GeneratingVerdict(TriState.YES, "expanding affine Markov map with primitive transitions")
    widths = []
    try:
        for level in cylinder_levels(fmap, max_level, cap):
            widths.append(level.max_width())
            if widths[-1] < GENERATING_WIDTH:
                return GeneratingVerdict(TriState.YES, f"max cylinder width < 1e-9 at level {level.m}",
                                         tuple(widths))
            if _has_identity_cylinder(fmap, level):
                return GeneratingVerdict(TriState.NO, f"f^{level.m} is the identity on a cylinder",
                                         tuple(widths))
    except CylinderCapExceeded:
        pass
    return GeneratingVerdict(TriState.UNKNOWN, "no certificate within the level budget", tuple(widths))


def cover_gaps(level: CylinderLevel) -> float:
    """Largest gap between consecutive nondegenerate cylinders (0 means they tile [0, 1])."""
    keep = level.hi > level.lo
    lo = np.sort(level.lo[keep])
    hi = np.sort(level.hi[keep])
    if len(lo) == 0:
        return 1.0
    gaps = [lo[0] - 0.0, 1.0 - hi[-1]]
    gaps.extend(np.abs(lo[1:] - hi[:-1]))
    return float(max(gaps))


def count_bound(fmap: PiecewiseMonotoneMap, m: int) -> int:
    return fmap.n_pieces ** m

