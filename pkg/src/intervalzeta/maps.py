"""Piecewise monotone maps of [0, 1] and their branch-level arithmetic.

A map is given by breakpoints ``0 = a_0 < ... < a_N = 1`` and one strictly
monotone branch per piece ``J_i = [a_{i-1}, a_i]``.  Branches are affine or
quadratic, so inverses and Schwarzian signs stay closed-form.

Piece indices are 0-based internally; symbol words shown to users are
1-based.  A point equal to an interior breakpoint ``a_i`` belongs to the
lower piece (tie rule), everywhere in the package.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

STRUCT_TOL = 1e-12
INVERSE_TOL = 1e-12


class MapError(ValueError):
    """Structural problem with a map or weight definition."""


class TriState(str, enum.Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"
    NOT_APPLICABLE = "not-applicable"


@dataclass(frozen=True)
class Branch:
    """``x -> a*x**2 + b*x + c`` restricted to ``[lo, hi]``.

    Affine branches have ``a == 0`` (slope ``b``, intercept ``c``).
    """

    a: float
    b: float
    c: float
    lo: float
    hi: float

    @classmethod
    def affine(cls, slope: float, intercept: float, lo: float, hi: float) -> "Branch":
        return cls(0.0, float(slope), float(intercept), float(lo), float(hi))

    @classmethod
    def quadratic(cls, a: float, b: float, c: float, lo: float, hi: float) -> "Branch":
        return cls(float(a), float(b), float(c), float(lo), float(hi))

    def __post_init__(self):
        if not self.lo < self.hi:
            raise MapError(f"branch domain [{self.lo}, {self.hi}] is empty")
        if self.a == 0.0:
            if self.b == 0.0:
                raise MapError("affine branch has zero slope")
        else:
            vertex = -self.b / (2.0 * self.a)
            if self.lo < vertex < self.hi:
                raise MapError(
                    f"quadratic branch derivative vanishes at {vertex} inside ({self.lo}, {self.hi})"
                )

    @property
    def kind(self) -> str:
        return "affine" if self.a == 0.0 else "quadratic"

    @property
    def is_affine(self) -> bool:
        return self.a == 0.0

    @property
    def slope(self) -> float:
        if not self.is_affine:
            raise MapError("slope is only defined for affine branches")
        return self.b

    @property
    def increasing(self) -> bool:
        return self.derivative(0.5 * (self.lo + self.hi)) > 0

    def __call__(self, x):
        return (self.a * x + self.b) * x + self.c

    def derivative(self, x):
        return 2.0 * self.a * x + self.b

    def second_derivative(self, x=None):
        return 2.0 * self.a

    def image(self) -> tuple[float, float]:
        y0, y1 = self(self.lo), self(self.hi)
        return (y0, y1) if y0 <= y1 else (y1, y0)

    def min_abs_derivative(self) -> float:
        # |f'| is affine in x, so its minimum sits at an endpoint
        return min(abs(self.derivative(self.lo)), abs(self.derivative(self.hi)))

    def inverse(self, y: float) -> Optional[float]:
        """Unique ``x`` in ``[lo, hi]`` with ``self(x) == y``, or None."""
        ylo, yhi = self.image()
        if y < ylo - INVERSE_TOL or y > yhi + INVERSE_TOL:
            return None
        return float(self.inverse_array(np.array([y], dtype=float))[0])

    def inverse_array(self, y: np.ndarray) -> np.ndarray:
        """Vectorised inverse; ``y`` is assumed to lie in the branch image."""
        y = np.asarray(y, dtype=float)
        if self.is_affine:
            x = (y - self.c) / self.b
        else:
            a, b = self.a, self.b
            disc = np.maximum(b * b - 4.0 * a * (self.c - y), 0.0)
            sq = np.sqrt(disc)
            q = -0.5 * (b + math.copysign(1.0, b) * sq)
            with np.errstate(divide="ignore", invalid="ignore"):
                r1 = q / a
                r2 = np.where(q != 0.0, (self.c - y) / q, r1)
            vertex = -b / (2.0 * a)
            if self.lo >= vertex:
                x = np.maximum(r1, r2)
            else:
                x = np.minimum(r1, r2)
        return np.clip(x, self.lo, self.hi)

    def schwarzian(self, x):
        """Sf = f'''/f' - 3/2 (f''/f')**2; f''' vanishes for these branches."""
        d1 = self.derivative(x)
        return -1.5 * (self.second_derivative() / d1) ** 2


@dataclass(frozen=True)
class PiecewiseMonotoneMap:
    breakpoints: tuple
    branches: tuple

    def __post_init__(self):
        bp = tuple(float(v) for v in self.breakpoints)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "branches", tuple(self.branches))
        if len(bp) < 2:
            raise MapError("need at least two breakpoints")
        if any(not math.isfinite(v) for v in bp):
            raise MapError("breakpoints must be finite")
        if any(b <= a for a, b in zip(bp, bp[1:])):
            raise MapError("breakpoints not increasing")
        if bp[0] != 0.0 or bp[-1] != 1.0:
            raise MapError("breakpoints must start at 0 and end at 1")
        if len(self.branches) != len(bp) - 1:
            raise MapError(
                f"{len(bp) - 1} pieces but {len(self.branches)} branches"
            )
        for i, br in enumerate(self.branches):
            if abs(br.lo - bp[i]) > STRUCT_TOL or abs(br.hi - bp[i + 1]) > STRUCT_TOL:
                raise MapError(
                    f"branch {i + 1} domain [{br.lo}, {br.hi}] does not match "
                    f"J_{i + 1} = [{bp[i]}, {bp[i + 1]}]"
                )

    @classmethod
    def from_branches(cls, breakpoints: Sequence[float], specs: Sequence[tuple]) -> "PiecewiseMonotoneMap":
        """Build from ``("affine", slope, intercept)`` / ``("quadratic", a, b, c)`` tuples."""
        if len(specs) != len(breakpoints) - 1:
            raise MapError(f"{len(breakpoints) - 1} pieces but {len(specs)} branches")
        if any(b <= a for a, b in zip(breakpoints, breakpoints[1:])):
            raise MapError("breakpoints not increasing")
        branches = []
        for (lo, hi), spec in zip(zip(breakpoints, breakpoints[1:]), specs):
            kind, *coef = spec
            if kind == "affine":
                branches.append(Branch.affine(coef[0], coef[1], lo, hi))
            elif kind == "quadratic":
                branches.append(Branch.quadratic(coef[0], coef[1], coef[2], lo, hi))
            else:
                raise MapError(f"unknown branch kind {kind!r}")
        return cls(tuple(breakpoints), tuple(branches))

    @property
    def n_pieces(self) -> int:
        return len(self.branches)

    @property
    def all_affine(self) -> bool:
        return all(br.is_affine for br in self.branches)

    def piece(self, i: int) -> tuple[float, float]:
        return self.breakpoints[i], self.breakpoints[i + 1]

    def piece_index(self, x):
        """0-based piece of ``x`` under the lower-index tie rule (array-capable)."""
        inner = np.asarray(self.breakpoints[1:-1])
        idx = np.searchsorted(inner, x, side="left")
        return int(idx) if np.ndim(idx) == 0 else idx

    def coefficient_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        a = np.array([br.a for br in self.branches])
        b = np.array([br.b for br in self.branches])
        c = np.array([br.c for br in self.branches])
        return a, b, c

    def orientation(self) -> np.ndarray:
        return np.array([1 if br.increasing else -1 for br in self.branches], dtype=np.int8)

    def apply_branches(self, idx: np.ndarray, x: np.ndarray) -> np.ndarray:
        """Apply branch ``idx[k]`` to ``x[k]`` using the branch formula."""
        a, b, c = self.coefficient_arrays()
        return (a[idx] * x + b[idx]) * x + c[idx]

    def __call__(self, x: float) -> float:
        return eval_map(self, x)

    def min_abs_derivative(self) -> float:
        return min(br.min_abs_derivative() for br in self.branches)


def eval_map(fmap: PiecewiseMonotoneMap, x: float) -> float:
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x = {x} outside [0, 1]")
    y = fmap.branches[fmap.piece_index(x)](x)
    return min(1.0, max(0.0, y))


def branch_inverse(fmap: PiecewiseMonotoneMap, i: int, y: float) -> Optional[float]:
    """Preimage of ``y`` under branch ``i`` (1-based, matching symbol words)."""
    return fmap.branches[i - 1].inverse(y)


def schwarzian_check(fmap: PiecewiseMonotoneMap) -> TriState:
    # quadratic: Sf = -3/2 (f''/f')^2 < 0 wherever f' != 0; affine: Sf = 0
    if all(not br.is_affine for br in fmap.branches):
        return TriState.YES
    return TriState.NO


@dataclass(frozen=True)
class ResonanceResult:
    resonance_free: bool
    bound: int
    witness: Optional[tuple] = None


def _compositions(total: int, parts: int):
    """Nonnegative integer vectors of length ``parts`` summing to ``total``, lexicographic."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def slope_resonance_check(fmap: PiecewiseMonotoneMap, max_total_exponent: int = 20) -> ResonanceResult:
    """Search exponent vectors m with 0 < sum(m) <= bound for prod(slope_i ** m_i) == 1."""
    if not fmap.all_affine:
        raise MapError("slope resonance is only defined for all-affine maps")
    if not 1 <= max_total_exponent <= 64:
        raise ValueError("max_total_exponent must lie in [1, 64]")
    slopes = [br.slope for br in fmap.branches]
    logs = [math.log(abs(s)) for s in slopes]
    negative = [s < 0 for s in slopes]
    if all(v > STRUCT_TOL for v in logs) or all(v < -STRUCT_TOL for v in logs):
        return ResonanceResult(True, max_total_exponent)
    for total in range(1, max_total_exponent + 1):
        for m in _compositions(total, len(slopes)):
            magnitude = math.exp(sum(mi * li for mi, li in zip(m, logs)))
            if abs(magnitude - 1.0) > 1e-12:
                continue
            if sum(mi for mi, neg in zip(m, negative) if neg) % 2 == 0:
                return ResonanceResult(False, max_total_exponent, m)
    return ResonanceResult(True, max_total_exponent)


def continuity_residuals(fmap: PiecewiseMonotoneMap) -> list[float]:
    out = []
    for i in range(fmap.n_pieces - 1):
        a = fmap.breakpoints[i + 1]
        out.append(abs(fmap.branches[i](a) - fmap.branches[i + 1](a)))
    return out


def maps_into_unit_interval(fmap: PiecewiseMonotoneMap) -> bool:
    for br in fmap.branches:
        lo, hi = br.image()
        if lo < -STRUCT_TOL or hi > 1.0 + STRUCT_TOL:
            return False
    return True


def iterate(fmap: PiecewiseMonotoneMap, x: float, m: int) -> float:
    for _ in range(m):
        x = eval_map(fmap, x)
    return x

