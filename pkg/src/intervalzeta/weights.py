"""Bounded-variation weights ``g`` and orbit weight products.

Three kinds are supported, each with exact per-piece structure:

* :class:`ConstantWeight` -- constant on the cells of a grid (by default the
  map's own partition), complex values allowed;
* :class:`AffineWeight` -- continuous, piecewise-affine between nodes, complex
  values allowed;
* :class:`ReciprocalDerivativeWeight` -- ``g = c / |f'|`` with real ``c``.

Every weight is bound to the map it weights.  ``piece_value(x, i)`` evaluates
``g`` restricted to the closed piece ``J_i`` (one-sided limits at its ends),
which is what products along a symbol word need.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .maps import MapError, PiecewiseMonotoneMap, STRUCT_TOL

RECIPROCAL_MIN_DERIVATIVE = 1e-9
_OVERFLOW_GUARD = 1e100


class Weight:
    fmap: PiecewiseMonotoneMap
    kind: str = "abstract"

    def __call__(self, x):
        raise NotImplementedError

    def piece_value(self, x, i):
        raise NotImplementedError

    def sup_abs(self, lo: float, hi: float, i: int) -> float:
        """Exact ``sup |g|`` over ``[lo, hi]`` inside piece ``i``."""
        raise NotImplementedError

    def sup_abs_array(self, lo: np.ndarray, hi: np.ndarray, i: np.ndarray) -> np.ndarray:
        return np.array([self.sup_abs(a, b, int(k)) for a, b, k in zip(lo, hi, i)])

    def total_variation(self) -> float:
        raise NotImplementedError

    def scaled(self, c: float) -> "Weight":
        raise NotImplementedError

    @property
    def partition_values(self) -> Optional[np.ndarray]:
        """Per-piece values when ``g`` is constant on each ``J_i``, else None."""
        return None

    @property
    def is_nonnegative(self) -> bool:
        raise NotImplementedError


def _as_complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise MapError(f"complex weight value must be [re, im], got {v!r}")
        return complex(float(v[0]), float(v[1]))
    return complex(v)


@dataclass(frozen=True, eq=False)
class ConstantWeight(Weight):
    fmap: PiecewiseMonotoneMap
    values: tuple
    grid: tuple = ()

    kind = "constant"

    def __post_init__(self):
        grid = tuple(float(v) for v in self.grid) or self.fmap.breakpoints
        values = tuple(_as_complex(v) for v in self.values)
        if grid[0] != 0.0 or grid[-1] != 1.0 or any(b <= a for a, b in zip(grid, grid[1:])):
            raise MapError("weight grid must increase from 0 to 1")
        if len(values) != len(grid) - 1:
            raise MapError(f"weight has {len(values)} values for {len(grid) - 1} cells")
        if not all(cmath.isfinite(v) for v in values):
            raise MapError("weight values must be finite")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_vals", np.array(values, dtype=complex))
        object.__setattr__(self, "_inner", np.array(grid[1:-1]))

    @classmethod
    def uniform(cls, fmap: PiecewiseMonotoneMap, value=1.0) -> "ConstantWeight":
        return cls(fmap, (value,) * fmap.n_pieces)

    @property
    def on_partition(self) -> bool:
        bp = self.fmap.breakpoints
        return len(bp) == len(self.grid) and all(
            abs(a - b) <= STRUCT_TOL for a, b in zip(bp, self.grid)
        )

    @property
    def partition_values(self):
        return self._vals.copy() if self.on_partition else None

    @property
    def is_nonnegative(self) -> bool:
        return bool(np.all(self._vals.imag == 0) and np.all(self._vals.real >= 0))

    def __call__(self, x):
        idx = np.searchsorted(self._inner, x, side="left")
        out = self._vals[idx]
        return complex(out) if np.ndim(out) == 0 else out

    def piece_value(self, x, i):
        if self.on_partition:
            out = self._vals[i]
        else:
            x = np.asarray(x, dtype=float)
            piece_lo = np.asarray(self.fmap.breakpoints)[i]
            left = np.searchsorted(self._inner, x, side="left")
            right = np.searchsorted(self._inner, x, side="right")
            out = self._vals[np.where(x <= piece_lo, right, left)]
        return complex(out) if np.ndim(out) == 0 else out

    def sup_abs(self, lo, hi, i):
        if self.on_partition:
            return abs(self.values[i])
        first = int(np.searchsorted(self._inner, lo, side="right"))
        last = int(np.searchsorted(self._inner, hi, side="left"))
        if lo == hi:
            return abs(self.piece_value(lo, i))
        return float(np.max(np.abs(self._vals[first:last + 1])))

    def sup_abs_array(self, lo, hi, i):
        if self.on_partition:
            return np.abs(self._vals)[i]
        return super().sup_abs_array(lo, hi, i)

    def total_variation(self) -> float:
        return float(np.sum(np.abs(np.diff(self._vals))))

    def scaled(self, c):
        return ConstantWeight(self.fmap, tuple(c * v for v in self.values), self.grid)


@dataclass(frozen=True, eq=False)
class AffineWeight(Weight):
    """Continuous piecewise-affine weight interpolating ``values`` at ``nodes``."""

    fmap: PiecewiseMonotoneMap
    nodes: tuple
    values: tuple

    kind = "piecewise_affine"

    def __post_init__(self):
        nodes = tuple(float(v) for v in self.nodes)
        values = tuple(_as_complex(v) for v in self.values)
        if len(nodes) < 2 or len(nodes) != len(values):
            raise MapError("piecewise-affine weight needs matching nodes and values (>= 2)")
        if nodes[0] != 0.0 or nodes[-1] != 1.0 or any(b <= a for a, b in zip(nodes, nodes[1:])):
            raise MapError("weight nodes must increase from 0 to 1")
        if not all(cmath.isfinite(v) for v in values):
            raise MapError("weight values must be finite")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "_nodes", np.array(nodes))
        object.__setattr__(self, "_vals", np.array(values, dtype=complex))

    @property
    def is_nonnegative(self) -> bool:
        return bool(np.all(self._vals.imag == 0) and np.all(self._vals.real >= 0))

    def __call__(self, x):
        re = np.interp(x, self._nodes, self._vals.real)
        im = np.interp(x, self._nodes, self._vals.imag)
        out = re + 1j * im
        return complex(out) if np.ndim(out) == 0 else out

    def piece_value(self, x, i):
        return self(x)

    def sup_abs(self, lo, hi, i):
        # |affine| is convex on each segment: the max sits at lo, hi or a node
        inside = self._nodes[(self._nodes > lo) & (self._nodes < hi)]
        pts = np.concatenate(([lo, hi], inside))
        return float(np.max(np.abs(self(pts))))

    def sup_abs_array(self, lo, hi, i):
        out = np.maximum(np.abs(self(lo)), np.abs(self(hi)))
        for node, val in zip(self._nodes[1:-1], np.abs(self._vals[1:-1])):
            out = np.where((lo < node) & (node < hi), np.maximum(out, val), out)
        return out

    def total_variation(self) -> float:
        return float(np.sum(np.abs(np.diff(self._vals))))

    def scaled(self, c):
        return AffineWeight(self.fmap, self.nodes, tuple(c * v for v in self.values))


@dataclass(frozen=True, eq=False)
class ReciprocalDerivativeWeight(Weight):
    """``g(x) = scale / |f'(x)|``; rejected when ``f'`` comes near zero."""

    fmap: PiecewiseMonotoneMap
    scale: float = 1.0

    kind = "reciprocal_derivative"

    def __post_init__(self):
        if isinstance(self.scale, complex) or not math.isfinite(self.scale):
            raise MapError("reciprocal-derivative scale must be a finite real")
        if self.fmap.min_abs_derivative() < RECIPROCAL_MIN_DERIVATIVE:
            raise MapError("weight not bounded variation: |f'| vanishes on a branch")
        object.__setattr__(self, "scale", float(self.scale))

    @property
    def partition_values(self):
        if not self.fmap.all_affine:
            return None
        return np.array([self.scale / abs(br.slope) for br in self.fmap.branches], dtype=complex)

    @property
    def is_nonnegative(self) -> bool:
        return self.scale >= 0

    def __call__(self, x):
        i = self.fmap.piece_index(x)
        return self.piece_value(x, i)

    def piece_value(self, x, i):
        a, b, _ = self.fmap.coefficient_arrays()
        out = self.scale / np.abs(2.0 * a[i] * x + b[i]) + 0j
        return complex(out) if np.ndim(out) == 0 else out

    def sup_abs(self, lo, hi, i):
        br = self.fmap.branches[i]
        return abs(self.scale) / min(abs(br.derivative(lo)), abs(br.derivative(hi)))

    def sup_abs_array(self, lo, hi, i):
        a, b, _ = self.fmap.coefficient_arrays()
        d = np.minimum(np.abs(2 * a[i] * lo + b[i]), np.abs(2 * a[i] * hi + b[i]))
        return abs(self.scale) / d

    def total_variation(self) -> float:
        c = abs(self.scale)
        tv = 0.0
        for br in self.fmap.branches:
            tv += abs(c / abs(br.derivative(br.lo)) - c / abs(br.derivative(br.hi)))
        for left, right in zip(self.fmap.branches, self.fmap.branches[1:]):
            tv += abs(c / abs(left.derivative(left.hi)) - c / abs(right.derivative(right.lo)))
        return tv

    def scaled(self, c):
        if isinstance(c, complex) or c < 0:
            raise MapError("reciprocal-derivative weights only scale by c >= 0")
        return ReciprocalDerivativeWeight(self.fmap, self.scale * c)


def orbit_weight_product(fmap: PiecewiseMonotoneMap, weight: Weight, x: float, m: int) -> complex:
    """``prod_{k<m} g(f^k x)`` with the tie rule of :func:`maps.eval_map`.

    Once the running product exceeds 1e100 in modulus it is carried as a unit
    phase times ``exp(log_scale)``.
    """
    from .maps import eval_map

    if m < 1:
        raise ValueError("m must be >= 1")
    prod = 1.0 + 0j
    log_scale = 0.0
    for _ in range(m):
        prod *= weight(x)
        mag = abs(prod)
        if mag > _OVERFLOW_GUARD:
            log_scale += math.log(mag)
            prod /= mag
        if prod == 0:
            return 0j
        x = eval_map(fmap, x)
    if log_scale == 0.0:
        return prod
    try:
        return prod * math.exp(log_scale)
    except OverflowError:
        return complex(math.copysign(math.inf, prod.real), math.copysign(math.inf, prod.imag))


def word_weight_products(fmap: PiecewiseMonotoneMap, weight: Weight, x: np.ndarray,
                         words: np.ndarray) -> np.ndarray:
    """Products of ``g`` along each row of ``words`` (0-based pieces), orbit by branch formulas.

    Evaluating piece-restricted values along the prescribed word keeps the
    result stable for points whose orbits graze breakpoints.
    """
    x = np.asarray(x, dtype=float).copy()
    out = np.ones(len(x), dtype=complex)
    for k in range(words.shape[1]):
        idx = words[:, k]
        lo = np.asarray(fmap.breakpoints)[idx]
        hi = np.asarray(fmap.breakpoints)[idx + 1]
        xk = np.clip(x, lo, hi)
        out *= weight.piece_value(xk, idx)
        x = fmap.apply_branches(idx, xk)
    return out


def build_weight(fmap: PiecewiseMonotoneMap, kind: str, **params) -> Weight:
    if kind == "constant":
        return ConstantWeight(fmap, tuple(params["values"]), tuple(params.get("grid", ())))
    if kind == "piecewise_affine":
        return AffineWeight(fmap, tuple(params["nodes"]), tuple(params["values"]))
    if kind == "reciprocal_derivative":
        return ReciprocalDerivativeWeight(fmap, params.get("scale", 1.0))
    raise MapError(f"unknown weight kind {kind!r}")

