"""Finite-rank transfer matrices, their spectra, the growth rate theta and the
zero/eigenvalue cross-check.

The transfer operator acts by ``(L phi)(x) = sum_{f(y) = x} g(y) phi(y)``.
Matrices act on column vectors of coefficients of piecewise-constant
functions, so entry ``[target, source]`` carries the weight of the source
interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .maps import PiecewiseMonotoneMap, STRUCT_TOL
from .series import ZetaResult, markov_transfer_matrix
from .symbolic import (
    CylinderCapExceeded,
    TransitionStructure,
    cylinder_levels,
    detect_markov,
)
from .weights import AffineWeight, ConstantWeight, Weight

DEFAULT_BINS = 512
# run configs ask for at least 16 bins; tiny n stays available for hand checks
MIN_BINS = 2
MAX_BINS = 8192
DEFAULT_MARGIN = 0.05
EXACT_MATCH_TOL = 1e-6
THETA_LEVELS = 10
_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(5)


@dataclass(frozen=True)
class TransferMatrix:
    entries: np.ndarray
    kind: str
    bins: Optional[int] = None

    @property
    def order(self) -> int:
        return self.entries.shape[0]


def exact_transfer_matrix(ts: TransitionStructure, g_values) -> TransferMatrix:
    """``M[j, i] = g_i`` when ``J_j ⊆ f(J_i)``; exact for Markov maps with
    weights constant on the partition."""
    if ts is None or not ts.markov:
        raise ValueError("exact transfer matrix needs a Markov map")
    if g_values is None:
        raise ValueError("exact transfer matrix needs a weight constant on each J_i")
    return TransferMatrix(markov_transfer_matrix(ts, g_values), "exact-markov")


def _weight_nodes(weight: Weight) -> np.ndarray:
    if isinstance(weight, ConstantWeight):
        return np.asarray(weight.grid[1:-1])
    if isinstance(weight, AffineWeight):
        return np.asarray(weight.nodes[1:-1])
    return np.empty(0)


def _segment_integral(weight: Weight, br, i: int, a: float, b: float, exact: bool) -> complex:
    """``int_a^b g(y) |f'(y)| dy`` on a piece where ``g`` has no break."""
    if exact:
        mid = 0.5 * (a + b)
        return complex(weight.piece_value(mid, i)) * abs(br.slope) * (b - a)
    y = 0.5 * (a + b) + 0.5 * (b - a) * _GAUSS_X
    vals = weight.piece_value(y, np.full(len(y), i)) * np.abs(br.derivative(y))
    return complex(0.5 * (b - a) * np.dot(_GAUSS_W, vals))


def ulam_matrix(fmap: PiecewiseMonotoneMap, weight: Weight, n: int = DEFAULT_BINS) -> TransferMatrix:
    """Ulam (bin-average) discretisation on ``n`` uniform bins.

    ``M[l, k] = n * sum_b int_{I_k ∩ J_b ∩ f_b^{-1}(I_l)} g |f_b'| dy``; the
    integral is exact for affine branches with weights constant between
    nodes, 5-point Gauss-Legendre per segment otherwise.
    """
    if n < MIN_BINS or n > MAX_BINS or n & (n - 1):
        raise ValueError(f"bins must be a power of two in [{MIN_BINS}, {MAX_BINS}]")
    out = np.zeros((n, n), dtype=complex)
    nodes = _weight_nodes(weight)
    piecewise_const = isinstance(weight, ConstantWeight) or weight.kind == "reciprocal_derivative"
    for i, br in enumerate(fmap.branches):
        exact = br.is_affine and piecewise_const
        k_first = int(math.floor(br.lo * n))
        k_last = min(n - 1, int(math.ceil(br.hi * n)) - 1)
        for k in range(k_first, k_last + 1):
            d_lo, d_hi = max(k / n, br.lo), min((k + 1) / n, br.hi)
            if d_hi - d_lo <= 0:
                continue
            y0, y1 = br(d_lo), br(d_hi)
            ymin, ymax = min(y0, y1), max(y0, y1)
            l_first = max(0, int(math.floor(ymin * n)))
            l_last = min(n - 1, int(math.ceil(ymax * n)) - 1)
            for l in range(l_first, max(l_first, l_last) + 1):
                u, v = max(ymin, l / n), min(ymax, (l + 1) / n)
                if v - u <= 0:
                    continue
                p, q = br.inverse_array(np.array([u, v]))
                s0, s1 = max(min(p, q), d_lo), min(max(p, q), d_hi)
                if s1 - s0 <= 0:
                    continue
                cuts = nodes[(nodes > s0) & (nodes < s1)]
                pts = np.concatenate(([s0], cuts, [s1]))
                total = 0j
                for a, b in zip(pts[:-1], pts[1:]):
                    total += _segment_integral(weight, br, i, a, b, exact)
                out[l, k] += n * total
    return TransferMatrix(out, "ulam", n)


@dataclass(frozen=True)
class ThetaEstimate:
    value: float
    method: str
    s_sequence: tuple = ()


def _max_cycle_mean(logw: np.ndarray, t: np.ndarray) -> float:
    """Karp's maximum mean cycle; edge ``i -> j`` (``t[i, j] = 1``) weighs ``logw[i]``."""
    n = len(logw)
    neg = -math.inf
    d = np.full((n + 1, n), neg)
    d[0, :] = 0.0
    for k in range(1, n + 1):
        for j in range(n):
            best = neg
            for i in range(n):
                if t[i, j] and d[k - 1, i] > neg and logw[i] > neg:
                    best = max(best, d[k - 1, i] + logw[i])
            d[k, j] = best
    result = neg
    for v in range(n):
        if d[n, v] == neg:
            continue
        worst = math.inf
        for k in range(n):
            if d[k, v] == neg:
                continue
            worst = min(worst, (d[n, v] - d[k, v]) / (n - k))
        result = max(result, worst)
    return result


def theta_sequence(fmap: PiecewiseMonotoneMap, weight: Weight, m_cap: int = THETA_LEVELS,
                   cap: int = 2 ** 18) -> tuple:
    """``s_m = log max_C prod_k sup_{f^k C} |g|`` over length-m cylinders ``C``.

    The per-step sup is exact for each weight kind and monotone under
    inclusion, so ``s`` is subadditive.
    """
    a, b, c = fmap.coefficient_arrays()
    out = []
    try:
        for level in cylinder_levels(fmap, m_cap, cap):
            words = level.words.astype(np.int64)
            lo, hi = level.lo.copy(), level.hi.copy()
            logp = np.zeros(len(lo))
            for k in range(level.m):
                idx = words[:, k]
                u, v = np.minimum(lo, hi), np.maximum(lo, hi)
                with np.errstate(divide="ignore"):
                    logp += np.log(weight.sup_abs_array(u, v, idx))
                lo = (a[idx] * lo + b[idx]) * lo + c[idx]
                hi = (a[idx] * hi + b[idx]) * hi + c[idx]
            out.append(float(np.max(logp)) if len(logp) else -math.inf)
    except CylinderCapExceeded:
        pass
    return tuple(out)


def theta_estimate(fmap: PiecewiseMonotoneMap, weight: Weight, m_cap: int = THETA_LEVELS) -> ThetaEstimate:
    """Growth rate of sup-orbit weight products.

    Markov map with ``g`` constant on each ``J_i``: exact maximum cycle
    geometric mean of ``|g|`` over the transition graph.  Otherwise the
    infimum of ``s_m / m`` (Fekete), an upper-bound flavoured estimate.
    """
    s = theta_sequence(fmap, weight, m_cap)
    g = weight.partition_values
    ts = detect_markov(fmap)
    if g is not None and ts is not None:
        with np.errstate(divide="ignore"):
            logw = np.log(np.abs(g))
        mean = _max_cycle_mean(logw, ts.matrix)
        value = 0.0 if mean == -math.inf else math.exp(mean)
        return ThetaEstimate(value, "max-cycle-mean", s)
    if not s:
        raise ValueError("no cylinder level fits the work cap")
    best = min(v / (m + 1) for m, v in enumerate(s))
    value = 0.0 if best == -math.inf else math.exp(best)
    method = "cylinder-word-products" if g is not None else "cylinder-sup-bound"
    return ThetaEstimate(value, method, s)


@dataclass
class SpectrumReport:
    eigenvalues: np.ndarray
    r: float
    theta: float
    theta_method: str
    threshold: float
    dominant_above_theta: np.ndarray
    kind: str
    bins: Optional[int] = None
    margin: float = DEFAULT_MARGIN
    backward_error: float = 0.0
    converged: bool = True


def _sorted_eigs(vals: np.ndarray) -> np.ndarray:
    vals = np.asarray(vals, dtype=complex)
    # imaginary parts flushed to 0 when negligible so conjugate order is stable
    vals = np.where(np.abs(vals.imag) <= 1e-14 * np.maximum(1.0, np.abs(vals)), vals.real + 0j, vals)
    order = np.lexsort((-vals.imag, -vals.real, -np.round(np.abs(vals), 12)))
    return vals[order]


def eigen_spectrum(tm: TransferMatrix, theta: float = 0.0, theta_method: str = "given",
                   margin: float = DEFAULT_MARGIN, rho: Optional[float] = None) -> SpectrumReport:
    """All eigenvalues (dense LAPACK ``geev``), descending modulus.

    ``dominant_above_theta`` keeps ``|lambda| > theta (1 + margin)``; when a
    zeta validity radius ``rho`` is given the cut is also at least ``1/rho``
    so both sides of the cross-check see the same annulus.
    """
    a = tm.entries
    if a.shape[0] > 8192:
        raise ValueError("matrix order above 8192")
    converged = True
    try:
        vals, vecs = np.linalg.eig(a)
        resid = np.linalg.norm(a @ vecs - vecs * vals, axis=0)
        backward = float(np.max(resid / np.maximum(np.linalg.norm(vecs, axis=0), 1e-300))) if len(vals) else 0.0
    except np.linalg.LinAlgError:
        vals, backward, converged = np.linalg.eigvals(a), math.nan, False
    vals = _sorted_eigs(vals)
    r = float(np.max(np.abs(vals))) if len(vals) else 0.0
    cut = theta * (1.0 + margin)
    if rho is not None and rho > 0:
        cut = max(cut, 1.0 / rho)
    above = vals[np.abs(vals) > cut]
    return SpectrumReport(vals, r, theta, theta_method, cut, above, tm.kind, tm.bins, margin,
                          backward, converged)


@dataclass
class MatchReport:
    verdict: str
    pairs: list = field(default_factory=list)
    unmatched_zeros: list = field(default_factory=list)
    unmatched_eigenvalues: list = field(default_factory=list)
    tolerance: float = EXACT_MATCH_TOL

    @property
    def ok(self) -> bool:
        return self.verdict in ("match", "no testable pairs")


def match_tolerance(spec: SpectrumReport, exact_tol: float = EXACT_MATCH_TOL) -> float:
    if spec.kind == "ulam":
        return 10.0 / spec.bins
    return exact_tol


def bk_crosscheck(zeta: ZetaResult, spec: SpectrumReport, tol: Optional[float] = None) -> MatchReport:
    """Greedy nearest-neighbour matching of ``{1/z}`` (stable zeros inside the
    validity disk, repeated by multiplicity) against eigenvalues above the cut."""
    tol = match_tolerance(spec) if tol is None else tol
    recips = []
    for z in zeta.stable_zeros:
        recips.extend([complex(z.reciprocal)] * z.multiplicity)
    eigs = [complex(v) for v in spec.dominant_above_theta]
    if not recips and not eigs:
        return MatchReport("no testable pairs", tolerance=tol)
    cand = sorted(
        (abs(a - b), i, j) for i, a in enumerate(recips) for j, b in enumerate(eigs)
    )
    used_r, used_e, pairs = set(), set(), []
    for dist, i, j in cand:
        if i in used_r or j in used_e or dist > tol:
            continue
        used_r.add(i)
        used_e.add(j)
        pairs.append((recips[i], eigs[j], dist))
    un_r = [v for i, v in enumerate(recips) if i not in used_r]
    un_e = [v for j, v in enumerate(eigs) if j not in used_e]
    verdict = "match" if not un_r and not un_e else "mismatch"
    return MatchReport(verdict, pairs, un_r, un_e, tol)


def spectrum_for(fmap: PiecewiseMonotoneMap, weight: Weight, bins: int = DEFAULT_BINS) -> TransferMatrix:
    """Exact matrix for affine Markov maps with partition-constant weights, Ulam otherwise."""
    ts = detect_markov(fmap)
    g = weight.partition_values
    if ts is not None and g is not None and fmap.all_affine:
        return exact_transfer_matrix(ts, g)
    return ulam_matrix(fmap, weight, bins)


def relabel(fmap_matrix: np.ndarray, perm) -> np.ndarray:
    """Conjugate a transfer matrix by a relabelling of partition intervals."""
    p = np.eye(len(perm))[list(perm)]
    return p @ fmap_matrix @ p.T


def is_structurally_equal(a: float, b: float) -> bool:
    return abs(a - b) <= STRUCT_TOL
