"""Truncated power series for ``d(z)`` and ``zeta(z) = 1/d(z)``, their zeros,
and the exact determinant ``det(I - zM)`` for Markov data."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .symbolic import TransitionStructure

DEFAULT_ORDER = 14
ZERO_MERGE = 1e-6
TRIM_RELATIVE = 1e-13
NEWTON_STEPS = 8


@dataclass(frozen=True)
class PowerSeries:
    coefficients: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coefficients", np.asarray(self.coefficients, dtype=complex))

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, z):
        # numpy.polyval wants the highest power first
        return np.polyval(self.coefficients[::-1], z)

    def truncated(self, order: int) -> "PowerSeries":
        return PowerSeries(self.coefficients[: order + 1])

    def __mul__(self, other: "PowerSeries") -> "PowerSeries":
        n = min(self.order, other.order) + 1
        return PowerSeries(np.convolve(self.coefficients, other.coefficients)[:n])


def d_series_from_traces(traces: Sequence[complex]) -> PowerSeries:
    """Coefficients of ``exp(-sum_m T_m z^m / m)`` up to ``z^M``.

    From ``d' = u' d`` with ``u = -sum T_m z^m / m``:
    ``n c_n = -sum_{m=1}^{n} T_m c_{n-m}``.
    """
    t = np.asarray(traces, dtype=complex)
    order = len(t)
    if order < 1:
        raise ValueError("need at least one trace sum")
    c = np.zeros(order + 1, dtype=complex)
    c[0] = 1.0
    for n in range(1, order + 1):
        c[n] = -np.dot(t[:n], c[n - 1::-1]) / n
    return PowerSeries(c)


def zeta_series(d: PowerSeries) -> PowerSeries:
    c = d.coefficients
    if abs(c[0] - 1.0) > 1e-12:
        raise ValueError("reciprocal series needs c_0 = 1")
    out = np.zeros_like(c)
    out[0] = 1.0
    for n in range(1, len(c)):
        out[n] = -np.dot(c[1:n + 1], out[n - 1::-1])
    return PowerSeries(out)


def series_log(d: PowerSeries) -> PowerSeries:
    """``log d`` for ``d(0) = 1``, via ``n l_n = n c_n - sum_{k<n} k l_k c_{n-k}``."""
    c = d.coefficients
    if abs(c[0] - 1.0) > 1e-12:
        raise ValueError("series logarithm needs c_0 = 1")
    out = np.zeros_like(c)
    for n in range(1, len(c)):
        k = np.arange(1, n)
        out[n] = c[n] - np.dot(k * out[1:n], c[n - 1:0:-1]) / n
    return PowerSeries(out)


def traces_from_log(log_d: PowerSeries) -> np.ndarray:
    """Invert ``-log d = sum T_m z^m / m``."""
    m = np.arange(1, len(log_d.coefficients))
    return -m * log_d.coefficients[1:]


@dataclass(frozen=True)
class Zero:
    location: complex
    multiplicity: int
    stability: float
    stable: bool
    inside: bool

    @property
    def reciprocal(self) -> complex:
        return 1.0 / self.location


@dataclass
class ZetaResult:
    d_series: PowerSeries
    zeros: list
    validity_radius: float
    outside: list = field(default_factory=list)

    @property
    def stable_zeros(self) -> list:
        return [z for z in self.zeros if z.stable]


def _trimmed(coefs: np.ndarray) -> np.ndarray:
    scale = np.max(np.abs(coefs))
    keep = len(coefs)
    while keep > 1 and abs(coefs[keep - 1]) <= TRIM_RELATIVE * scale:
        keep -= 1
    return coefs[:keep]


def _roots(coefs: np.ndarray) -> np.ndarray:
    coefs = _trimmed(coefs)
    if len(coefs) < 2:
        return np.empty(0, dtype=complex)
    return np.roots(coefs[::-1]).astype(complex)


def _newton(coefs: np.ndarray, z: complex) -> complex:
    p = np.poly1d(coefs[::-1])
    dp = p.deriv()
    for _ in range(NEWTON_STEPS):
        dz = dp(z)
        if dz == 0:
            break
        step = p(z) / dz
        z = z - step
        if abs(step) <= 1e-16 * max(1.0, abs(z)):
            break
    return complex(z)


def _cluster(roots: Sequence[complex]) -> list:
    groups = []
    for r in sorted(roots, key=lambda v: (abs(v), v.real, v.imag)):
        for g in groups:
            if abs(g[0] - r) <= ZERO_MERGE:
                g.append(r)
                break
        else:
            groups.append([r])
    return [(complex(np.mean(g)), len(g)) for g in groups]


def find_zeros_in_disk(d: PowerSeries, rho: float) -> ZetaResult:
    """Zeros of the degree-M truncation of ``d`` with ``|z| <= rho``.

    Roots come from the companion matrix, are polished by Newton on the
    truncation, and are merged into multiplicities within 1e-6.  Stability is
    the shift of each root when the truncation order drops by two; shifts
    beyond ``1e-4 * rho`` mark a zero unstable (reported, not dropped).
    Roots beyond ``rho`` are returned separately in ``outside``; ``rho`` may be
    infinite (theta = 0).
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    coefs = d.coefficients
    if d.order < 4:
        raise ValueError("zero finding needs truncation order >= 4")
    raw = [_newton(coefs, r) for r in _roots(coefs)]
    lower = _roots(coefs[:-2])
    inside, outside = [], []
    for z, mult in _cluster(raw):
        shift = float(np.min(np.abs(lower - z))) if len(lower) else float("inf")
        # no finite disk when theta = 0: judge the shift relative to the root
        scale = rho if np.isfinite(rho) else max(1.0, abs(z))
        stable = shift <= 1e-4 * scale
        zero = Zero(z, mult, shift, stable, abs(z) <= rho)
        (inside if zero.inside else outside).append(zero)
    return ZetaResult(d, inside, rho, outside)


def _det_exact(mat) -> object:
    """Determinant by fraction-exact elimination (complex entries: plain complex)."""
    a = [row[:] for row in mat]
    n = len(a)
    det = 1
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            return 0
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            det = -det
        det = det * a[col][col]
        for r in range(col + 1, n):
            factor = a[r][col] / a[col][col]
            if factor != 0:
                a[r] = [x - factor * y for x, y in zip(a[r], a[col])]
    return det


def _exact(v):
    v = complex(v)
    if v.imag == 0:
        return Fraction(v.real)
    return v


def det_expansion(m: np.ndarray) -> np.ndarray:
    """``det(I - zM) = sum_k (-z)^k e_k`` with ``e_k`` the sum of k-by-k principal minors."""
    n = m.shape[0]
    mat = [[_exact(m[i, j]) for j in range(n)] for i in range(n)]
    out = np.zeros(n + 1, dtype=complex)
    out[0] = 1.0
    for k in range(1, n + 1):
        e_k = 0
        for idx in itertools.combinations(range(n), k):
            e_k += _det_exact([[mat[i][j] for j in idx] for i in idx])
        out[k] = (-1) ** k * complex(e_k)
    return out


def faddeev_leverrier(m: np.ndarray) -> np.ndarray:
    """``det(I - zM) = 1 + c_1 z + ... + c_N z^N`` where the ``c_k`` are the
    coefficients of ``det(lambda I - M)``."""
    m = np.asarray(m, dtype=complex)
    n = m.shape[0]
    out = np.zeros(n + 1, dtype=complex)
    out[0] = 1.0
    aux = np.zeros_like(m)
    for k in range(1, n + 1):
        aux = m @ aux + out[k - 1] * np.eye(n)
        out[k] = -np.trace(m @ aux) / k
    return out


def markov_transfer_matrix(ts: TransitionStructure, g_values) -> np.ndarray:
    """``M[j, i] = g_i * t[i, j]``."""
    g = np.asarray(g_values, dtype=complex)
    if len(g) != ts.n:
        raise ValueError("need one weight value per partition interval")
    return (ts.matrix * g[:, None]).T.astype(complex)


def markov_determinant_oracle(ts: TransitionStructure, g_values) -> PowerSeries:
    if ts is None or not ts.markov:
        raise ValueError("determinant oracle needs a Markov map")
    m = markov_transfer_matrix(ts, g_values)
    if ts.n <= 8:
        return PowerSeries(det_expansion(m))
    return PowerSeries(faddeev_leverrier(m))
