"""Pressure ``P(log|g|)`` from periodic-orbit sums and the inequality
``theta <= r <= max(theta, exp P)``."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .maps import PiecewiseMonotoneMap
from .periodic import RepresentativeSet, trace_sums
from .weights import Weight

LEFT_TOL = 1e-6
RIGHT_ABS = 1e-6
RELATIVE_SLACK = 0.02
EIGEN_GAP = 1.05


@dataclass(frozen=True)
class PressureEstimate:
    p_sequence: tuple
    extrapolated: Optional[float]
    method: str
    residual: float = 0.0
    diagnostic: str = ""

    @property
    def defined(self) -> bool:
        return self.extrapolated is not None


def fit_pressure(p_sequence: Sequence[Optional[float]]) -> tuple:
    """Least squares ``P_m = P + c/m`` over the upper half of the finite ``m``.

    Returns ``(P, rms residual)``.
    """
    pts = [(m, p) for m, p in enumerate(p_sequence, start=1) if p is not None and math.isfinite(p)]
    if not pts:
        raise ValueError("no finite P_m")
    top = pts[len(pts) // 2:]
    if len(top) == 1:
        return top[0][1], 0.0
    m = np.array([q[0] for q in top], dtype=float)
    p = np.array([q[1] for q in top])
    design = np.column_stack([np.ones_like(m), 1.0 / m])
    coef, *_ = np.linalg.lstsq(design, p, rcond=None)
    resid = p - design @ coef
    return float(coef[0]), float(np.sqrt(np.mean(resid ** 2)))


def pressure_from_traces(abs_traces: Sequence[float]) -> PressureEstimate:
    t = np.asarray(abs_traces, dtype=float)
    if len(t) < 4:
        raise ValueError("pressure needs m_max >= 4")
    if np.any(t < 0):
        raise ValueError("T_m(|g|) must be nonnegative")
    if not np.any(t > 0):
        return PressureEstimate(tuple([None] * len(t)), None, "undefined",
                                diagnostic="all trace sums T_m(|g|) vanish")
    seq = tuple(math.log(v) / m if v > 0 else None for m, v in enumerate(t, start=1))
    p_hat, resid = fit_pressure(seq)
    return PressureEstimate(seq, p_hat, "orbit-sum 1/m fit", resid)


def pressure_from_orbits(fmap: PiecewiseMonotoneMap, weight: Weight, rep: RepresentativeSet,
                         m_max: Optional[int] = None) -> PressureEstimate:
    """``P_m = (1/m) log T_m(|g|)`` and its ``1/m`` extrapolation."""
    t = trace_sums(fmap, weight, rep, m_max, absolute=True)
    return pressure_from_traces(np.real(t))


@dataclass(frozen=True)
class BoundsReport:
    theta: float
    r: float
    p_hat: Optional[float]
    left_ok: bool
    right_ok: bool
    eigen_claim_ok: Optional[bool]
    residuals: dict = field(default_factory=dict)
    degenerate: bool = False

    @property
    def ok(self) -> bool:
        return self.left_ok and self.right_ok and self.eigen_claim_ok is not False


def verify_pressure_bounds(theta: float, r: float, p_hat: Optional[float], g_nonneg: bool,
                           eigenvalues: Sequence[complex] = (), match_tol: float = 1e-6) -> BoundsReport:
    """Check ``theta <= r <= max(theta, e^P)`` and, for ``g >= 0`` with a
    spectral gap above theta, ``r = e^P`` with ``r`` an eigenvalue."""
    if p_hat is None:
        # zero operator: nothing to bound
        vacuous = r <= LEFT_TOL
        return BoundsReport(theta, r, None, vacuous and theta <= r + LEFT_TOL, vacuous, None,
                            {"note": "pressure undefined"}, degenerate=True)
    e_p = math.exp(p_hat)
    left = theta - r
    right = r - max(theta, e_p)
    res = {"left": left, "right": right}
    eigen_ok = None
    if g_nonneg and r > theta * EIGEN_GAP:
        gap = abs(r - e_p)
        on_axis = min((abs(complex(v) - r) for v in eigenvalues), default=math.inf)
        res["eigen"] = gap
        res["eigen_match"] = on_axis
        eigen_ok = gap <= RELATIVE_SLACK * r and on_axis <= match_tol
    return BoundsReport(theta, r, p_hat, left <= LEFT_TOL,
                        right <= max(RIGHT_ABS, RELATIVE_SLACK * r), eigen_ok, res)
