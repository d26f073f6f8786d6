"""Orchestration: validate -> cylinders -> representative set -> trace sums ->
d series (+ Markov determinant) -> zeros -> spectrum -> theta -> pressure ->
bounds -> zero/eigenvalue cross-check."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .config import RunConfig
from .maps import MapError
from .periodic import Certificate, RepresentativeSet, build_representative_set, \
    representativity_certificate, trace_sums
from .pressure import BoundsReport, PressureEstimate, pressure_from_traces, verify_pressure_bounds
from .series import PowerSeries, ZetaResult, d_series_from_traces, find_zeros_in_disk, \
    markov_determinant_oracle, zeta_series
from .spectral import MatchReport, SpectrumReport, ThetaEstimate, TransferMatrix, bk_crosscheck, \
    eigen_spectrum, match_tolerance, spectrum_for, theta_estimate
from .symbolic import CylinderLevel, cylinder_level, detect_markov
from .validation import MapValidationReport, validate_map

VALIDITY_FRACTION = 0.95
# CSV tables of cylinders / periodic records stop at this level; counts grow like N^m
TABLE_LEVEL = 10

STAGES = {
    "validate": ("validate",),
    "cylinders": ("validate", "cylinders"),
    "periodic": ("validate", "periodic"),
    "zeta": ("validate", "periodic", "theta", "zeta"),
    "spectrum": ("validate", "theta", "spectrum"),
    "pressure": ("validate", "periodic", "theta", "spectrum", "pressure"),
    "verify": ("validate", "cylinders", "periodic", "theta", "zeta", "spectrum", "pressure", "crosscheck"),
}


class PipelineError(RuntimeError):
    pass


@dataclass
class VerifyReport:
    config: RunConfig
    command: str = "verify"
    validation: Optional[MapValidationReport] = None
    certificate: Optional[Certificate] = None
    cylinders: Optional[CylinderLevel] = None
    rep: Optional[RepresentativeSet] = None
    traces: Optional[np.ndarray] = None
    abs_traces: Optional[np.ndarray] = None
    d_series: Optional[PowerSeries] = None
    zeta_coefficients: Optional[PowerSeries] = None
    oracle: Optional[PowerSeries] = None
    oracle_deviation: Optional[float] = None
    zeta: Optional[ZetaResult] = None
    theta: Optional[ThetaEstimate] = None
    transfer: Optional[TransferMatrix] = None
    spectrum: Optional[SpectrumReport] = None
    pressure: Optional[PressureEstimate] = None
    bounds: Optional[BoundsReport] = None
    match: Optional[MatchReport] = None
    wall_time: float = 0.0
    warnings: list = field(default_factory=list)

    @property
    def zeta_semantics(self) -> str:
        if self.certificate is None:
            return "unknown"
        return "zeta" if self.certificate.per_f_representative else "zeta_S"

    @property
    def validity_radius(self) -> float:
        theta = self.theta.value if self.theta else 0.0
        return VALIDITY_FRACTION / theta if theta > 0 else math.inf

    @property
    def exit_code(self) -> int:
        if self.match is not None and self.match.verdict == "mismatch":
            return 1
        return 0


def _stage_validate(rep: VerifyReport):
    cfg = rep.config
    rep.validation = validate_map(cfg.fmap, cfg.weight)
    if not rep.validation.ok:
        bad = "not continuous" if not rep.validation.continuous else "does not map [0, 1] into itself"
        raise PipelineError(f"map {bad}")
    rep.certificate = representativity_certificate(cfg.fmap, rep.validation)


def _stage_periodic(rep: VerifyReport):
    cfg = rep.config
    rep.rep = build_representative_set(cfg.fmap, cfg.order)
    rep.rep.provenance = rep.certificate.label
    rep.rep.conditions = rep.certificate.conditions
    rep.warnings.extend(rep.rep.warnings)
    rep.traces = trace_sums(cfg.fmap, cfg.weight, rep.rep)
    rep.abs_traces = np.real(trace_sums(cfg.fmap, cfg.weight, rep.rep, absolute=True))


def _stage_zeta(rep: VerifyReport):
    cfg = rep.config
    rep.d_series = d_series_from_traces(rep.traces)
    rep.zeta_coefficients = zeta_series(rep.d_series)
    ts = detect_markov(cfg.fmap)
    g = cfg.weight.partition_values
    if ts is not None and g is not None:
        rep.oracle = markov_determinant_oracle(ts, g)
        padded = np.zeros(len(rep.d_series.coefficients), dtype=complex)
        k = min(len(padded), len(rep.oracle.coefficients))
        padded[:k] = rep.oracle.coefficients[:k]
        rep.oracle_deviation = float(np.max(np.abs(padded - rep.d_series.coefficients)))
    rep.zeta = find_zeros_in_disk(rep.d_series, rep.validity_radius)


def _stage_spectrum(rep: VerifyReport):
    cfg = rep.config
    rep.transfer = spectrum_for(cfg.fmap, cfg.weight, cfg.ulam_bins)
    rho = rep.validity_radius
    rep.spectrum = eigen_spectrum(rep.transfer, rep.theta.value, rep.theta.method, cfg.margin,
                                  None if math.isinf(rho) else rho)
    if not rep.spectrum.converged:
        rep.warnings.append("eigensolver did not converge")


def _stage_pressure(rep: VerifyReport):
    cfg = rep.config
    rep.pressure = pressure_from_traces(rep.abs_traces)
    tol = match_tolerance(rep.spectrum, cfg.tolerance)
    rep.bounds = verify_pressure_bounds(rep.theta.value, rep.spectrum.r, rep.pressure.extrapolated,
                                        cfg.weight.is_nonnegative, rep.spectrum.eigenvalues, tol)


def run_pipeline(cfg: RunConfig, command: str = "verify") -> VerifyReport:
    if command not in STAGES:
        raise ValueError(f"unknown command {command!r}")
    start = time.perf_counter()
    rep = VerifyReport(cfg, command)
    try:
        for stage in STAGES[command]:
            if stage == "validate":
                _stage_validate(rep)
            elif stage == "cylinders":
                rep.cylinders = cylinder_level(cfg.fmap, min(cfg.order, TABLE_LEVEL))
            elif stage == "periodic":
                _stage_periodic(rep)
            elif stage == "theta":
                rep.theta = theta_estimate(cfg.fmap, cfg.weight)
            elif stage == "zeta":
                _stage_zeta(rep)
            elif stage == "spectrum":
                _stage_spectrum(rep)
            elif stage == "pressure":
                _stage_pressure(rep)
            elif stage == "crosscheck":
                tol = match_tolerance(rep.spectrum, cfg.tolerance)
                rep.match = bk_crosscheck(rep.zeta, rep.spectrum, tol)
    except MapError as exc:
        raise PipelineError(str(exc)) from None
    rep.wall_time = time.perf_counter() - start
    return rep


def run_verify(cfg: RunConfig) -> VerifyReport:
    return run_pipeline(cfg, "verify")
