"""JSON and CSV rendering of pipeline results.

JSON floats use Python's shortest round-trip ``repr``; complex numbers with a
nonzero imaginary part become ``[re, im]``; NaN and infinities become null.
Key order is fixed by construction so identical runs give identical bytes
(apart from the wall-time field).
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from typing import Optional

import numpy as np

from . import __version__
from .pipeline import TABLE_LEVEL, VerifyReport
from .symbolic import SymbolWord


class ReportIOError(OSError):
    pass


def _real(v: float):
    v = float(v)
    if not math.isfinite(v):
        return None
    return 0.0 if v == 0.0 else v


def _num(v):
    if v is None:
        return None
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    c = complex(v)
    if c.imag == 0.0:
        return _real(c.real)
    return [_real(c.real), _real(c.imag)]


def _nums(seq):
    return [_num(v) for v in seq]


def _zero_dict(z):
    return {
        "location": _num(z.location),
        "reciprocal": _num(z.reciprocal),
        "multiplicity": z.multiplicity,
        "stability": _real(z.stability),
        "stable": z.stable,
    }


def report_dict(rep: VerifyReport, include_wall_time: bool = True) -> dict:
    cfg = rep.config
    out = {
        "command": rep.command,
        "config": cfg.document,
        "run": {"order": cfg.order, "ulam_bins": cfg.ulam_bins, "margin": _real(cfg.margin),
                "tolerance": _real(cfg.tolerance)},
    }
    if rep.validation is not None:
        out["validation"] = {k: (_nums(v) if isinstance(v, list) else
                                 _num(v) if isinstance(v, float) else v)
                             for k, v in rep.validation.as_dict().items()}
        out["certificate"] = {
            "label": rep.certificate.label,
            "conditions": list(rep.certificate.conditions),
            "per_f_representative": rep.certificate.per_f_representative,
            "zeta_semantics": rep.zeta_semantics,
        }
    if rep.cylinders is not None:
        lvl = rep.cylinders
        out["cylinders"] = {"level": lvl.m, "count": len(lvl),
                            "nondegenerate": int(np.sum(~lvl.degenerate)),
                            "max_width": _real(lvl.max_width())}
    if rep.rep is not None:
        out["periodic"] = {"counts": rep.rep.counts(), "provenance": rep.rep.provenance}
        out["traces"] = _nums(rep.traces)
        out["abs_traces"] = _nums(rep.abs_traces)
    if rep.theta is not None:
        out["theta"] = {"value": _real(rep.theta.value), "method": rep.theta.method,
                        "s_sequence": [_real(v) for v in rep.theta.s_sequence]}
    if rep.d_series is not None:
        out["d_coefficients"] = _nums(rep.d_series.coefficients)
        out["zeta_coefficients"] = _nums(rep.zeta_coefficients.coefficients)
        out["determinant_oracle"] = None if rep.oracle is None else {
            "coefficients": _nums(rep.oracle.coefficients),
            "max_deviation": _real(rep.oracle_deviation),
        }
        out["validity_radius"] = _real(rep.zeta.validity_radius)
        out["zeros"] = [_zero_dict(z) for z in rep.zeta.zeros]
        out["zeros_outside_validity"] = [_zero_dict(z) for z in rep.zeta.outside]
    if rep.spectrum is not None:
        sp = rep.spectrum
        out["spectrum"] = {
            "kind": sp.kind,
            "bins": sp.bins,
            "order": rep.transfer.order,
            "r": _real(sp.r),
            "threshold": _real(sp.threshold),
            "margin": _real(sp.margin),
            "backward_error": _real(sp.backward_error),
            "converged": sp.converged,
            "dominant_above_theta": _nums(sp.dominant_above_theta),
            "eigenvalues": _nums(sp.eigenvalues),
        }
    if rep.pressure is not None:
        p = rep.pressure
        out["pressure"] = {"p_hat": _num(p.extrapolated), "method": p.method,
                           "fit_residual": _real(p.residual), "diagnostic": p.diagnostic,
                           "p_sequence": _nums(p.p_sequence)}
        b = rep.bounds
        out["bounds"] = {"theta": _real(b.theta), "r": _real(b.r), "p_hat": _num(b.p_hat),
                         "left_ok": b.left_ok, "right_ok": b.right_ok,
                         "eigen_claim_ok": b.eigen_claim_ok, "degenerate": b.degenerate,
                         "residuals": {k: _num(v) if not isinstance(v, str) else v
                                       for k, v in b.residuals.items()}}
    if rep.match is not None:
        m = rep.match
        out["bk_crosscheck"] = {
            "verdict": m.verdict,
            "tolerance": _real(m.tolerance),
            "pairs": [{"zero_reciprocal": _num(a), "eigenvalue": _num(b), "distance": _real(d)}
                      for a, b, d in m.pairs],
            "unmatched_zero_reciprocals": _nums(m.unmatched_zeros),
            "unmatched_eigenvalues": _nums(m.unmatched_eigenvalues),
        }
    out["warnings"] = list(rep.warnings)
    out["exit_code"] = rep.exit_code
    prov = {"config_hash": cfg.config_hash, "version": __version__}
    if include_wall_time:
        prov["wall_time_seconds"] = _real(rep.wall_time)
    out["provenance"] = prov
    return out


def render_json(rep: VerifyReport, include_wall_time: bool = True) -> str:
    return json.dumps(report_dict(rep, include_wall_time), indent=2, allow_nan=False) + "\n"


def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def csv_tables(rep: VerifyReport) -> dict:
    """Table name -> CSV text, for every table the run produced."""
    tables = {}
    if rep.traces is not None:
        tables["traces"] = _csv(
            ((m, float(t.real), float(t.imag)) for m, t in enumerate(rep.traces, start=1)),
            ["m", "re_T", "im_T"])
        fm, w = rep.config.fmap, rep.config.weight
        rows = []
        for m in range(1, min(rep.rep.m_max, TABLE_LEVEL) + 1):
            for r in rep.rep.records(m, fm, w):
                rows.append((m, str(r.word), r.x, r.weight_product.real, r.weight_product.imag,
                             int(r.degenerate)))
        tables["periodic"] = _csv(rows, ["m", "word", "x", "re_weight", "im_weight", "degenerate"])
    if rep.cylinders is not None:
        lvl = rep.cylinders
        tables["cylinders"] = _csv(
            ((str(SymbolWord.from_indices(wd)), float(a), float(b))
             for wd, a, b in zip(lvl.words, lvl.lo, lvl.hi)),
            ["word", "lo", "hi"])
    if rep.d_series is not None:
        tables["d_series"] = _csv(
            ((n, float(c.real), float(c.imag)) for n, c in enumerate(rep.d_series.coefficients)),
            ["n", "re_c", "im_c"])
    if rep.pressure is not None:
        tables["pressure"] = _csv(
            ((m, p if p is not None else "") for m, p in enumerate(rep.pressure.p_sequence, start=1)),
            ["m", "P_m"])
    if rep.spectrum is not None or rep.zeta is not None:
        rows = []
        if rep.zeta is not None:
            for z in rep.zeta.zeros:
                rows.append((float(z.reciprocal.real), float(z.reciprocal.imag), "zeta_zero_reciprocal",
                             int(z.stable), 0))
            for z in rep.zeta.outside:
                rows.append((float(z.reciprocal.real), float(z.reciprocal.imag), "zeta_zero_reciprocal",
                             int(z.stable), 1))
        if rep.spectrum is not None:
            for v in rep.spectrum.eigenvalues:
                rows.append((float(v.real), float(v.imag), "eigenvalue", 1, 0))
        tables["plot"] = _csv(rows, ["re", "im", "source", "stable", "outside_validity"])
    return tables


def emit_report(rep: VerifyReport, fmt: str = "json", output: Optional[str] = None,
                stream=None) -> list:
    """Write the report as JSON and/or CSV files into ``output``.

    Without an output directory the JSON goes to ``stream``.  Returns the
    written paths; I/O failures raise :class:`ReportIOError`.
    """
    if fmt not in ("json", "csv", "both"):
        raise ValueError(f"unknown format {fmt!r}")
    written = []
    try:
        if output is None:
            if fmt in ("json", "both") and stream is not None:
                stream.write(render_json(rep))
            if fmt in ("csv", "both") and stream is not None:
                for name, text in csv_tables(rep).items():
                    stream.write(f"# {name}\n{text}")
            return written
        os.makedirs(output, exist_ok=True)
        if fmt in ("json", "both"):
            path = os.path.join(output, "report.json")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(render_json(rep))
            written.append(path)
        if fmt in ("csv", "both"):
            for name, text in csv_tables(rep).items():
                path = os.path.join(output, f"{name}.csv")
                with open(path, "w", encoding="utf-8", newline="") as fh:
                    fh.write(text)
                written.append(path)
    except OSError as exc:
        raise ReportIOError(str(exc)) from exc
    return written
