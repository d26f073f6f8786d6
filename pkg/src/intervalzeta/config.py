"""Run configuration: strict JSON schema with line-numbered diagnostics."""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass
from typing import Optional

from .maps import MapError, PiecewiseMonotoneMap
from .periodic import MAX_PERIOD
from .weights import Weight, build_weight

DEFAULT_ORDER = 14
DEFAULT_ULAM_BINS = 512
DEFAULT_MARGIN = 0.05
DEFAULT_TOLERANCE = 1e-6
MIN_ORDER = 4
FORMATS = ("json", "csv", "both")

_TOP_KEYS = {"map", "weight", "run"}
_MAP_KEYS = {"breakpoints", "branches"}
_BRANCH_KEYS = {"affine": {"kind", "slope", "intercept"}, "quadratic": {"kind", "a", "b", "c"}}
_WEIGHT_KEYS = {
    "constant": {"kind", "values", "grid"},
    "piecewise_affine": {"kind", "nodes", "values"},
    "reciprocal_derivative": {"kind", "scale"},
}
_RUN_KEYS = {"order", "ulam_bins", "margin", "tolerance"}


class ConfigError(ValueError):
    """Schema or semantic error; ``line`` is 1-based when it could be located."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.message = message
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass(frozen=True)
class RunConfig:
    fmap: PiecewiseMonotoneMap
    weight: Weight
    document: dict
    order: int = DEFAULT_ORDER
    ulam_bins: int = DEFAULT_ULAM_BINS
    margin: float = DEFAULT_MARGIN
    tolerance: float = DEFAULT_TOLERANCE
    output: Optional[str] = None
    fmt: str = "json"

    @property
    def config_hash(self) -> str:
        canon = json.dumps(self.document, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()

    def with_overrides(self, order=None, ulam_bins=None, margin=None, output=None,
                       fmt=None) -> "RunConfig":
        cfg = self
        given = {k: v for k, v in (("order", order), ("ulam_bins", ulam_bins), ("margin", margin))
                 if v is not None}
        if given:
            doc = json.loads(json.dumps(self.document))
            doc.setdefault("run", {}).update(given)
            cfg = config_from_document(doc)
        return RunConfig(cfg.fmap, cfg.weight, cfg.document, cfg.order, cfg.ulam_bins, cfg.margin,
                         cfg.tolerance, output if output is not None else self.output,
                         fmt if fmt is not None else self.fmt)


class _Locator:
    """Finds the source line of a key path by scanning for quoted keys in order."""

    def __init__(self, text: Optional[str]):
        self.text = text

    def line(self, *path) -> Optional[int]:
        if not self.text:
            return None
        pos, line = 0, None
        for key in path:
            if not isinstance(key, str):
                continue
            m = re.compile(r'"%s"\s*:' % re.escape(key)).search(self.text, pos)
            if m is None:
                break
            pos = m.end()
            line = self.text.count("\n", 0, m.start()) + 1
        return line


def _number(v, what, loc, *path, integer=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{what} must be a number", loc.line(*path))
    if integer and not (isinstance(v, int) or float(v).is_integer()):
        raise ConfigError(f"{what} must be an integer", loc.line(*path))
    if not math.isfinite(v):
        raise ConfigError(f"{what} must be finite", loc.line(*path))
    return int(v) if integer else float(v)


def _value(v, what, loc, *path):
    if isinstance(v, list):
        if len(v) != 2:
            raise ConfigError(f"{what}: complex values are [re, im] pairs", loc.line(*path))
        return [_number(v[0], what, loc, *path), _number(v[1], what, loc, *path)]
    return _number(v, what, loc, *path)


def _check_keys(obj, allowed, where, loc, *path):
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be an object", loc.line(*path))
    extra = sorted(set(obj) - allowed)
    if extra:
        raise ConfigError(f"unknown key {extra[0]!r} in {where}", loc.line(*path, extra[0]))


def _build_map(doc, loc) -> PiecewiseMonotoneMap:
    _check_keys(doc, _MAP_KEYS, "map", loc, "map")
    for key in ("breakpoints", "branches"):
        if key not in doc:
            raise ConfigError(f"map needs {key!r}", loc.line("map"))
    bps = doc["breakpoints"]
    if not isinstance(bps, list) or len(bps) < 2:
        raise ConfigError("breakpoints must be a list of at least two numbers", loc.line("map", "breakpoints"))
    bps = [_number(v, "breakpoint", loc, "map", "breakpoints") for v in bps]
    branches = doc["branches"]
    if not isinstance(branches, list):
        raise ConfigError("branches must be a list", loc.line("map", "branches"))
    specs = []
    for br in branches:
        if not isinstance(br, dict) or br.get("kind") not in _BRANCH_KEYS:
            raise ConfigError("branch kind must be 'affine' or 'quadratic'", loc.line("map", "branches"))
        _check_keys(br, _BRANCH_KEYS[br["kind"]], "branch", loc, "map", "branches")
        missing = _BRANCH_KEYS[br["kind"]] - set(br)
        if missing:
            raise ConfigError(f"branch missing {sorted(missing)[0]!r}", loc.line("map", "branches"))
        if br["kind"] == "affine":
            specs.append(("affine", _number(br["slope"], "slope", loc, "map", "branches"),
                          _number(br["intercept"], "intercept", loc, "map", "branches")))
        else:
            specs.append(("quadratic",) + tuple(
                _number(br[k], k, loc, "map", "branches") for k in ("a", "b", "c")))
    try:
        return PiecewiseMonotoneMap.from_branches(bps, specs)
    except MapError as exc:
        raise ConfigError(str(exc), loc.line("map", "breakpoints")) from None


def _build_weight(doc, fmap, loc) -> Weight:
    if not isinstance(doc, dict) or doc.get("kind") not in _WEIGHT_KEYS:
        raise ConfigError("weight kind must be constant, piecewise_affine or reciprocal_derivative",
                          loc.line("weight"))
    kind = doc["kind"]
    _check_keys(doc, _WEIGHT_KEYS[kind], "weight", loc, "weight")
    params = {}
    for key in ("values", "nodes", "grid"):
        if key in doc:
            if not isinstance(doc[key], list):
                raise ConfigError(f"weight {key} must be a list", loc.line("weight", key))
            conv = _value if key == "values" else _number
            params[key] = [conv(v, f"weight {key}", loc, "weight", key) for v in doc[key]]
    for key in _WEIGHT_KEYS[kind] - {"kind", "grid"}:
        if key not in doc:
            raise ConfigError(f"weight needs {key!r}", loc.line("weight"))
    if "scale" in doc:
        params["scale"] = _number(doc["scale"], "scale", loc, "weight", "scale")
    try:
        return build_weight(fmap, kind, **params)
    except MapError as exc:
        raise ConfigError(str(exc), loc.line("weight")) from None


def config_from_document(doc, text: Optional[str] = None) -> RunConfig:
    loc = _Locator(text)
    _check_keys(doc, _TOP_KEYS, "config", loc)
    for key in ("map", "weight"):
        if key not in doc:
            raise ConfigError(f"config needs {key!r}", 1 if text else None)
    fmap = _build_map(doc["map"], loc)
    weight = _build_weight(doc["weight"], fmap, loc)
    run = doc.get("run", {})
    _check_keys(run, _RUN_KEYS, "run", loc, "run")
    order = _number(run.get("order", DEFAULT_ORDER), "order", loc, "run", "order", integer=True)
    if not MIN_ORDER <= order <= MAX_PERIOD:
        raise ConfigError(f"order must lie in [{MIN_ORDER}, {MAX_PERIOD}]", loc.line("run", "order"))
    bins = _number(run.get("ulam_bins", DEFAULT_ULAM_BINS), "ulam_bins", loc, "run", "ulam_bins",
                   integer=True)
    if not 16 <= bins <= 8192 or bins & (bins - 1):
        raise ConfigError("ulam_bins must be a power of two in [16, 8192]", loc.line("run", "ulam_bins"))
    margin = _number(run.get("margin", DEFAULT_MARGIN), "margin", loc, "run", "margin")
    if margin < 0:
        raise ConfigError("margin must be >= 0", loc.line("run", "margin"))
    tol = _number(run.get("tolerance", DEFAULT_TOLERANCE), "tolerance", loc, "run", "tolerance")
    if tol <= 0:
        raise ConfigError("tolerance must be > 0", loc.line("run", "tolerance"))
    return RunConfig(fmap, weight, doc, order, bins, margin, tol)


def parse_config(text: str) -> RunConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg} (column {exc.colno})", exc.lineno) from None
    return config_from_document(doc, text)


def load_config(path: str) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
