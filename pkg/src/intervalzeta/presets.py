"""Shipped example configurations (same layout as the JSON config files)."""

from __future__ import annotations

import copy

_TENT_MAP = {
    "breakpoints": [0.0, 0.5, 1.0],
    "branches": [
        {"kind": "affine", "slope": 2.0, "intercept": 0.0},
        {"kind": "affine", "slope": -2.0, "intercept": 2.0},
    ],
}

_PRESETS = {
    "tent": {
        "map": _TENT_MAP,
        "weight": {"kind": "constant", "values": [1.0, 1.0]},
    },
    "weighted_tent": {
        "map": _TENT_MAP,
        "weight": {"kind": "constant", "values": [0.5, 0.25]},
    },
    "three_interval": {
        "map": {
            "breakpoints": [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0],
            "branches": [
                {"kind": "affine", "slope": 2.0, "intercept": 1.0 / 3.0},
                {"kind": "affine", "slope": -3.0, "intercept": 2.0},
                {"kind": "affine", "slope": 3.0, "intercept": -2.0},
            ],
        },
        "weight": {"kind": "constant", "values": [1.0, 1.0, 1.0]},
    },
    "logistic4": {
        "map": {
            "breakpoints": [0.0, 0.5, 1.0],
            "branches": [
                {"kind": "quadratic", "a": -4.0, "b": 4.0, "c": 0.0},
                {"kind": "quadratic", "a": -4.0, "b": 4.0, "c": 0.0},
            ],
        },
        "weight": {"kind": "constant", "values": [1.0, 1.0]},
    },
    "logistic38": {
        "map": {
            "breakpoints": [0.0, 0.5, 1.0],
            "branches": [
                {"kind": "quadratic", "a": -3.8, "b": 3.8, "c": 0.0},
                {"kind": "quadratic", "a": -3.8, "b": 3.8, "c": 0.0},
            ],
        },
        "weight": {"kind": "constant", "values": [1.0, 1.0]},
        "run": {"ulam_bins": 1024},
    },
    "identity_branch": {
        "map": {
            "breakpoints": [0.0, 0.5, 1.0],
            "branches": [
                {"kind": "affine", "slope": 1.0, "intercept": 0.0},
                {"kind": "affine", "slope": -1.0, "intercept": 1.0},
            ],
        },
        "weight": {"kind": "constant", "values": [1.0, 1.0]},
    },
}

PRESET_NAMES = tuple(_PRESETS)


def preset_document(name: str) -> dict:
    if name not in _PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}")
    return copy.deepcopy(_PRESETS[name])
