"""Map validation report: continuity, invariance of [0, 1], and the three
sufficient conditions for ``Per f`` to be representative."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .maps import (
    PiecewiseMonotoneMap,
    STRUCT_TOL,
    TriState,
    continuity_residuals,
    maps_into_unit_interval,
    schwarzian_check,
)
from .periodic import resonance_state
from .symbolic import generating_check
from .weights import Weight


@dataclass(frozen=True)
class MapValidationReport:
    continuity_residuals: tuple
    into_ok: bool
    schwarzian_negative: TriState
    slope_resonance_free: TriState
    generating: TriState
    generating_reason: str = ""
    weight_total_variation: Optional[float] = None

    @property
    def continuous(self) -> bool:
        return all(r <= STRUCT_TOL for r in self.continuity_residuals)

    @property
    def ok(self) -> bool:
        return self.continuous and self.into_ok

    def as_dict(self) -> dict:
        return {
            "continuity_residuals": list(self.continuity_residuals),
            "continuous": self.continuous,
            "into_ok": self.into_ok,
            "schwarzian_negative": self.schwarzian_negative.value,
            "slope_resonance_free": self.slope_resonance_free.value,
            "generating": self.generating.value,
            "generating_reason": self.generating_reason,
            "weight_total_variation": self.weight_total_variation,
        }


def validate_map(fmap: PiecewiseMonotoneMap, weight: Optional[Weight] = None,
                 resonance_bound: int = 20) -> MapValidationReport:
    verdict = generating_check(fmap)
    return MapValidationReport(
        continuity_residuals=tuple(continuity_residuals(fmap)),
        into_ok=maps_into_unit_interval(fmap),
        schwarzian_negative=schwarzian_check(fmap),
        slope_resonance_free=resonance_state(fmap, resonance_bound),
        generating=verdict.state,
        generating_reason=verdict.reason,
        weight_total_variation=None if weight is None else weight.total_variation(),
    )
