"""
Deficit reports: the common result record for every inequality checker.

Sign convention: ``slack >= 0`` always means "the inequality holds".  For a
statement lhs <= rhs the slack is rhs - lhs; for a reverse statement
lhs >= rhs it is lhs - rhs (the ``direction`` field records which).  An
inequality is *asserted* only when every hypothesis check passed.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List


@dataclass(frozen=True)
class HypothesisCheck:
    name: str
    passed: bool
    margin: float

    def to_dict(self):
        return {"name": self.name, "pass": bool(self.passed),
                "margin": float(self.margin)}


@dataclass(frozen=True)
class DeficitReport:
    inequality: str
    lhs: float
    rhs: float
    sharp_constant: float
    slack: float
    direction: str = "le"  # "le": lhs <= rhs, "ge": lhs >= rhs
    hypotheses: List[HypothesisCheck] = field(default_factory=list)
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        expect = (self.rhs - self.lhs if self.direction == "le"
                  else self.lhs - self.rhs)
        if abs(self.slack - expect) > 1e-12 * max(1.0, abs(expect)):
            raise ValueError("slack inconsistent with lhs/rhs/direction")

    @staticmethod
    def build(inequality: str, lhs: float, rhs: float, sharp_constant: float,
              direction: str = "le", hypotheses=(), params=None):
        lhs, rhs = float(lhs), float(rhs)
        slack = rhs - lhs if direction == "le" else lhs - rhs
        return DeficitReport(inequality, lhs, rhs, float(sharp_constant),
                             slack, direction, list(hypotheses),
                             dict(params or {}))

    @property
    def hypotheses_pass(self) -> bool:
        return all(h.passed for h in self.hypotheses)

    @property
    def asserted(self) -> bool:
        """Whether the report claims the inequality (hypotheses all pass)."""
        return self.hypotheses_pass

    @property
    def holds(self) -> bool:
        return self.slack >= 0

    def to_dict(self):
        return {
            "inequality": self.inequality,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "sharp_constant": self.sharp_constant,
            "slack": self.slack,
            "direction": self.direction,
            "hypotheses": [h.to_dict() for h in self.hypotheses],
            "params": {k: _plain(v) for k, v in self.params.items()},
        }


def _plain(v):
    try:
        import numpy as np
        if isinstance(v, np.generic):
            return v.item()
        if isinstance(v, np.ndarray):
            return v.tolist()
    except ImportError:  # pragma: no cover
        pass
    return v
