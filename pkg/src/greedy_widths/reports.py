"""Verification records shared by the replay and theorem harnesses."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

REL_TOL = 1e-8


@dataclass
class BoundReport:
    """One verified inequality: lhs <= rhs within tolerance.

    ``status`` is "pass", "fail" or "inconclusive"; a report backed by any
    heuristic or lower-only factor must be inconclusive rather than fail.
    """

    theorem_id: str
    instance_descriptor: str
    lhs: float
    rhs: float
    constants_provenance: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)
    conclusive: bool = True

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        return self.slack >= -REL_TOL * max(1.0, abs(self.rhs))

    @property
    def status(self) -> str:
        if self.passed:
            return "pass"
        return "fail" if self.conclusive else "inconclusive"

    def to_json_dict(self):
        return {
            "theorem_id": self.theorem_id,
            "instance_descriptor": self.instance_descriptor,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "pass": self.passed,
            "status": self.status,
            "constants_provenance": self.constants_provenance,
            "details": self.details,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)
