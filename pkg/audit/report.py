"""
Audit verdicts and the report that bundles them
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List

import numpy as np


@dataclass(frozen=True)
class ClaimVerdict:
    """Outcome of checking one claim on a batch of samples.

    ``worst_margin`` is the smallest normalized margin seen; negative means
    at least one violation. Report-only claims (``asserted`` False) are
    shown but do not decide the overall verdict.
    """

    claim_id: str
    description: str
    samples: int
    violations: int
    worst_margin: float
    asserted: bool = True
    values: Dict[str, float] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.violations == 0

    @classmethod
    def from_margins(cls, claim_id: str, description: str, margins, asserted: bool = True, **values) -> "ClaimVerdict":
        """Verdict from per-sample margins; a margin below zero is a violation."""
        margins = np.asarray(margins, dtype=float).reshape(-1)
        bad = ~(margins >= 0)
        return cls(
            claim_id=claim_id,
            description=description,
            samples=int(margins.size),
            violations=int(np.count_nonzero(bad)),
            worst_margin=float(np.nanmin(margins)) if margins.size and not np.all(np.isnan(margins)) else float("nan"),
            asserted=asserted,
            values={key: float(value) for key, value in values.items()},
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "claim_id": self.claim_id,
            "description": self.description,
            "samples": self.samples,
            "violations": self.violations,
            "worst_margin": self.worst_margin,
            "asserted": self.asserted,
            "values": dict(self.values),
        }


@dataclass(frozen=True)
class AuditReport:
    verdicts: List[ClaimVerdict]

    @property
    def overall_pass(self) -> bool:
        """True when every asserted claim has zero violations."""
        return all(v.passed for v in self.verdicts if v.asserted)

    def verdict(self, claim_id: str) -> ClaimVerdict:
        for v in self.verdicts:
            if v.claim_id == claim_id:
                return v
        raise KeyError(claim_id)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "overall_pass": self.overall_pass,
            "claims": [v.to_dict() for v in self.verdicts],
        }

    def summary(self) -> str:
        lines = []
        for v in self.verdicts:
            status = "PASS" if v.passed else ("FAIL" if v.asserted else "NOTE")
            line = (
                f"{status:4}  {v.claim_id:<48} samples={v.samples:<6d} "
                f"violations={v.violations:<6d} worst_margin={v.worst_margin:.3e}"
            )
            if not v.asserted:
                line += "  (report only)"
            lines.append(line)
            for key, value in v.values.items():
                lines.append(f"      {key} = {value:.6g}")
        lines.append(f"overall: {'PASS' if self.overall_pass else 'FAIL'}")
        return "\n".join(lines)
