"""Self-contained pass/fail reports for exact and statistical checks.

A report records every sub-check with its observed and expected values, the
tolerance that was applied, and the seeds and sample sizes that produced the
numbers, so any run can be reproduced from the report alone.  A report
passes exactly when all of its checks pass.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field


@dataclass(frozen=True)
class Check:
    name: str
    observed: float
    expected: float
    tolerance: float
    passed: bool
    se: float | None = None
    detail: str = ""

    def to_json_dict(self) -> dict:
        d = {
            "name": self.name,
            "observed": self.observed,
            "expected": self.expected,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }
        if self.se is not None:
            d["se"] = self.se
        if self.detail:
            d["detail"] = self.detail
        return d

    def __str__(self) -> str:
        mark = "pass" if self.passed else "FAIL"
        out = f"[{mark}] {self.name}: observed {self.observed:.6g}, expected {self.expected:.6g}"
        if self.se is not None:
            out += f" (se {self.se:.3g})"
        out += f", tol {self.tolerance:.3g}"
        if self.detail:
            out += f" [{self.detail}]"
        return out


def check_abs(name: str, observed: float, expected: float, tol: float, detail: str = "") -> Check:
    """Absolute-difference check: passes iff |observed - expected| <= tol."""
    observed, expected = float(observed), float(expected)
    return Check(name, observed, expected, float(tol), abs(observed - expected) <= tol, detail=detail)


def check_se(
    name: str, observed: float, expected: float, se: float, n_se: float = 4.0, detail: str = ""
) -> Check:
    """Standard-error check: passes iff |observed - expected| <= n_se * se."""
    observed, expected, se = float(observed), float(expected), float(se)
    tol = n_se * se
    return Check(name, observed, expected, tol, abs(observed - expected) <= tol, se=se, detail=detail)


def check_pvalue(name: str, statistic: float, pvalue: float, alpha: float, detail: str = "") -> Check:
    """P-value check: passes iff pvalue >= alpha.

    ``observed`` holds the p-value and ``expected`` the threshold; the KS
    statistic itself goes into the detail string.
    """
    detail = f"ks statistic {statistic:.4g}" + (f"; {detail}" if detail else "")
    return Check(name, float(pvalue), float(alpha), float(alpha), float(pvalue) >= float(alpha), detail=detail)


@dataclass
class TestReport:
    """Outcome of one verification run, reproducible from its own fields."""

    name: str
    checks: list[Check] = field(default_factory=list)
    tolerance_policy: str = ""
    sample_sizes: dict = field(default_factory=dict)
    seeds: dict = field(default_factory=dict)
    context: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        return check

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "tolerance_policy": self.tolerance_policy,
            "sample_sizes": self.sample_sizes,
            "seeds": self.seeds,
            "context": self.context,
            "checks": [c.to_json_dict() for c in self.checks],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=2) + "\n"

    def summary(self) -> str:
        lines = [f"{'PASS' if self.passed else 'FAIL'} {self.name}"]
        if self.tolerance_policy:
            lines.append(f"  policy: {self.tolerance_policy}")
        for key in ("sample_sizes", "seeds"):
            d = getattr(self, key)
            if d:
                lines.append(f"  {key}: " + ", ".join(f"{k}={v}" for k, v in sorted(d.items())))
        lines.extend("  " + str(c) for c in self.checks)
        return "\n".join(lines)
