"""Pass/fail records shared by the verifiers and the CLI."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterator


@dataclass
class Check:
    """Outcome of one named relation or experiment.

    ``informational`` checks are reported but do not affect the overall
    verdict; they carry deliberately failing forms, such as the uncorrected
    version of an identity reported next to the corrected one.
    """

    name: str
    passed: bool
    deviation: float | None = None
    data: dict[str, Any] = field(default_factory=dict)
    informational: bool = False

    def __bool__(self) -> bool:
        return bool(self.passed)

    def to_dict(self) -> dict[str, Any]:
        out = {
            "name": self.name,
            "pass": bool(self.passed),
            "deviation": None if self.deviation is None else float(self.deviation),
            "data": self.data,
        }
        if self.informational:
            out["informational"] = True
        return out


def deviation_check(name: str, deviation: float, tol: float, **data) -> Check:
    return Check(name, bool(deviation < tol), float(deviation), dict(data))


class RelationReport:
    """Ordered collection of :class:`Check` records."""

    def __init__(self, checks: list[Check] | None = None):
        self.checks: list[Check] = list(checks or [])

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        return check

    def extend(self, other: "RelationReport | list[Check]") -> None:
        self.checks.extend(other.checks if isinstance(other, RelationReport) else other)

    def __iter__(self) -> Iterator[Check]:
        return iter(self.checks)

    def __len__(self) -> int:
        return len(self.checks)

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def __contains__(self, name: str) -> bool:
        return any(c.name == name for c in self.checks)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if not c.informational)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed and not c.informational]

    def max_deviation(self) -> float:
        devs = [c.deviation for c in self.checks if c.deviation is not None and not c.informational]
        return max(devs, default=0.0)

    def summary(self) -> str:
        lines = []
        for c in self.checks:
            tag = "PASS" if c.passed else ("note" if c.informational else "FAIL")
            dev = "" if c.deviation is None else f"  dev={c.deviation:.2e}"
            lines.append(f"[{tag}] {c.name}{dev}")
        return "\n".join(lines)
