"""Residual report rows shared by the verification routines and the CLI."""
from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class ReportRow:
    identity: str
    f: str
    lhs: complex
    rhs: complex
    tol: float
    params: dict = field(default_factory=dict)

    @property
    def abs_err(self) -> float:
        return abs(self.lhs - self.rhs)

    @property
    def rel_err(self) -> float:
        scale = max(abs(self.lhs), abs(self.rhs))
        return self.abs_err / scale if scale > 0 else 0.0

    @property
    def passed(self) -> bool:
        return self.rel_err <= self.tol

    @property
    def key(self) -> tuple:
        return (self.identity, self.f, tuple(sorted((k, str(v)) for k, v in self.params.items())))

    def to_dict(self) -> dict:
        return {
            "identity": self.identity,
            "f": self.f,
            "params": self.params,
            "lhs": [self.lhs.real, self.lhs.imag],
            "rhs": [self.rhs.real, self.rhs.imag],
            "abs_err": self.abs_err,
            "rel_err": self.rel_err,
            "pass": self.passed,
        }


def all_passed(rows) -> bool:
    return all(r.passed for r in rows)


def worst(rows) -> float:
    return max((r.rel_err for r in rows), default=0.0)
