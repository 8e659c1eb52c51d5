"""Outcome of a single numerical check, shared by the verification modules."""
from __future__ import annotations

from dataclasses import dataclass


@dataclass
class CheckResult:
    name: str
    lhs: float
    rhs: float
    tolerance: float
    passed: bool
    error_estimate: float = 0.0
    kind: str = "identity"          # "identity", "inequality" or "ratio"
    slack: float = 0.0


def identity(name: str, lhs: float, rhs: float, tol: float, err: float = 0.0) -> CheckResult:
    return CheckResult(name, lhs, rhs, tol, bool(abs(lhs - rhs) <= tol), err, "identity")


def inequality(name: str, lhs: float, rhs: float, tol: float, err: float = 0.0,
               slack: float = 0.0) -> CheckResult:
    """``lhs <= rhs * (1 + slack) + tol``."""
    ok = lhs <= rhs * (1.0 + slack) + tol
    return CheckResult(name, lhs, rhs, tol, bool(ok), err, "inequality", slack)
