"""Verdict objects shared by every checker, plus the library's exception types."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any


class KsplitError(Exception):
    pass


class SortMismatch(KsplitError):
    pass


class BudgetExceeded(KsplitError):
    """An exhaustive search hit its configured cap before finishing."""

    def __init__(self, what: str, cap: int):
        super().__init__(f"{what}: enumeration cap {cap} reached before exhaustion")
        self.what = what
        self.cap = cap


class NotSubstructure(KsplitError):
    pass


class NotDownrightClosed(KsplitError):
    pass


class ParameterTooSmall(KsplitError):
    pass


class ExtensionClash(KsplitError):
    """Closing a partial map under the functions forced two images for one element."""

    def __init__(self, element, first, second):
        super().__init__(f"{element!r} forced to both {first!r} and {second!r}")
        self.element = element
        self.first = first
        self.second = second


def jsonable(obj: Any) -> Any:
    """Best-effort conversion of library values (tuples, frozensets, dataclasses) to JSON data."""
    if isinstance(obj, Report):
        return obj.to_dict()
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return sorted((jsonable(v) for v in obj), key=repr)
    if isinstance(obj, (str, int, float, bool)) or obj is None:
        return obj
    if hasattr(obj, "to_dict"):
        return obj.to_dict()
    return repr(obj)


@dataclass
class Report:
    verdict: bool
    first_violation: dict | None = None
    stats: dict = field(default_factory=dict)
    witnesses: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.verdict and self.first_violation is None:
            raise ValueError("a failing report must carry its first violation")

    def __bool__(self) -> bool:
        return self.verdict

    @property
    def status(self) -> str:
        return "pass" if self.verdict else "fail"

    def to_dict(self) -> dict:
        return {
            "verdict": self.status,
            "first_violation": jsonable(self.first_violation),
            "stats": jsonable(self.stats),
            "witnesses": jsonable(self.witnesses),
            "details": jsonable(self.details),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def passed(stats=None, **details) -> Report:
    return Report(True, None, dict(stats or {}), details=details)


def failed(indices, reason: str, stats=None, **details) -> Report:
    return Report(False, {"indices": indices, "reason": reason}, dict(stats or {}), details=details)


class InvalidParams(KsplitError):
    pass
