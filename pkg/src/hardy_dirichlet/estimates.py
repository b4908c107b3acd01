"""The NormEstimate record shared by every norm estimator."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

METHODS = ("exact2", "exact_even", "mc", "rqmc", "time_avg", "euler_product", "quadrature")
EXACT_METHODS = ("exact2", "exact_even")


@dataclass(frozen=True)
class NormEstimate:
    """An estimate of an L^q norm with its standard error.

    ``std_error`` is on the norm itself (delta method applied to the q-th
    root) and is zero exactly for the exact methods. ``note`` flags
    heuristic error bars.
    """

    value: float
    std_error: float
    method: str
    q: float
    samples_or_grid: int
    seed: int | None = None
    note: str | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise DomainError(f"unknown method {self.method!r}")
        if not (math.isfinite(self.value) and self.value >= 0):
            raise DomainError(f"norm value must be finite and >= 0, got {self.value}")
        if self.method in EXACT_METHODS and self.std_error != 0:
            raise DomainError("exact methods carry zero standard error")

    def to_dict(self) -> dict:
        out = {
            "value": self.value,
            "std_error": self.std_error,
            "method": self.method,
            "q": self.q,
            "samples": self.samples_or_grid,
            "seed": self.seed,
        }
        if self.note:
            out["note"] = self.note
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> "NormEstimate":
        return cls(
            value=float(obj["value"]),
            std_error=float(obj["std_error"]),
            method=obj["method"],
            q=float(obj["q"]),
            samples_or_grid=int(obj["samples"]),
            seed=obj.get("seed"),
            note=obj.get("note"),
        )
