"""Search reports shared by the exact searches and the local search."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from . import __version__
from .dyadic import DyadicRational, Permutation

MODES = ("enumeration", "branch_and_bound", "local_search")

# Reference values of the identity functional, used to flag convention mismatches.
TABLE_ONE_IDENTITY = {1: "0.25", 2: "0.5", 3: "0.5937", 4: "0.6718"}


def ratio_decimal(num: DyadicRational, den: DyadicRational, digits: int = 10) -> str:
    """Decimal prefix of an exact ratio of two dyadic values, truncated with "…" when inexact."""
    q = num.to_fraction() / den.to_fraction()
    sign = "-" if q < 0 else ""
    q = abs(q)
    whole = q.numerator // q.denominator
    rest = q - whole
    scaled = rest * 10**digits
    frac = scaled.numerator // scaled.denominator
    digits_text = str(frac).rjust(digits, "0")
    if scaled.denominator == 1:
        return f"{sign}{whole}.{digits_text.rstrip('0') or '0'}"
    return f"{sign}{whole}.{digits_text}…"


@dataclass
class SearchReport:
    n: int
    best_value: DyadicRational
    witness: Permutation
    nodes_explored: int
    pruned: int
    mode: str
    seeds: list[int] = field(default_factory=list)
    wall_time: float = 0.0
    complete: bool = True
    identity_value: DyadicRational | None = None
    flags: list[str] = field(default_factory=list)
    extra: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.nodes_explored < 1:
            raise ValueError("a search explores at least one node")

    @property
    def best_decimal(self) -> str:
        return self.best_value.decimal()

    @property
    def ratio_to_identity(self) -> Fraction | None:
        if self.identity_value is None or not self.identity_value:
            return None
        return self.best_value.to_fraction() / self.identity_value.to_fraction()

    def to_json(self, include_timing: bool = False) -> dict[str, Any]:
        """Plain-data form; timing is left out by default so equal runs give equal bytes."""
        out: dict[str, Any] = {
            "n": self.n,
            "mode": self.mode,
            "best_value": self.best_value.to_json(),
            "best_decimal": self.best_decimal,
            "witness": list(self.witness.image),
            "nodes_explored": self.nodes_explored,
            "pruned": self.pruned,
            "complete": self.complete,
            "seeds": list(self.seeds),
            "flags": list(self.flags),
            "version": __version__,
        }
        if self.identity_value is not None:
            out["identity_value"] = self.identity_value.to_json()
            out["ratio_to_identity"] = ratio_decimal(self.best_value, self.identity_value)
        out.update(self.extra)
        if include_timing:
            out["wall_time"] = self.wall_time
        return out

    def dumps(self, include_timing: bool = False) -> str:
        return json.dumps(self.to_json(include_timing), indent=2, sort_keys=True)
