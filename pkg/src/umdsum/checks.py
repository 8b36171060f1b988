"""Result containers shared by the property checkers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


MAX_STORED_COUNTEREXAMPLES = 10


@dataclass
class PropertyResult:
    name: str
    cases: int = 0
    counterexamples: list[Any] = field(default_factory=list)
    failures: int = 0

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def record(self, ok: bool, instance: Any = None) -> None:
        self.cases += 1
        if not ok:
            self.failures += 1
            if len(self.counterexamples) < MAX_STORED_COUNTEREXAMPLES:
                self.counterexamples.append(instance)

    def add_bulk(self, cases: int, bad_instances: list[Any]) -> None:
        """Record ``cases`` checks at once, of which ``bad_instances`` failed."""
        self.cases += cases
        self.failures += len(bad_instances)
        room = MAX_STORED_COUNTEREXAMPLES - len(self.counterexamples)
        if room > 0:
            self.counterexamples.extend(bad_instances[:room])

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        text = f"[{status}] {self.name}: {self.cases} cases"
        if not self.passed:
            text += f", {self.failures} failures; first: {self.counterexamples[0]!r}"
        return text


@dataclass
class CheckReport:
    title: str
    results: list[PropertyResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def add(self, result: PropertyResult) -> PropertyResult:
        self.results.append(result)
        return result

    def lines(self) -> list[str]:
        return [r.line() for r in self.results]
