"""Differential testing of a refined program against its original."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence, Union

from .interp import Outcome, Status, solve
from .properties import EMPTY_PSI, PropertySet
from .specialize import ResidualProgram
from .syntax import CHCError, Goal, Program


@dataclass
class EquivReport:
    trials: int = 0
    agreements: int = 0
    disagreements: list[tuple[Goal, Status, Status]] = field(default_factory=list)
    budget_exhausted: int = 0

    @property
    def ok(self) -> bool:
        return not self.disagreements

    def summary(self) -> str:
        lines = [
            f"trials: {self.trials}",
            f"agreements: {self.agreements}",
            f"disagreements: {len(self.disagreements)}",
            f"budget exhausted: {self.budget_exhausted}",
        ]
        for goal, a, b in self.disagreements:
            lines.append(f"  {goal}: original {a.value}, refined {b.value}")
        return "\n".join(lines) + "\n"


def sample_goals(predicate: str, arity: int, range_: tuple[int, int], n: int,
                 seed: int) -> list[Goal]:
    lo, hi = range_
    if lo > hi:
        raise ValueError(f"empty range {lo}:{hi}")
    if n < 0:
        raise ValueError("goal count must be nonnegative")
    rng = random.Random(seed)
    return [Goal(predicate, tuple(Fraction(rng.randint(lo, hi)) for _ in range(arity)))
            for _ in range(n)]


def differential(original: Program, residual: Union[ResidualProgram, Program],
                 entry_version: str, goals: Sequence[Goal], psi: PropertySet,
                 budget: int) -> EquivReport:
    """Run every goal on both programs and tally success/failure agreement.

    The residual side runs goal ``entry_version(args)`` with no properties.
    Trials where either side runs out of budget are counted separately.
    """
    refined = residual.program if isinstance(residual, ResidualProgram) else residual
    if entry_version not in refined.predicates:
        raise CHCError(f"unknown entry version {entry_version}")
    report = EquivReport()
    for goal in goals:
        report.trials += 1
        a: Outcome = solve(goal, psi, original, budget)
        b: Outcome = solve(Goal(entry_version, goal.args), EMPTY_PSI, refined, budget)
        if Status.BUDGET_EXHAUSTED in (a.status, b.status):
            report.budget_exhausted += 1
        elif a.status is b.status:
            report.agreements += 1
        else:
            report.disagreements.append((goal, a.status, b.status))
    return report
