"""Mixed concrete x property-set interpreter for ground CHC goals.

Execution is ordinary depth-first, clause-order, left-to-right resolution
with backtracking.  Alongside the ground argument vector of every call the
interpreter carries the abstract state (the properties of the callee that
hold for those arguments), which is what makes it an abstract interpreter
over the product domain.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .properties import AbstractState, PropertySet
from .syntax import CHCError, Clause, Goal, Program, format_number, formals


class UnderdeterminedClause(CHCError):
    """A clause whose local variables are not fixed by its equalities once the head is ground."""


@dataclass(frozen=True)
class InterpState:
    predicate: str
    values: tuple[Fraction, ...]
    phi: AbstractState

    def describe(self, psi: PropertySet) -> str:
        args = ",".join(format_number(v) for v in self.values)
        return f"{self.predicate}({args}) {self.phi.describe(psi)}"


@dataclass(frozen=True)
class TraceStep:
    state: InterpState
    clause_index: int


@dataclass
class Trace:
    """Steps of the current derivation plus the total number of calls made.

    ``step_count`` also counts calls undone by backtracking, so it can exceed
    ``len(steps)``.
    """

    steps: list[TraceStep] = field(default_factory=list)
    step_count: int = 0

    def format(self, psi: PropertySet) -> str:
        return "".join(s.state.describe(psi) + "\n" for s in self.steps)


class Status(enum.Enum):
    SUCCESS = "success"
    FAILURE = "failure"
    BUDGET_EXHAUSTED = "budget exhausted"


@dataclass
class Outcome:
    status: Status
    trace: Optional[Trace]
    calls: int

    @property
    def success(self) -> bool:
        return self.status is Status.SUCCESS


def _num(q):
    """Integral rationals become ints so that most arithmetic stays in int."""
    q = Fraction(q)
    return q.numerator if q.denominator == 1 else q


def _compile_expr(e) -> tuple:
    return tuple((v, _num(c)) for v, c in e.terms), _num(e.constant)


def _eval(lin: tuple, env: dict):
    total = lin[1]
    for v, c in lin[0]:
        total += c * env[v]
    return total


def _test(value, relop: str) -> bool:
    if relop == "<":
        return value < 0
    if relop == "=<":
        return value <= 0
    return value == 0


@dataclass(frozen=True)
class _Compiled:
    index: int
    clause: Clause
    params: tuple[str, ...]
    equalities: tuple
    checks: tuple
    local_vars: tuple[str, ...]
    body: tuple


def _compile_clause(index: int, clause: Clause) -> _Compiled:
    checks = tuple((_compile_expr(c.lhs), c.relop) for c in clause.constraints)
    return _Compiled(
        index, clause, clause.head_params,
        tuple(lin for lin, op in checks if op == "="),
        checks, clause.local_vars,
        tuple((a.predicate, tuple(_compile_expr(e) for e in a.args)) for a in clause.body))


def _solve_locals(cc: _Compiled, env: dict) -> None:
    """Extend ``env`` by repeatedly solving equalities with a single unknown."""
    progress = True
    while progress:
        progress = False
        for terms, const in cc.equalities:
            unknown = [(v, c) for v, c in terms if v not in env]
            if len(unknown) != 1:
                continue
            var, a = unknown[0]
            rest = const + sum(c * env[v] for v, c in terms if v != var)
            env[var] = _num(Fraction(-rest) / a)
            progress = True


def _evaluate(cc: _Compiled, values: tuple) -> Optional[list[tuple[str, tuple]]]:
    env = dict(zip(cc.params, values))
    if cc.local_vars:
        _solve_locals(cc, env)
        unbound = [v for v in cc.local_vars if v not in env]
        if unbound:
            # A ground constraint that already fails makes the clause inapplicable.
            for lin, op in cc.checks:
                if all(v in env for v, _ in lin[0]) and not _test(_eval(lin, env), op):
                    return None
            raise UnderdeterminedClause(
                f"underdetermined clause for ground evaluation: {cc.clause} "
                f"(cannot determine {', '.join(unbound)})")
    for lin, op in cc.checks:
        if not _test(_eval(lin, env), op):
            return None
    return [(pred, tuple(_eval(lin, env) for lin in args)) for pred, args in cc.body]


def evaluate_clause(clause: Clause, values: tuple[Fraction, ...]
                    ) -> Optional[list[tuple[str, tuple[Fraction, ...]]]]:
    """Ground transfer for one clause: the body calls if all constraints hold, else None."""
    out = _evaluate(_compile_clause(0, clause), tuple(_num(v) for v in values))
    if out is None:
        return None
    return [(pred, tuple(Fraction(v) for v in vals)) for pred, vals in out]


class _Machine:
    """Per-run caches of compiled clauses and properties."""

    def __init__(self, p: Program, psi: PropertySet):
        self.p = p
        self.psi = psi
        self._clauses: dict[str, list[_Compiled]] = {}
        self._props: dict[str, list[tuple]] = {}

    def clauses(self, pred: str) -> list[_Compiled]:
        out = self._clauses.get(pred)
        if out is None:
            out = self._clauses[pred] = [_compile_clause(i, c) for i, c in self.p.clauses_for(pred)]
        return out

    def phi(self, pred: str, values: tuple) -> AbstractState:
        # Same answer as abstract_ground; compiled for speed.
        props = self._props.get(pred)
        if props is None:
            props = self._props[pred] = [(_compile_expr(pr.constraint.lhs), pr.constraint.relop)
                                         for pr in self.psi.of(pred)]
        if not props:
            return AbstractState(pred)
        env = dict(zip(formals(len(values)), values))
        return AbstractState(pred, tuple(i for i, (lin, op) in enumerate(props)
                                         if _test(_eval(lin, env), op)))


# Persistent cons lists keep choice points cheap: (head, tail) or None.
_Cons = Optional[tuple]


def solve(goal: Goal, psi: PropertySet, p: Program, budget: int) -> Outcome:
    """Run ``goal`` against ``p``; ``budget`` bounds the number of calls."""
    if budget < 1:
        raise ValueError("budget must be positive")
    arity = p.predicates.get(goal.predicate)
    if arity is not None and arity != len(goal.args):
        raise CHCError(f"goal {goal} has {len(goal.args)} arguments, "
                       f"{goal.predicate} takes {arity}")

    m = _Machine(p, psi)
    args = tuple(_num(v) for v in goal.args)
    first = InterpState(goal.predicate, args, m.phi(goal.predicate, args))
    goals: _Cons = (first, None)
    deriv: _Cons = None
    choices: list[tuple] = []
    calls = 0

    def trace_of(d: _Cons) -> Trace:
        steps = []
        while d is not None:
            steps.append(d[0])
            d = d[1]
        steps.reverse()
        return Trace(steps, calls)

    resume: Optional[tuple] = None
    while True:
        if resume is None:
            if goals is None:
                return Outcome(Status.SUCCESS, trace_of(deriv), calls)
            state, rest = goals
            calls += 1
            if calls > budget:
                calls = budget
                return Outcome(Status.BUDGET_EXHAUSTED, trace_of(deriv), calls)
            candidates = m.clauses(state.predicate)
            start = 0
        else:
            state, rest, deriv, candidates, start = resume
            resume = None

        for pos in range(start, len(candidates)):
            cc = candidates[pos]
            calls_out = _evaluate(cc, state.values)
            if calls_out is None:
                continue
            if pos + 1 < len(candidates):
                choices.append((state, rest, deriv, candidates, pos + 1))
            new_goals = rest
            for pred, vals in reversed(calls_out):
                new_goals = (InterpState(pred, vals, m.phi(pred, vals)), new_goals)
            goals = new_goals
            deriv = (TraceStep(state, cc.index), deriv)
            break
        else:
            if not choices:
                return Outcome(Status.FAILURE, None, calls)
            resume = choices.pop()


def check_property_soundness(t: Trace, psi: PropertySet) -> bool:
    """Every property recorded in a state's phi is true of that state's values."""
    for step in t.steps:
        st = step.state
        env = dict(zip(formals(len(st.values)), st.values))
        props = psi.of(st.predicate)
        for i in st.phi.members:
            if i >= len(props) or not props[i].constraint.holds(env):
                return False
    return True
