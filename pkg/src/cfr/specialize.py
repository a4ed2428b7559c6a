"""Polyvariant control-flow refinement of CHC programs.

A *version* is a predicate paired with an abstract state.  Versions are
discovered breadth-first from an entry version: each clause of a version's
predicate is residualized under that version's properties, infeasible
clauses are pruned, and each body call is redirected to the version given by
the properties its context entails.  Because there are finitely many
abstract states per predicate the worklist always reaches a fixpoint.

The division between compile-time and run-time data is fixed:

========================  ==========  =======================================
data                      binding     treatment
========================  ==========  =======================================
predicate, phi            static      drive version creation (memo key)
property set, program     static      consulted during specialization only
argument values           dynamic     residualized as clause constraints/args
property computation      unfolded    never appears in the output
predicate calls           memoized    become calls to versioned predicates
========================  ==========  =======================================
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .linear import TRUE, Store, conjoin, satisfiable, simplify
from .properties import (
    AbstractState,
    PropertySet,
    abstract,
    check_state,
    delta_D,
    gamma_at,
)
from .syntax import (
    AtomicConstraint,
    BodyAtom,
    CHCError,
    Clause,
    LinExpr,
    Program,
    print_program,
)

BINDING_TIMES = {
    "predicate": "static",
    "phi": "static",
    "psi": "static",
    "program": "static",
    "args": "nonvar",
}


@dataclass(frozen=True, order=True)
class Version:
    predicate: str
    phi: AbstractState

    def __post_init__(self):
        if self.phi.predicate != self.predicate:
            raise ValueError(f"abstract state of {self.phi.predicate} used for {self.predicate}")


@dataclass(frozen=True)
class Entry:
    """Entry point: a predicate, optionally constrained over its formals ``A1..Ak``."""

    predicate: str
    constraint: Store = TRUE

    def version(self, psi: PropertySet) -> Version:
        return Version(self.predicate, abstract(self.predicate, self.constraint, psi))


@dataclass(frozen=True)
class SpecConfig:
    entry: Entry
    strengthen: bool = True
    naming_prefix: str = "solve__"

    def __post_init__(self):
        if not self.naming_prefix:
            raise ValueError("naming prefix must be nonempty")
        if isinstance(self.entry, str):
            object.__setattr__(self, "entry", Entry(self.entry))


@dataclass
class ResidualProgram:
    """Versions in discovery order, their residual clauses, and what was pruned."""

    versions: list[tuple[Version, str]] = field(default_factory=list)
    clauses: list[Clause] = field(default_factory=list)
    version_table: dict[Version, str] = field(default_factory=dict)
    arities: dict[str, int] = field(default_factory=dict)
    origins: list[tuple[Version, int]] = field(default_factory=list)
    pruned: list[tuple[Version, int, Store]] = field(default_factory=list)

    @property
    def program(self) -> Program:
        return Program(tuple(self.clauses), dict(self.arities))

    @property
    def entry_name(self) -> Optional[str]:
        return self.versions[0][1] if self.versions else None

    def version_of(self, name: str) -> Version:
        for v, n in self.versions:
            if n == name:
                return v
        raise KeyError(name)

    def clauses_of(self, name: str) -> list[Clause]:
        return [c for c in self.clauses if c.head_predicate == name]


class SpecializationError(CHCError):
    pass


def _inline_locals(clause: Clause, constraints: list[AtomicConstraint],
                   body: list[BodyAtom]) -> tuple[list[AtomicConstraint], list[BodyAtom]]:
    """Fold single-equality definitions of call-only locals into call arguments."""
    head = set(clause.head_params)
    changed = True
    while changed:
        changed = False
        for idx, c in enumerate(constraints):
            if c.relop != "=":
                continue
            for var in c.variables:
                if var in head:
                    continue
                if any(var in other.variables for j, other in enumerate(constraints) if j != idx):
                    continue
                a = c.lhs.coeff(var)
                rest = LinExpr([(v, k) for v, k in c.lhs.terms if v != var], c.lhs.constant)
                definition = rest.scale(-1 / a)
                body = [BodyAtom(b.predicate, tuple(e.substitute({var: definition}) for e in b.args))
                        for b in body]
                del constraints[idx]
                changed = True
                break
            if changed:
                break
    return constraints, body


def residualize_clause(c: Clause, v: Version, psi: PropertySet, cfg: SpecConfig,
                       name_of=None):
    """Specialize clause ``c`` under version ``v``.

    Returns None when the clause is infeasible under ``v``'s properties,
    else ``(residual clause, successor versions)``.  ``name_of`` maps a
    version to its residual predicate name; by default the head and calls
    keep original predicate names.
    """
    if c.head_predicate != v.predicate:
        raise ValueError(f"clause for {c.head_predicate} residualized at version of {v.predicate}")
    guard = gamma_at(v.phi, psi, c.head_params)
    context = conjoin(guard, Store(c.constraints))
    if not satisfiable(context):
        return None
    successors = [Version(a.predicate, delta_D(context, a, psi)) for a in c.body]

    if cfg.strengthen:
        merged: list[AtomicConstraint] = []
        for k in c.constraints + guard.conjuncts:
            if k not in merged:
                merged.append(k)
        constraints = list(simplify(Store(tuple(merged))).conjuncts)
    else:
        constraints = list(c.constraints)
    constraints, body = _inline_locals(c, constraints, list(c.body))

    if name_of is None:
        name_of = lambda ver: ver.predicate  # noqa: E731
    body = [BodyAtom(name_of(s), b.args) for s, b in zip(successors, body)]
    residual = Clause(name_of(v), c.head_params, tuple(constraints), tuple(body))
    return residual, successors


def specialize(p: Program, psi: PropertySet, cfg: SpecConfig) -> ResidualProgram:
    entry = cfg.entry
    if entry.predicate not in p.predicates:
        raise SpecializationError(f"unknown entry predicate {entry.predicate}")
    start = entry.version(psi)
    check_state(start.phi, psi)

    r = ResidualProgram()

    def name_of(ver: Version) -> str:
        name = r.version_table.get(ver)
        if name is None:
            name = f"{cfg.naming_prefix}{len(r.versions) + 1}"
            r.version_table[ver] = name
            r.versions.append((ver, name))
            r.arities[name] = p.predicates[ver.predicate]
            queue.append(ver)
        return name

    queue: deque[Version] = deque()
    name_of(start)
    while queue:
        ver = queue.popleft()
        for index, clause in p.clauses_for(ver.predicate):
            out = residualize_clause(clause, ver, psi, cfg, name_of)
            if out is None:
                ctx = conjoin(gamma_at(ver.phi, psi, clause.head_params), Store(clause.constraints))
                r.pruned.append((ver, index, ctx))
                continue
            residual, _ = out
            r.clauses.append(residual)
            r.origins.append((ver, index))
    return r


def emit(r: ResidualProgram, psi: Optional[PropertySet] = None) -> str:
    """Residual program text; with ``psi``, each version is preceded by a comment naming it."""
    if psi is None:
        return print_program(Program(tuple(r.clauses)))
    out = []
    for ver, name in r.versions:
        out.append(f"% {name}: {ver.predicate} {ver.phi.describe(psi)}\n")
        out.extend(str(c) + "\n" for c in r.clauses_of(name))
    return "".join(out)
