"""Finite property-based abstract domain.

Each predicate ``q`` of arity ``k`` owns an ordered list of properties
``Psi(q)``: linear constraints over the formals ``A1..Ak``.  An abstract
state is the subset of ``Psi(q)`` that holds, stored as sorted indices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .linear import Store, entails, satisfiable
from .syntax import (
    AtomicConstraint,
    BodyAtom,
    LinExpr,
    Parser,
    Program,
    ValidationError,
    format_constraint,
    formals,
)


@dataclass(frozen=True)
class Property:
    predicate: str
    constraint: AtomicConstraint

    def __str__(self) -> str:
        return format_constraint(self.constraint)


@dataclass(frozen=True)
class PropertySet:
    """The map ``predicate -> ordered properties`` (Psi)."""

    by_predicate: Mapping[str, tuple[Property, ...]] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "by_predicate",
                           {k: tuple(v) for k, v in self.by_predicate.items() if v})

    def __hash__(self) -> int:
        return hash(tuple(sorted(self.by_predicate.items())))

    def of(self, predicate: str) -> tuple[Property, ...]:
        return self.by_predicate.get(predicate, ())

    def constraints(self, predicate: str) -> tuple[AtomicConstraint, ...]:
        return tuple(p.constraint for p in self.of(predicate))

    @property
    def predicates(self) -> tuple[str, ...]:
        return tuple(self.by_predicate)

    def __len__(self) -> int:
        return sum(len(v) for v in self.by_predicate.values())

    @classmethod
    def from_constraints(cls, table: Mapping[str, Iterable[AtomicConstraint]]) -> "PropertySet":
        out: dict[str, list[Property]] = {}
        for pred, cs in table.items():
            bucket = out.setdefault(pred, [])
            for c in cs:
                prop = Property(pred, c)
                if prop not in bucket:
                    bucket.append(prop)
        return cls(out)


EMPTY_PSI = PropertySet()


@dataclass(frozen=True, order=True)
class AbstractState:
    predicate: str
    members: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(sorted(set(self.members))))

    def describe(self, psi: PropertySet) -> str:
        props = psi.of(self.predicate)
        return "[" + ", ".join(str(props[i]) for i in self.members) + "]"


def check_state(phi: AbstractState, psi: PropertySet) -> None:
    n = len(psi.of(phi.predicate))
    if any(i < 0 or i >= n for i in phi.members):
        raise ValueError(f"abstract state {phi} out of range for {n} properties")


def gamma(phi: AbstractState, psi: PropertySet) -> Store:
    """Concretization: the conjunction of the member properties over ``A1..Ak``."""
    check_state(phi, psi)
    props = psi.of(phi.predicate)
    return Store(tuple(props[i].constraint for i in phi.members))


def gamma_at(phi: AbstractState, psi: PropertySet, params: Sequence[str]) -> Store:
    """``gamma(phi)`` with formal ``Ai`` renamed to ``params[i-1]``."""
    store = gamma(phi, psi)
    binding = {a: LinExpr.var(p) for a, p in zip(formals(len(params)), params)}
    return Store(tuple(c.substitute(binding) for c in store.conjuncts))


def delta_D(context: Store, callee: BodyAtom, psi: PropertySet) -> AbstractState:
    """Properties of the callee that the calling context entails at its argument positions."""
    if not satisfiable(context):
        raise ValueError(f"delta_D called with unsatisfiable context {{{context}}}")
    binding = dict(zip(formals(len(callee.args)), callee.args))
    members = [i for i, prop in enumerate(psi.of(callee.predicate))
               if entails(context, prop.constraint.substitute(binding))]
    return AbstractState(callee.predicate, tuple(members))


def abstract(pred: str, store: Store, psi: PropertySet) -> AbstractState:
    """Properties of ``pred`` entailed by a store over its formals ``A1..Ak``."""
    if not satisfiable(store):
        raise ValueError(f"abstract called with unsatisfiable store {{{store}}}")
    members = [i for i, prop in enumerate(psi.of(pred)) if entails(store, prop.constraint)]
    return AbstractState(pred, tuple(members))


def abstract_ground(pred: str, values: Sequence[Fraction], psi: PropertySet) -> AbstractState:
    """``abstract`` for a fully ground argument vector, by direct evaluation.

    Entailment by the equality store ``{Ai = values[i]}`` coincides with
    truth at that point, so no constraint solving is needed.
    """
    env = dict(zip(formals(len(values)), values))
    members = [i for i, prop in enumerate(psi.of(pred)) if prop.constraint.holds(env)]
    return AbstractState(pred, tuple(members))


def ground_store(values: Sequence[Fraction]) -> Store:
    return Store(tuple(AtomicConstraint.build(LinExpr.var(a), "=", LinExpr.const(v))
                       for a, v in zip(formals(len(values)), values)))


def derive_properties(p: Program) -> PropertySet:
    """Guard-attribution heuristic.

    Every constraint of a clause is attributed to the head and to each body
    atom whose arguments are distinct variables covering the constraint's
    variables, renamed onto that atom's formals.
    """
    table: dict[str, list[AtomicConstraint]] = {}
    for clause in p.clauses:
        targets: list[tuple[str, Sequence[str]]] = [(clause.head_predicate, clause.head_params)]
        for atom in clause.body:
            names = [a.as_variable() for a in atom.args]
            if None not in names and len(set(names)) == len(names):
                targets.append((atom.predicate, names))
        for c in clause.constraints:
            vs = set(c.variables)
            if not vs:
                continue
            for pred, params in targets:
                if vs <= set(params):
                    renaming = {v: f"A{i}" for i, v in enumerate(params, 1)}
                    bucket = table.setdefault(pred, [])
                    renamed = c.rename(renaming)
                    if renamed not in bucket:
                        bucket.append(renamed)
    return PropertySet.from_constraints(table)


def parse_properties(text: str, p: Program) -> PropertySet:
    """Parse ``pred(V1,..,Vk): c1; c2; ... .`` blocks against a program."""
    parser = Parser(text)
    table: dict[str, list[AtomicConstraint]] = {}
    while not parser.at_eof():
        name = parser.expect_kind("ident", "predicate name")
        if name.text not in p.predicates:
            raise ValidationError(f"unknown predicate {name.text}", name.line, name.column)
        params: list[str] = []
        parser.expect("(")
        while not parser.at(")"):
            var = parser.expect_kind("var", "variable")
            if var.text in params:
                raise ValidationError(f"repeated variable {var.text}", var.line, var.column)
            params.append(var.text)
            if not parser.at(","):
                break
            parser.advance()
        parser.expect(")")
        if len(params) != p.predicates[name.text]:
            raise ValidationError(
                f"arity mismatch for {name.text}: {len(params)} variables given, "
                f"predicate has {p.predicates[name.text]}", name.line, name.column)
        parser.expect(":")
        renaming = {v: f"A{i}" for i, v in enumerate(params, 1)}
        bucket = table.setdefault(name.text, [])
        while True:
            start = parser.tok
            c = parser.constraint()
            stray = [v for v in c.variables if v not in renaming]
            if stray:
                raise ValidationError(
                    f"property mentions {', '.join(stray)}, not a parameter of {name.text}",
                    start.line, start.column)
            renamed = c.rename(renaming)
            if renamed not in bucket:
                bucket.append(renamed)
            if parser.at(";"):
                parser.advance()
                continue
            break
        parser.expect(".")
    return PropertySet.from_constraints(table)


def format_properties(psi: PropertySet, arities: Mapping[str, int]) -> str:
    lines = []
    for pred in psi.predicates:
        params = ",".join(formals(arities[pred]))
        body = "; ".join(str(prop) for prop in psi.of(pred))
        lines.append(f"{pred}({params}): {body}.\n")
    return "".join(lines)
