"""Exact decision procedures for conjunctions of linear constraints over the rationals.

Satisfiability, entailment and projection all go through one Fourier-Motzkin
routine with Gaussian pre-elimination of equalities.  No integer tightening is
done anywhere: ``Y<M`` is never strengthened to ``Y=<M-1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import AbstractSet, Iterable, Iterator, Mapping

from .syntax import (
    FALSE_CONSTRAINT,
    AtomicConstraint,
    LinExpr,
    format_constraint,
    iter_variables,
)


@dataclass(frozen=True)
class Store:
    """A conjunction of normalized atomic constraints; the empty store is ``true``."""

    conjuncts: tuple[AtomicConstraint, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "conjuncts", tuple(self.conjuncts))

    @classmethod
    def of(cls, *constraints: AtomicConstraint) -> "Store":
        return cls(constraints)

    def __iter__(self) -> Iterator[AtomicConstraint]:
        return iter(self.conjuncts)

    def __len__(self) -> int:
        return len(self.conjuncts)

    def __bool__(self) -> bool:
        # An empty store is still a meaningful value (true); avoid `if store:` traps.
        return True

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(iter_variables(self.conjuncts))

    def is_false(self) -> bool:
        return any(c.is_false() for c in self.conjuncts)

    def __str__(self) -> str:
        if not self.conjuncts:
            return "true"
        return ", ".join(format_constraint(c) for c in self.conjuncts)


TRUE = Store()
FALSE = Store((FALSE_CONSTRAINT,))


def conjoin(a: Store, b: Store) -> Store:
    return Store(a.conjuncts + b.conjuncts)


def substitute(s: Store, binding: Mapping[str, LinExpr]) -> Store:
    return Store(tuple(c.substitute(binding) for c in s.conjuncts))


# ---------------------------------------------------------------------------
# Fourier-Motzkin core.  Rows are (coeffs, const, op) meaning
# sum(coeffs[v]*v) + const  op  0  with op in {'<', '=<', '='}.
# ---------------------------------------------------------------------------

_Row = tuple[dict, Fraction, str]


def _row(c: AtomicConstraint) -> _Row:
    return dict(c.lhs.terms), c.lhs.constant, c.relop


def _constraint(row: _Row) -> AtomicConstraint:
    coeffs, const, op = row
    return AtomicConstraint(LinExpr(coeffs.items(), const), op)


def _const_holds(const: Fraction, op: str) -> bool:
    if op == "<":
        return const < 0
    if op == "=<":
        return const <= 0
    return const == 0


def _substitute_row(row: _Row, var: str, coeffs: dict, const: Fraction) -> _Row:
    """Replace ``var`` in row by ``sum(coeffs) + const``."""
    rc, rk, op = row
    a = rc.get(var)
    if a is None:
        return row
    out: dict = {}
    for v, c in rc.items():
        if v == var:
            for w, d in coeffs.items():
                out[w] = out.get(w, Fraction(0)) + a * d
        else:
            out[v] = out.get(v, Fraction(0)) + c
    return {v: c for v, c in out.items() if c != 0}, rk + a * const, op


def _direction_key(coeffs: dict) -> tuple[tuple[tuple[str, Fraction], ...], Fraction]:
    """Coefficient vector scaled so its largest-magnitude entry is 1 in magnitude."""
    scale = max(abs(c) for c in coeffs.values())
    return tuple(sorted((v, c / scale) for v, c in coeffs.items())), scale


def _remove_redundant(rows: list[_Row]) -> list[_Row]:
    """Drop duplicate and parallel-but-weaker inequalities; keep first-seen order."""
    best: dict = {}
    order: list = []
    others: list[tuple[int, _Row]] = []
    for i, row in enumerate(rows):
        coeffs, const, op = row
        if op == "=":
            others.append((i, row))
            continue
        key, scale = _direction_key(coeffs)
        k = const / scale
        strict = op == "<"
        cur = best.get(key)
        if cur is None:
            best[key] = (k, strict, i, row)
            order.append(key)
        elif k > cur[0] or (k == cur[0] and strict and not cur[1]):
            best[key] = (k, strict, cur[2], row)
    kept = others + [(best[key][2], best[key][3]) for key in order]
    kept.sort(key=lambda t: t[0])
    seen_eq: set = set()
    out: list[_Row] = []
    for _, row in kept:
        if row[2] == "=":
            sig = _constraint(row)
            if sig in seen_eq:
                continue
            seen_eq.add(sig)
        out.append(row)
    return out


def _eliminate(rows: list[_Row], eliminate: list[str]) -> list[_Row] | None:
    """Project ``rows`` onto the complement of ``eliminate``; None means unsatisfiable."""
    elim = list(eliminate)
    rows = list(rows)

    # Gaussian elimination with every equality that mentions an eliminated variable.
    while True:
        pivot = None
        for idx, (coeffs, const, op) in enumerate(rows):
            if op != "=":
                continue
            for v in coeffs:
                if v in elim:
                    pivot = idx, v
                    break
            if pivot:
                break
        if pivot is None:
            break
        idx, var = pivot
        coeffs, const, _ = rows.pop(idx)
        a = coeffs[var]
        sol = {v: -c / a for v, c in coeffs.items() if v != var}
        rows = [_substitute_row(r, var, sol, -const / a) for r in rows]
        elim.remove(var)

    rows = _check_constants(rows)
    if rows is None:
        return None
    rows = _remove_redundant(rows)

    while elim:
        # Cheapest variable first: fewest generated rows, ties by name.
        def cost(v: str) -> tuple[int, str]:
            pos = sum(1 for r in rows if r[0].get(v, 0) > 0)
            neg = sum(1 for r in rows if r[0].get(v, 0) < 0)
            return pos * neg - pos - neg, v

        var = min(elim, key=cost)
        elim.remove(var)
        pos, neg, rest = [], [], []
        for r in rows:
            a = r[0].get(var, 0)
            (pos if a > 0 else neg if a < 0 else rest).append(r)
        for pc, pk, pop in pos:
            a = pc[var]
            for nc, nk, nop in neg:
                b = -nc[var]
                coeffs: dict = {}
                for v in list(pc) + list(nc):
                    if v == var or v in coeffs:
                        continue
                    c = b * pc.get(v, 0) + a * nc.get(v, 0)
                    if c != 0:
                        coeffs[v] = c
                op = "<" if "<" in (pop, nop) else "=<"
                rest.append((coeffs, b * pk + a * nk, op))
        rows = _check_constants(rest)
        if rows is None:
            return None
        rows = _remove_redundant(rows)
    return rows


def _check_constants(rows: list[_Row]) -> list[_Row] | None:
    out = []
    for row in rows:
        if not row[0]:
            if not _const_holds(row[1], row[2]):
                return None
            continue
        out.append(row)
    return out


# ---------------------------------------------------------------------------
# Public decision procedures
# ---------------------------------------------------------------------------

def project(s: Store, keep: AbstractSet[str] | Iterable[str]) -> Store:
    """Strongest conjunction over ``keep`` implied by ``s``; ``FALSE`` if a contradiction shows up."""
    keep = set(keep)
    elim = [v for v in s.variables if v not in keep]
    rows = _eliminate([_row(c) for c in s.conjuncts], elim)
    if rows is None:
        return FALSE
    return Store(tuple(_constraint(r) for r in rows))


def satisfiable(s: Store) -> bool:
    return _eliminate([_row(c) for c in s.conjuncts], list(s.variables)) is not None


def entails(s: Store, c: AtomicConstraint) -> bool:
    """True iff every rational solution of ``s`` satisfies ``c``."""
    for neg in c.negations():
        if satisfiable(Store(s.conjuncts + (neg,))):
            return False
    return True


def entails_all(s: Store, t: Store) -> bool:
    return all(entails(s, c) for c in t.conjuncts)


def simplify(s: Store) -> Store:
    """Greedy left-to-right removal of conjuncts entailed by the remaining ones."""
    kept = list(s.conjuncts)
    i = 0
    while i < len(kept):
        others = Store(tuple(kept[:i] + kept[i + 1:]))
        if entails(others, kept[i]):
            del kept[i]
        else:
            i += 1
    return Store(tuple(kept))
