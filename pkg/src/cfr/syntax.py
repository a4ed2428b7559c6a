"""Constrained Horn clause syntax: linear terms, constraints, clauses, programs.

Text format (``%`` starts a line comment)::

    while0(X,Y,M) :- X>0, if0(X,Y,M).
    while0(X,Y,M) :- X=<0.
    if0(X,Y,M) :- Y<M, Y1=Y+1, while0(X,Y1,M).
    if0(X,Y,M) :- Y>=M, X1=X-1, while0(X1,Y,M).

All arithmetic is linear over exact rationals.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Iterator, Mapping, Optional, Sequence

VAR_RE = re.compile(r"[A-Z][A-Za-z0-9_]*\Z")
IDENT_RE = re.compile(r"[a-z][A-Za-z0-9_]*\Z")

RELOPS = ("<", "=<", "=", ">=", ">")
NORMAL_RELOPS = ("<", "=<", "=")
_FLIP = {"<": ">", "=<": ">=", "=": "=", ">": "<", ">=": "=<"}


class CHCError(Exception):
    """Base class for user-facing input errors; carries an optional position."""

    def __init__(self, message: str, line: Optional[int] = None,
                 column: Optional[int] = None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.column = column

    def __str__(self) -> str:
        if self.line is None:
            return self.message
        return f"{self.line}:{self.column}: {self.message}"


class ParseError(CHCError):
    pass


class ValidationError(CHCError):
    pass


# ---------------------------------------------------------------------------
# Linear expressions and constraints
# ---------------------------------------------------------------------------

def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


class LinExpr:
    """Immutable linear expression ``sum(c_i * V_i) + constant``.

    Term order is kept for printing only; equality and hashing ignore it.
    """

    __slots__ = ("terms", "constant", "_key")

    def __init__(self, terms: Iterable[tuple[str, Fraction]] = (),
                 constant=0):
        merged: dict[str, Fraction] = {}
        for var, coeff in terms:
            merged[var] = merged.get(var, Fraction(0)) + _frac(coeff)
        self.terms = tuple((v, c) for v, c in merged.items() if c != 0)
        self.constant = _frac(constant)
        self._key = (frozenset(self.terms), self.constant)

    @classmethod
    def var(cls, name: str) -> "LinExpr":
        return cls(((name, Fraction(1)),))

    @classmethod
    def const(cls, value) -> "LinExpr":
        return cls((), value)

    def __setattr__(self, name, value):
        if hasattr(self, "_key"):
            raise AttributeError("LinExpr is immutable")
        object.__setattr__(self, name, value)

    def __eq__(self, other) -> bool:
        return isinstance(other, LinExpr) and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __repr__(self) -> str:
        return f"LinExpr({format_linexpr(self)!r})"

    def __str__(self) -> str:
        return format_linexpr(self)

    @property
    def coefficients(self) -> dict[str, Fraction]:
        return dict(self.terms)

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(v for v, _ in self.terms)

    def coeff(self, var: str) -> Fraction:
        for v, c in self.terms:
            if v == var:
                return c
        return Fraction(0)

    def is_constant(self) -> bool:
        return not self.terms

    def as_variable(self) -> Optional[str]:
        """The variable name if this expression is exactly one variable."""
        if len(self.terms) == 1 and self.terms[0][1] == 1 and self.constant == 0:
            return self.terms[0][0]
        return None

    def __add__(self, other: "LinExpr") -> "LinExpr":
        return LinExpr(self.terms + other.terms, self.constant + other.constant)

    def __neg__(self) -> "LinExpr":
        return LinExpr(((v, -c) for v, c in self.terms), -self.constant)

    def __sub__(self, other: "LinExpr") -> "LinExpr":
        return self + (-other)

    def scale(self, k) -> "LinExpr":
        k = _frac(k)
        return LinExpr(((v, c * k) for v, c in self.terms), self.constant * k)

    def substitute(self, binding: Mapping[str, "LinExpr"]) -> "LinExpr":
        """Simultaneous substitution of variables by linear expressions."""
        terms: list[tuple[str, Fraction]] = []
        const = self.constant
        for v, c in self.terms:
            repl = binding.get(v)
            if repl is None:
                terms.append((v, c))
            else:
                terms.extend((w, c * d) for w, d in repl.terms)
                const += c * repl.constant
        return LinExpr(terms, const)

    def rename(self, renaming: Mapping[str, str]) -> "LinExpr":
        return LinExpr(((renaming.get(v, v), c) for v, c in self.terms),
                       self.constant)

    def evaluate(self, values: Mapping[str, Fraction]) -> Fraction:
        total = self.constant
        for v, c in self.terms:
            total += c * values[v]
        return total


ZERO = LinExpr()


def _holds(value: Fraction, relop: str) -> bool:
    if relop == "<":
        return value < 0
    if relop == "=<":
        return value <= 0
    return value == 0


@dataclass(frozen=True)
class AtomicConstraint:
    """``lhs relop 0``, normalized on construction.

    ``>``/``>=`` are flipped to ``<``/``=<``; coefficients are scaled to a
    primitive integer vector; equalities get a canonical sign (the
    alphabetically least variable is positive).  Variable-free constraints
    collapse to ``0=0`` (true) or ``0<0`` (false).
    """

    lhs: LinExpr
    relop: str

    def __post_init__(self):
        lhs, relop = self.lhs, self.relop
        if relop not in RELOPS:
            raise ValueError(f"unknown relational operator {relop!r}")
        if relop in (">", ">="):
            lhs, relop = -lhs, _FLIP[relop]
        if lhs.is_constant():
            truth = _holds(lhs.constant, relop)
            lhs, relop = ZERO, ("=" if truth else "<")
        else:
            nums = [c for _, c in lhs.terms] + [lhs.constant]
            den = lcm(*(q.denominator for q in nums))
            g = gcd(*(int(q * den) for q in nums))
            k = Fraction(den, g)
            if relop == "=" and min(lhs.terms)[1] < 0:
                k = -k
            if k != 1:
                lhs = lhs.scale(k)
        object.__setattr__(self, "lhs", lhs)
        object.__setattr__(self, "relop", relop)

    @classmethod
    def build(cls, left: LinExpr, relop: str, right: LinExpr) -> "AtomicConstraint":
        return cls(left - right, relop)

    @property
    def variables(self) -> tuple[str, ...]:
        return self.lhs.variables

    def is_true(self) -> bool:
        return self.lhs.is_constant() and self.relop == "="

    def is_false(self) -> bool:
        return self.lhs.is_constant() and self.relop == "<"

    def substitute(self, binding: Mapping[str, LinExpr]) -> "AtomicConstraint":
        return AtomicConstraint(self.lhs.substitute(binding), self.relop)

    def rename(self, renaming: Mapping[str, str]) -> "AtomicConstraint":
        return AtomicConstraint(self.lhs.rename(renaming), self.relop)

    def holds(self, values: Mapping[str, Fraction]) -> bool:
        return _holds(self.lhs.evaluate(values), self.relop)

    def negations(self) -> tuple["AtomicConstraint", ...]:
        """Constraints whose disjunction is the negation of this one."""
        if self.relop == "<":
            return (AtomicConstraint(-self.lhs, "=<"),)
        if self.relop == "=<":
            return (AtomicConstraint(-self.lhs, "<"),)
        return (AtomicConstraint(self.lhs, "<"), AtomicConstraint(-self.lhs, "<"))

    def __str__(self) -> str:
        return format_constraint(self)

    def __repr__(self) -> str:
        return f"AtomicConstraint({format_constraint(self)!r})"


TRUE_CONSTRAINT = AtomicConstraint(ZERO, "=")
FALSE_CONSTRAINT = AtomicConstraint(ZERO, "<")


# ---------------------------------------------------------------------------
# Clauses and programs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BodyAtom:
    predicate: str
    args: tuple[LinExpr, ...]

    @property
    def variables(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for a in self.args:
            seen.update(dict.fromkeys(a.variables))
        return tuple(seen)

    def __str__(self) -> str:
        return f"{self.predicate}({','.join(format_linexpr(a) for a in self.args)})"


@dataclass(frozen=True)
class Clause:
    head_predicate: str
    head_params: tuple[str, ...]
    constraints: tuple[AtomicConstraint, ...] = ()
    body: tuple[BodyAtom, ...] = ()

    def __post_init__(self):
        if len(set(self.head_params)) != len(self.head_params):
            raise ValidationError(
                f"head arguments of {self.head_predicate} must be distinct variables")

    @property
    def arity(self) -> int:
        return len(self.head_params)

    @property
    def local_vars(self) -> tuple[str, ...]:
        """Variables of the clause that are not head parameters, in order of appearance."""
        head = set(self.head_params)
        seen: dict[str, None] = {}
        for c in self.constraints:
            seen.update(dict.fromkeys(v for v in c.variables if v not in head))
        for a in self.body:
            seen.update(dict.fromkeys(v for v in a.variables if v not in head))
        return tuple(seen)

    def __str__(self) -> str:
        return format_clause(self)


@dataclass(frozen=True)
class Program:
    """An ordered list of clauses with consistent predicate arities."""

    clauses: tuple[Clause, ...] = ()
    predicates: dict[str, int] = field(default_factory=dict, compare=False)
    _by_pred: dict[str, tuple[int, ...]] = field(
        default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        clauses = tuple(self.clauses)
        object.__setattr__(self, "clauses", clauses)
        arities = dict(self.predicates)
        by_pred: dict[str, list[int]] = {}

        def note(name: str, arity: int) -> None:
            known = arities.setdefault(name, arity)
            if known != arity:
                raise ValidationError(
                    f"arity mismatch for {name}: used with {arity} and {known} arguments")

        for i, c in enumerate(clauses):
            note(c.head_predicate, c.arity)
            by_pred.setdefault(c.head_predicate, []).append(i)
            for a in c.body:
                note(a.predicate, len(a.args))
        object.__setattr__(self, "predicates", arities)
        object.__setattr__(self, "_by_pred",
                           {k: tuple(v) for k, v in by_pred.items()})

    def clauses_for(self, predicate: str) -> list[tuple[int, Clause]]:
        return [(i, self.clauses[i]) for i in self._by_pred.get(predicate, ())]

    def __len__(self) -> int:
        return len(self.clauses)


@dataclass(frozen=True)
class Goal:
    predicate: str
    args: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(_frac(a) for a in self.args))

    def __str__(self) -> str:
        return f"{self.predicate}({','.join(format_number(a) for a in self.args)})"


def formals(arity: int) -> tuple[str, ...]:
    """Canonical formal parameter names ``A1..Ak``."""
    return tuple(f"A{i}" for i in range(1, arity + 1))


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

def format_number(q: Fraction) -> str:
    q = _frac(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _format_terms(terms: Sequence[tuple[str, Fraction]], constant: Fraction) -> str:
    parts: list[str] = []
    for var, c in terms:
        mag = abs(c)
        text = var if mag == 1 else f"{format_number(mag)}*{var}"
        if not parts:
            parts.append(text if c > 0 else "-" + text)
        else:
            parts.append(("+" if c > 0 else "-") + text)
    if constant != 0 or not parts:
        mag = format_number(abs(constant))
        if not parts:
            parts.append(mag if constant >= 0 else "-" + mag)
        else:
            parts.append(("+" if constant > 0 else "-") + mag)
    return "".join(parts)


def format_linexpr(e: LinExpr) -> str:
    return _format_terms(e.terms, e.constant)


def format_constraint(c: AtomicConstraint) -> str:
    lhs, relop = c.lhs, c.relop
    if lhs.is_constant():
        return f"{format_number(lhs.constant)}{relop}0"
    if lhs.terms[0][1] < 0:
        lhs, relop = -lhs, _FLIP[relop]
    left = [(v, k) for v, k in lhs.terms if k > 0]
    right = [(v, -k) for v, k in lhs.terms if k < 0]
    return f"{_format_terms(left, Fraction(0))}{relop}{_format_terms(right, -lhs.constant)}"


def format_clause(c: Clause) -> str:
    head = f"{c.head_predicate}({','.join(c.head_params)})"
    items = [format_constraint(k) for k in c.constraints] + [str(a) for a in c.body]
    if not items:
        return head + "."
    return f"{head} :- {', '.join(items)}."


def print_program(p: Program) -> str:
    return "".join(format_clause(c) + "\n" for c in p.clauses)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+) | (?P<nl>\n) | (?P<comment>%[^\n]*)
  | (?P<num>[0-9]+)
  | (?P<var>[A-Z][A-Za-z0-9_]*)
  | (?P<ident>[a-z][A-Za-z0-9_]*)
  | (?P<op>:-|=<|>=|<|>|=|\(|\)|,|\.|\+|-|\*|/|:|;)
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}",
                             line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class Parser:
    """Recursive-descent parser over the token stream; shared with the properties format."""

    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0

    # -- token helpers
    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def at(self, text: str) -> bool:
        return self.tok.kind == "op" and self.tok.text == text

    def at_eof(self) -> bool:
        return self.tok.kind == "eof"

    def error(self, message: str, tok: Optional[Token] = None) -> ParseError:
        tok = tok or self.tok
        found = "end of input" if tok.kind == "eof" else repr(tok.text)
        return ParseError(f"{message}, found {found}", tok.line, tok.column)

    def advance(self) -> Token:
        tok = self.tok
        self.pos += 1
        return tok

    def expect(self, text: str) -> Token:
        if not self.at(text):
            raise self.error(f"expected {text!r}")
        return self.advance()

    def expect_kind(self, kind: str, what: str) -> Token:
        if self.tok.kind != kind:
            raise self.error(f"expected {what}")
        return self.advance()

    # -- grammar
    def number(self) -> Fraction:
        num = self.expect_kind("num", "number")
        value = Fraction(int(num.text))
        if self.at("/"):
            self.advance()
            den = self.expect_kind("num", "denominator")
            if int(den.text) == 0:
                raise ParseError("division by zero", den.line, den.column)
            value /= int(den.text)
        return value

    def term(self) -> LinExpr:
        if self.tok.kind == "var":
            var = self.advance()
            if self.at("*") or self.at("/"):
                nxt = self.peek()
                if nxt.kind == "var":
                    raise ParseError(f"non-linear term {var.text}{self.tok.text}{nxt.text}",
                                     var.line, var.column)
                raise self.error("coefficients must precede variables")
            return LinExpr.var(var.text)
        if self.tok.kind == "num":
            value = self.number()
            if self.at("*"):
                self.advance()
                var = self.expect_kind("var", "variable after '*'")
                if self.at("*"):
                    raise ParseError("non-linear term", var.line, var.column)
                return LinExpr(((var.text, value),))
            return LinExpr.const(value)
        raise self.error("expected a variable or number")

    def linexpr(self) -> LinExpr:
        negate = False
        if self.at("-") or self.at("+"):
            negate = self.advance().text == "-"
        expr = self.term()
        if negate:
            expr = -expr
        while self.at("+") or self.at("-"):
            op = self.advance().text
            t = self.term()
            expr = expr + t if op == "+" else expr - t
        return expr

    def relop(self) -> str:
        if self.tok.kind == "op" and self.tok.text in RELOPS:
            return self.advance().text
        raise self.error("expected a relational operator")

    def constraint(self) -> AtomicConstraint:
        left = self.linexpr()
        op = self.relop()
        right = self.linexpr()
        return AtomicConstraint.build(left, op, right)

    def args(self) -> list[tuple[LinExpr, Token]]:
        self.expect("(")
        out: list[tuple[LinExpr, Token]] = []
        if not self.at(")"):
            while True:
                start = self.tok
                out.append((self.linexpr(), start))
                if self.at(","):
                    self.advance()
                    continue
                break
        self.expect(")")
        return out

    def head(self) -> tuple[str, tuple[str, ...], Token]:
        name = self.expect_kind("ident", "predicate name")
        params: list[str] = []
        for expr, tok in self.args():
            var = expr.as_variable()
            if var is None:
                raise ValidationError(
                    f"head argument {format_linexpr(expr)} of {name.text} is not a variable; "
                    "introduce a fresh variable and an explicit equality constraint",
                    tok.line, tok.column)
            if var in params:
                raise ValidationError(
                    f"repeated head variable {var} in {name.text}; "
                    "use a fresh variable and an explicit equality constraint",
                    tok.line, tok.column)
            params.append(var)
        return name.text, tuple(params), name

    def clause(self) -> tuple[Clause, list[tuple[str, int, Token]]]:
        pred, params, head_tok = self.head()
        uses = [(pred, len(params), head_tok)]
        constraints: list[AtomicConstraint] = []
        body: list[BodyAtom] = []
        if self.at(":-"):
            self.advance()
            while True:
                if self.tok.kind == "ident" and self.peek().text == "(":
                    tok = self.tok
                    atom = self.atom()
                    body.append(atom)
                    uses.append((atom.predicate, len(atom.args), tok))
                else:
                    constraints.append(self.constraint())
                if self.at(","):
                    self.advance()
                    continue
                break
        self.expect(".")
        return Clause(pred, params, tuple(constraints), tuple(body)), uses

    def atom(self) -> BodyAtom:
        name = self.expect_kind("ident", "predicate name")
        return BodyAtom(name.text, tuple(e for e, _ in self.args()))


def parse_program(text: str) -> Program:
    """Parse CHC clauses; raises ParseError/ValidationError with line and column."""
    parser = Parser(text)
    clauses: list[Clause] = []
    arities: dict[str, int] = {}
    while not parser.at_eof():
        clause, uses = parser.clause()
        for name, arity, tok in uses:
            known = arities.setdefault(name, arity)
            if known != arity:
                raise ValidationError(
                    f"arity mismatch for {name}: {arity} arguments here, {known} elsewhere",
                    tok.line, tok.column)
        clauses.append(clause)
    return Program(tuple(clauses))


def parse_goal(text: str) -> Goal:
    parser = Parser(text)
    name = parser.expect_kind("ident", "predicate name")
    values: list[Fraction] = []
    for expr, tok in parser.args():
        if not expr.is_constant():
            raise ValidationError(
                f"goal argument {format_linexpr(expr)} is not ground", tok.line, tok.column)
        values.append(expr.constant)
    if parser.at("."):
        parser.advance()
    if not parser.at_eof():
        raise parser.error("expected end of goal")
    return Goal(name.text, tuple(values))


def parse_constraints(text: str) -> tuple[AtomicConstraint, ...]:
    """Parse a comma-separated conjunction such as ``"A1>0, A2>=A3"``."""
    parser = Parser(text)
    out: list[AtomicConstraint] = []
    if parser.at_eof():
        return ()
    while True:
        out.append(parser.constraint())
        if parser.at(","):
            parser.advance()
            continue
        break
    if not parser.at_eof():
        raise parser.error("expected ',' or end of input")
    return tuple(out)


def iter_variables(items: Iterable) -> Iterator[str]:
    seen: set[str] = set()
    for item in items:
        for v in item.variables:
            if v not in seen:
                seen.add(v)
                yield v
