import random
from fractions import Fraction

import pytest

from cfr.interp import (
    InterpState,
    Status,
    Trace,
    TraceStep,
    UnderdeterminedClause,
    check_property_soundness,
    solve,
)
from cfr.properties import EMPTY_PSI, AbstractState, abstract, delta_D, ground_store
from cfr.syntax import BodyAtom, Goal, LinExpr, parse_goal, parse_program

from oracles import simulate_loop


def test_example_goal_terminates(loop, loop_psi):
    out = solve(parse_goal("while0(5,3,10)"), loop_psi, loop, 10000)
    assert out.status is Status.SUCCESS
    assert simulate_loop(5, 3, 10) == (True, 25)
    assert out.calls == 25
    assert out.trace.step_count == 25 and len(out.trace.steps) == 25


def test_example_trace_shape(loop, loop_psi):
    out = solve(parse_goal("while0(5,3,10)"), loop_psi, loop, 10000)
    first, second, last = out.trace.steps[0], out.trace.steps[1], out.trace.steps[-1]
    assert first.state.describe(loop_psi) == "while0(5,3,10) [A1>0]"
    assert second.state.describe(loop_psi) == "if0(5,3,10) [A1>0, A2<A3]"
    assert last.state.describe(loop_psi) == "while0(0,10,10) [A1=<0, A2>=A3]"
    assert [s.clause_index for s in out.trace.steps[:2]] == [0, 2]
    assert last.clause_index == 1


def test_immediate_exit(loop, loop_psi):
    out = solve(Goal("while0", (0, 0, 0)), loop_psi, loop, 100)
    assert out.success and out.calls == 1
    assert out.trace.steps[0].clause_index == 1


def test_budget(loop, loop_psi):
    goal = parse_goal("while0(5,3,10)")
    assert solve(goal, loop_psi, loop, 25).success
    out = solve(goal, loop_psi, loop, 24)
    assert out.status is Status.BUDGET_EXHAUSTED
    assert out.calls == 24
    with pytest.raises(ValueError):
        solve(goal, loop_psi, loop, 0)


def test_nonterminating_reports_budget():
    p = parse_program("p(X) :- p(X).")
    out = solve(Goal("p", (1,)), EMPTY_PSI, p, 500)
    assert out.status is Status.BUDGET_EXHAUSTED and out.calls == 500


def test_deep_recursion_without_stack_overflow():
    p = parse_program("count(N) :- N>0, M=N-1, count(M).\ncount(N) :- N=<0.")
    out = solve(Goal("count", (50000,)), EMPTY_PSI, p, 100000)
    assert out.success and out.calls == 50001


def test_backtracking():
    p = parse_program("""
        p(X) :- q(X), r(X).
        q(X) :- X>5.
        q(X) :- X>0.
        r(X) :- X<3.
    """)
    out = solve(Goal("p", (1,)), EMPTY_PSI, p, 100)
    assert out.success
    # q(1) fails the guard of its first clause and resolves with the second
    assert [s.clause_index for s in out.trace.steps] == [0, 2, 3]
    out = solve(Goal("p", (7,)), EMPTY_PSI, p, 100)
    assert out.status is Status.FAILURE
    # p, q via clause 1, r fails, retry q via clause 2, r fails again
    assert out.calls == 4


def test_failure_on_undefined_predicate():
    p = parse_program("p(X) :- X>0, q(X).")
    assert solve(Goal("p", (1,)), EMPTY_PSI, p, 10).status is Status.FAILURE


def test_underdetermined_local():
    p = parse_program("p(X) :- Z>X, q(Z).\nq(X).")
    with pytest.raises(UnderdeterminedClause, match="underdetermined"):
        solve(Goal("p", (1,)), EMPTY_PSI, p, 10)
    # a ground guard that fails first just makes the clause inapplicable
    p = parse_program("p(X) :- X>5, Z>X, q(Z).\nq(X).")
    assert solve(Goal("p", (1,)), EMPTY_PSI, p, 10).status is Status.FAILURE


def test_locals_solved_in_any_order():
    p = parse_program("p(X) :- B=A+1, A=2*X, B=7.")
    assert solve(Goal("p", (3,)), EMPTY_PSI, p, 10).success
    assert not solve(Goal("p", (2,)), EMPTY_PSI, p, 10).success


def test_rational_arithmetic():
    p = parse_program("half(X) :- 2*Y=X, Y<1/2+1.")
    assert solve(Goal("half", (Fraction(5, 2),)), EMPTY_PSI, p, 10).success
    assert not solve(Goal("half", (3,)), EMPTY_PSI, p, 10).success


def test_agrees_with_loop_simulator(loop, loop_psi):
    rng = random.Random(1)
    for _ in range(150):
        x, y, m = (rng.randint(-20, 20) for _ in range(3))
        ok, calls = simulate_loop(x, y, m)
        out = solve(Goal("while0", (x, y, m)), loop_psi, loop, 10000)
        assert out.success == ok and out.calls == calls
        assert check_property_soundness(out.trace, loop_psi)


def test_runtime_phi_agrees_with_delta_D(loop, loop_psi):
    out = solve(parse_goal("while0(2,-1,1)"), loop_psi, loop, 1000)
    for step in out.trace.steps:
        st = step.state
        ctx = ground_store(st.values)
        callee_args = tuple(LinExpr.var(f"A{i}") for i in (1, 2, 3))
        assert st.phi == delta_D(ctx, BodyAtom(st.predicate, callee_args), loop_psi)
        assert st.phi == abstract(st.predicate, ctx, loop_psi)


def test_property_soundness_check(loop_psi):
    assert check_property_soundness(Trace(), loop_psi)
    bad = InterpState("while0", (Fraction(0), Fraction(1), Fraction(2)), AbstractState("while0", (0,)))
    assert not check_property_soundness(Trace([TraceStep(bad, 0)], 1), loop_psi)
