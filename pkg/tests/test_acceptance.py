"""Acceptance criteria, one test each.

Every test prints a single ``[PASS]``/``[FAIL]`` line (visible with ``-s`` or
in the captured output of ``-v``) before asserting.
"""

import os
import random
import re
import subprocess
import sys
import time

import numpy as np
import pytest

from cfr.cli import main
from cfr.equiv import differential, sample_goals
from cfr.interp import Status, check_property_soundness, solve
from cfr.linear import Store, entails, satisfiable
from cfr.properties import derive_properties
from cfr.specialize import Entry, SpecConfig, specialize
from cfr.syntax import parse_goal, parse_program

from oracles import box_matrix, eval_on_box, random_constraint, random_program, random_store, simulate_loop


@pytest.fixture
def report(capsys):
    def emit(criterion, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}")
        return ok
    return emit


def _refine(capsys, loop_path, *extra):
    code = main(["refine", str(loop_path), "--props", "auto", "--entry", "while0/3", *extra])
    out, _ = capsys.readouterr()
    assert code == 0
    return out


def _shape(text):
    """Map each residual predicate to (source predicate, sorted clause shapes)."""
    source = dict(re.findall(r"^% (\S+): (\S+) ", text, re.M))
    p = parse_program(text)
    shapes = {}
    for name in p.predicates:
        kinds = []
        for _, c in p.clauses_for(name):
            guard = ", ".join(sorted(str(k) for k in c.constraints))
            call = "call" if c.body else "exit"
            kinds.append(f"{guard} -> {call}")
        shapes[name] = (source[name], tuple(sorted(kinds)))
    return shapes


def test_criterion_1_example_refinement(capsys, report, loop_path):
    start = time.perf_counter()
    text = _refine(capsys, loop_path, "--annotate")
    elapsed = time.perf_counter() - start
    shapes = _shape(text)
    expected = sorted([
        # unconstrained entry: both while0 clauses
        ("while0", ("X=<0 -> exit", "X>0 -> call")),
        # X>0 known: exit clause pruned
        ("while0", ("X>0 -> call",)),
        # if0 with both branches
        ("if0", ("X>0, Y<M -> call", "X>0, Y>=M -> call")),
        # Y>=M known: increment branch pruned, decrement call kept
        ("if0", ("X>0, Y>=M -> call",)),
        # further while0 version keeping its exit clause
        ("while0", ("X=<0, Y>=M -> exit", "X>0, Y>=M -> call")),
    ])
    got = sorted(shapes.values())
    ok = len(shapes) == 5 and got == expected and elapsed < 1.0
    report(1, ok, f"{len(shapes)} versions, structure {'matches' if got == expected else 'differs'}, "
                  f"{elapsed:.3f}s (< 1s)")
    assert got == expected
    assert elapsed < 1.0


def test_criterion_2_semantic_equivalence(capsys, report, loop_path, tmp_path):
    refined = tmp_path / "refined.chc"
    assert main(["refine", str(loop_path), "--entry", "while0/3", "-o", str(refined)]) == 0
    start = time.perf_counter()
    code = main(["check-equiv", str(loop_path), str(refined), "--entry", "while0/3",
                 "--entry-version", "solve__1", "--seed", "42", "--trials", "200",
                 "--range=-20:20", "--max-steps", "10000"])
    elapsed = time.perf_counter() - start
    out, _ = capsys.readouterr()
    counts = dict(re.findall(r"^([a-z ]+): (\d+)$", out, re.M))
    ok = (code == 0 and counts.get("trials") == "200" and counts.get("disagreements") == "0"
          and counts.get("budget exhausted") == "0" and elapsed < 5.0)
    report(2, ok, f"trials {counts.get('trials')}, disagreements {counts.get('disagreements')}, "
                  f"budget exhausted {counts.get('budget exhausted')}, {elapsed:.3f}s (< 5s)")
    assert ok, out


def test_criterion_3_mixed_run(report, loop, loop_psi):
    expected_ok, expected_calls = simulate_loop(5, 3, 10)
    out = solve(parse_goal("while0(5,3,10)"), loop_psi, loop, 100000)
    sound = out.trace is not None and check_property_soundness(out.trace, loop_psi)
    ok = (out.status is Status.SUCCESS and expected_ok and out.calls == expected_calls == 25 and sound)
    report(3, ok, f"status {out.status.value}, calls {out.calls} (simulator {expected_calls}), "
                  f"property soundness {'holds' if sound else 'violated'}")
    assert ok


def test_criterion_4_constraint_oracle(report):
    rng = random.Random(20240)
    boxes = {n: box_matrix(n) for n in (1, 2, 3)}
    stores = unsat = entailed = violations = 0
    start = time.perf_counter()
    while stores < 1200:
        variables, conj = random_store(rng)
        pts = boxes[len(variables)]
        mask = np.ones(len(pts), dtype=bool)
        for c in conj:
            mask &= eval_on_box(c, variables, pts)
        s = Store(conj)
        stores += 1
        if not satisfiable(s):
            unsat += 1
            violations += int(mask.any())
            continue
        for _ in range(3):
            c = random_constraint(rng, variables)
            if entails(s, c):
                entailed += 1
                violations += int((mask & ~eval_on_box(c, variables, pts)).any())
    elapsed = time.perf_counter() - start
    ok = violations == 0 and elapsed < 30.0 and stores >= 1000
    report(4, ok, f"{stores} stores ({unsat} unsat, {entailed} entailments), "
                  f"{violations} violations, {elapsed:.2f}s (< 30s)")
    assert violations == 0
    assert elapsed < 30.0


def test_criterion_5_version_bound(report, loop, loop_psi):
    def bound(p, psi):
        return sum(2 ** len(psi.of(q)) for q in p.predicates)

    worst = []
    r = specialize(loop, loop_psi, SpecConfig(Entry("while0")))
    worst.append((len(r.versions), bound(loop, loop_psi)))
    example = worst[0]
    rng = random.Random(77)
    for i in range(60):
        p = random_program(rng)
        psi = derive_properties(p)
        for strengthen in (True, False):
            r = specialize(p, psi, SpecConfig(Entry("p"), strengthen=strengthen))
            worst.append((len(r.versions), bound(p, psi)))
            if i % 6 == 0:
                goals = sample_goals("p", 2, (-6, 6), 20, i)
                assert differential(p, r, r.entry_name, goals, psi, 400).ok
    ok = all(n <= b for n, b in worst) and example == (5, 16)
    report(5, ok, f"example {example[0]} <= {example[1]}; {len(worst) - 1} randomized runs "
                  f"all within bound, max versions {max(n for n, _ in worst[1:])}")
    assert ok


def test_criterion_6_determinism(capsys, report, loop_path):
    first = _refine(capsys, loop_path)
    second = _refine(capsys, loop_path)
    # separate interpreters with different hash seeds
    procs = [subprocess.run([sys.executable, "-m", "cfr", "refine", str(loop_path), "--entry", "while0/3"],
                            capture_output=True, check=True,
                            env={**os.environ, "PYTHONHASHSEED": seed}).stdout
             for seed in ("1", "2")]
    ok = first.encode() == second.encode() == procs[0] == procs[1]
    report(6, ok, f"in-process and cross-process refine outputs "
                  f"{'byte-identical' if ok else 'differ'} ({len(first)} bytes)")
    assert ok
