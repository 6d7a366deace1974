import pytest

from dynflow.lang import (
    DivisionByZero, ExecTrace, Nontermination, Overflow, TypeMismatch, UnboundName,
    eval_expr, run, step, try_run,
)
from dynflow.syntax import SKIP, parse_expr, parse_program


def outputs(tr):
    return [(o.label, o.value) for o in tr.outputs]


def test_assign_and_output():
    tr = run(parse_program("x := 2; output(L, x * 3)"), {"x": 0})
    assert [v for _, v in outputs(tr)] == [6]
    assert tr.memories[-1]["x"] == 2


def test_division_truncates_toward_zero():
    assert eval_expr({}, parse_expr("7 / 2")) == 3
    assert eval_expr({}, parse_expr("-7 / 2")) == -3
    assert eval_expr({}, parse_expr("7 / -2")) == -3


def test_division_by_zero_is_stuck():
    with pytest.raises(DivisionByZero):
        run(parse_program("x := 1 / y"), {"y": 0, "x": 0})


def test_overflow_is_stuck():
    with pytest.raises(Overflow):
        run(parse_program("x := x * x"), {"x": 2 ** 40})


def test_unbound_name_is_stuck():
    with pytest.raises(UnboundName):
        run(parse_program("x := y"), {"x": 0})


def test_event_in_arithmetic_is_a_type_mismatch():
    with pytest.raises(TypeMismatch):
        eval_expr({"e": True}, parse_expr("e + 1", events={"e"}))


def test_truthy_conditions():
    p = parse_program("if (h) { output(L, 1) } else { output(L, 0) }")
    assert [v for _, v in outputs(run(p, {"h": 5}))] == [1]
    assert [v for _, v in outputs(run(p, {"h": 0}))] == [0]


def test_events_start_false_and_toggle():
    p = parse_program("output(L, 0); EventOn(e); if (e) { output(L, 1) } EventOff(e)")
    tr = run(p, {})
    assert tr.memories[0]["e"] is False
    assert tr.memories[-1]["e"] is False
    assert [v for _, v in outputs(tr)] == [0, 1]


def test_locks_set_their_event():
    tr = run(parse_program("open(D); close(D)"), {})
    # the extra configuration is the skip; c -> c step
    assert [m["s_D"] for m in tr.memories] == [False, True, True, False]


def test_output_step_is_the_emitting_configuration():
    tr = run(parse_program("x := 1; output(L, x)"), {"x": 0})
    (o,) = tr.outputs
    assert tr.configs[o.step][0] != SKIP
    assert tr.memories[o.step]["x"] == 1


def test_while_loop():
    tr = run(parse_program("while (x < 3) { output(L, x); x := x + 1 }"), {"x": 0})
    assert [v for _, v in outputs(tr)] == [0, 1, 2]


def test_fuel_bounds_nontermination():
    p = parse_program("while (1 == 1) { skip }")
    assert isinstance(run(p, {}, fuel=50), Nontermination)
    assert try_run(p, {}, fuel=50) is None


def test_try_run_excludes_stuck_memories():
    assert try_run(parse_program("x := 1 / y"), {"x": 0, "y": 0}) is None
    assert isinstance(try_run(parse_program("x := 1 / y"), {"x": 0, "y": 1}), ExecTrace)


def test_step_on_skip_is_rejected():
    with pytest.raises(ValueError):
        step(SKIP, {})


def test_prefix_keeps_earlier_outputs():
    tr = run(parse_program("output(L, 1); output(L, 2)"), {})
    assert len(tr.prefix(1).outputs) == 1
    assert len(tr.prefix(len(tr)).outputs) == 2
    assert len(tr.postfix(1)) == len(tr)


def test_initial_memory_is_not_mutated():
    m = {"x": 0}
    run(parse_program("x := 5"), m)
    assert m == {"x": 0}
