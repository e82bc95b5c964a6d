"""Concrete execution: natural-number arithmetic, error outcomes, fuel,
and the loop observation hook.

The expected stores below were computed by hand from the programs and
frozen before the evaluator existed.
"""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from loopinv.evaluator import (
    EvalError,
    ExecError,
    Finished,
    FuelExhausted,
    eval_expr,
    exec_stmt,
    holds,
)
from loopinv.parser import parse_expression, parse_program


def e(text):
    return parse_expression(text)


# --- arithmetic conventions -------------------------------------------------


def test_monus_truncates_at_zero():
    assert eval_expr(e("3 - 5"), {}) == 0
    assert eval_expr(e("5 - 3"), {}) == 2


def test_division_is_euclidean():
    assert eval_expr(e("7 / 2"), {}) == 3
    assert eval_expr(e("7 % 2"), {}) == 1


def test_division_by_zero_raises():
    with pytest.raises(EvalError) as err:
        eval_expr(e("1 / 0"), {})
    assert err.value.kind == "DivByZero"
    with pytest.raises(EvalError):
        eval_expr(e("0 / 0"), {})
    with pytest.raises(EvalError):
        eval_expr(e("1 % 0"), {})


def test_zero_to_the_zero_is_one():
    assert eval_expr(e("0 ^ 0"), {}) == 1
    assert eval_expr(e("0 ^ 3"), {}) == 0
    assert eval_expr(e("2 ^ 10"), {}) == 1024


def test_unbound_variable_raises():
    with pytest.raises(EvalError) as err:
        eval_expr(e("x + 1"), {})
    assert err.value.kind == "UnboundVar"


def test_short_circuit_left_to_right():
    # The right operand never evaluates, so its division by zero is unseen.
    assert eval_expr(e("1 = 2 /\\ 1 / 0 = 0"), {}) is False
    assert eval_expr(e("1 = 1 \\/ 1 / 0 = 0"), {}) is True
    assert eval_expr(e("1 = 2 => 1 / 0 = 0"), {}) is True


def test_holds_absorbs_errors():
    errors = []
    assert holds(e("x / y = 1"), {"x": 1, "y": 0}, errors) is False
    assert len(errors) == 1


# --- frozen execution oracles ----------------------------------------------


def test_exponentiation_by_iteration():
    src = """{n >= 0}
x := 0;
y := 1;
WHILE x < n DO
BEGIN
  x := x + 1;
  y := y * k
END
{y = k ^ n}"""
    t = parse_program(src)
    out = exec_stmt(t.program, {"n": 3, "k": 2, "x": 0, "y": 0}, fuel=100)
    assert isinstance(out, Finished)
    assert out.store["x"] == 3 and out.store["y"] == 8
    assert holds(t.post, out.store)


def test_exponentiation_by_squaring():
    src = """{n >= 0}
x := n;
y := 1;
z := k;
WHILE x > 0 DO
BEGIN
  IF x % 2 = 1 THEN y := y * z;
  z := z * z;
  x := x / 2
END
{y = k ^ n}"""
    t = parse_program(src)
    out = exec_stmt(t.program, {"n": 5, "k": 3, "x": 0, "y": 0, "z": 0}, fuel=100)
    assert isinstance(out, Finished)
    assert out.store["y"] == 243


def test_holds_on_frozen_store():
    assert holds(e("x >= n /\\ y = k ^ n"), {"x": 3, "n": 3, "y": 8, "k": 2})


# --- outcomes ---------------------------------------------------------------


def test_fuel_counts_loop_iterations():
    t = parse_program("{n >= 0} WHILE 0 = 0 DO skip {n >= 0}")
    assert isinstance(exec_stmt(t.program, {"n": 0}, fuel=50), FuelExhausted)
    t2 = parse_program("{n >= 0} WHILE x < n DO x := x + 1 {x = n}")
    assert isinstance(exec_stmt(t2.program, {"n": 10, "x": 0}, fuel=10), Finished)
    assert isinstance(exec_stmt(t2.program, {"n": 10, "x": 0}, fuel=9), FuelExhausted)


def test_exec_error_outcome():
    t = parse_program("{n >= 0} x := 1 / n {n >= 0}")
    out = exec_stmt(t.program, {"n": 0, "x": 0}, fuel=10)
    assert isinstance(out, ExecError) and out.kind == "DivByZero"


def test_exec_does_not_mutate_input_store():
    t = parse_program("{n >= 0} x := 5 {n >= 0}")
    store = {"n": 0, "x": 0}
    exec_stmt(t.program, store, fuel=10)
    assert store == {"n": 0, "x": 0}


def test_block_locals_saved_and_restored():
    src = "{n >= 0} t := 9; BEGIN VAR t; t := 1; x := t END; y := t {n >= 0}"
    t = parse_program(src)
    out = exec_stmt(t.program, {"n": 0, "t": 0, "x": 0, "y": 0}, fuel=10)
    assert isinstance(out, Finished)
    assert out.store["x"] == 1 and out.store["y"] == 9


def test_hook_sees_enter_iter_exit():
    t = parse_program("{n >= 0} WHILE x < n DO x := x + 1 {x = n}")
    loop = t.program
    events = []
    exec_stmt(t.program, {"n": 2, "x": 0}, fuel=10, hook=lambda ev, node, s: events.append((ev, s["x"])))
    assert events == [("enter", 0), ("iter", 0), ("iter", 1), ("exit", 2)]
    del loop


# --- property: evaluation is a function of the store ------------------------


@given(st.integers(0, 30), st.integers(0, 30))
def test_eval_matches_python_semantics(a, b):
    store = {"a": a, "b": b}
    assert eval_expr(e("a + b"), store) == a + b
    assert eval_expr(e("a - b"), store) == max(a - b, 0)
    assert eval_expr(e("a * b"), store) == a * b
    if b:
        assert eval_expr(e("a / b"), store) == a // b
        assert eval_expr(e("a % b"), store) == a % b
    assert eval_expr(e("a <= b"), store) == (a <= b)
