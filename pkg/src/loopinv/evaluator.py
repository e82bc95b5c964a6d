"""Concrete semantics over the naturals.

Arithmetic conventions: subtraction is monus (truncating at zero),
division and modulus are euclidean and raise a division error when the
divisor is zero (0/0 included), and 0^0 = 1.  Boolean connectives are
short-circuit, so `false ∧ 1/0 = 0` evaluates to false.

Statement execution is pure: the input store is never mutated.  Fuel
counts loop-body iterations only (straight-line code is free); an
optional hook observes loop entry, each iteration, and loop exit, which
is how trajectory collection is implemented.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .terms import (
    App,
    Assign,
    Block,
    BoundVar,
    Call,
    Case,
    Ctor,
    Expr,
    If,
    Lam,
    Num,
    Op,
    Seq,
    Skip,
    Stmt,
    Var,
    While,
    Where,
)

Store = dict[str, int]

# hook(event, loop_node, store_snapshot); event ∈ {"enter", "iter", "exit"}
ExecHook = Callable[[str, While, Store], None]


class EvalError(Exception):
    """Expression evaluation failed; kind ∈ {DivByZero, UnboundVar}."""

    def __init__(self, kind: str, detail: str):
        super().__init__(f"{kind}: {detail}")
        self.kind = kind
        self.detail = detail


@dataclass(frozen=True)
class ExecOutcome:
    pass


@dataclass(frozen=True)
class Finished(ExecOutcome):
    store: dict


@dataclass(frozen=True)
class FuelExhausted(ExecOutcome):
    pass


@dataclass(frozen=True)
class ExecError(ExecOutcome):
    kind: str


def eval_expr(e: Expr, store: Store) -> int | bool:
    match e:
        case Var(name):
            try:
                return store[name]
            except KeyError:
                raise EvalError("UnboundVar", name) from None
        case Num(value):
            return value
        case Ctor("True", _):
            return True
        case Ctor("False", _):
            return False
        case Ctor("Zero", _):
            return 0
        case Ctor("Succ", (arg,)):
            return eval_expr(arg, store) + 1
        case Op("¬", (a,)):
            return not eval_expr(a, store)
        case Op("∧", (a, b)):
            return eval_expr(a, store) and bool(eval_expr(b, store))
        case Op("∨", (a, b)):
            return eval_expr(a, store) or bool(eval_expr(b, store))
        case Op("⇒", (a, b)):
            return (not eval_expr(a, store)) or bool(eval_expr(b, store))
        case Op(op, (a, b)):
            x = eval_expr(a, store)
            y = eval_expr(b, store)
            match op:
                case "+":
                    return x + y
                case "-":
                    return max(x - y, 0)  # monus
                case "*":
                    return x * y
                case "/":
                    if y == 0:
                        raise EvalError("DivByZero", f"{x}/0")
                    return x // y
                case "%":
                    if y == 0:
                        raise EvalError("DivByZero", f"{x}%0")
                    return x % y
                case "^":
                    return x**y  # 0^0 = 1
                case "<":
                    return x < y
                case ">":
                    return x > y
                case "≤":
                    return x <= y
                case "≥":
                    return x >= y
                case "=":
                    return x == y
                case "≠":
                    return x != y
        case Case(scrut, branches):
            v = eval_expr(scrut, store)
            if isinstance(v, bool):
                want = "True" if v else "False"
                for name, arity, body in branches:
                    if name == want and arity == 0:
                        return eval_expr(body, store)
            raise ValueError(f"unsupported case scrutinee {v!r}")
        case Lam() | BoundVar() | Call() | App() | Where():
            raise ValueError(f"cannot evaluate higher-order node {type(e).__name__}")
    raise TypeError(f"not an Expr: {e!r}")


def holds(e: Expr, store: Store, errors: list[EvalError] | None = None) -> bool:
    """Truth of a boolean expression; evaluation errors count as false.

    When `errors` is given, absorbed errors are appended to it so callers
    can distinguish genuine falsity from failure to evaluate.
    """
    try:
        v = eval_expr(e, store)
    except EvalError as err:
        if errors is not None:
            errors.append(err)
        return False
    if not isinstance(v, bool):
        raise ValueError(f"holds() needs a boolean expression, got value {v!r}")
    return v


class _OutOfFuel(Exception):
    pass


def exec_stmt(st: Stmt, store: Store, fuel: int, hook: ExecHook | None = None) -> ExecOutcome:
    """Run a statement on a copy of `store`; fuel bounds loop iterations."""
    s = dict(store)
    budget = [fuel]
    try:
        _run(st, s, budget, hook)
    except _OutOfFuel:
        return FuelExhausted()
    except EvalError as err:
        return ExecError(err.kind)
    return Finished(s)


def _run(st: Stmt, s: Store, budget: list[int], hook: ExecHook | None) -> None:
    match st:
        case Skip():
            return
        case Assign(var, rhs):
            s[var] = eval_expr(rhs, s)
        case Seq(a, b):
            _run(a, s, budget, hook)
            _run(b, s, budget, hook)
        case If(cond, t, e):
            _run(t if eval_expr(cond, s) else e, s, budget, hook)
        case Block(locs, body):
            saved = {v: s[v] for v in locs if v in s}
            for v in locs:
                s[v] = 0
            _run(body, s, budget, hook)
            for v in locs:
                if v in saved:
                    s[v] = saved[v]
                else:
                    del s[v]
        case While(cond, body) as loop:
            if hook is not None:
                hook("enter", loop, dict(s))
            while eval_expr(cond, s):
                if budget[0] <= 0:
                    raise _OutOfFuel()
                budget[0] -= 1
                if hook is not None:
                    hook("iter", loop, dict(s))
                _run(body, s, budget, hook)
            if hook is not None:
                hook("exit", loop, dict(s))
        case _:
            raise TypeError(f"not a Stmt: {st!r}")
