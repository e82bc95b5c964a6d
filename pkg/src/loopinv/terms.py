"""Term language shared by programs and assertions.

A single expression type serves both program arithmetic and boolean
assertions.  The only binders (lambda, case patterns, where) use de Bruijn
indices, so structural equality coincides with alpha-equivalence and
substituting for free names can never capture.  Parsed programs use only
the first-order fragment (Var/Num/Ctor/Op); the remaining constructors
exist so the embedding and generalisation machinery is total over the
full term language.

Numerals are stored compactly as ``Num`` nodes rather than unary
``Succ``-chains; the embedding view expands them on demand.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields


class SortError(Exception):
    """An expression is not well-sorted over {nat, bool}."""


# ---------------------------------------------------------------------------
# Expressions


@dataclass(frozen=True)
class Expr:
    """Base class for expression nodes."""


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class Num(Expr):
    value: int

    def __post_init__(self) -> None:
        if not isinstance(self.value, int) or isinstance(self.value, bool) or self.value < 0:
            raise ValueError(f"numerals are naturals, got {self.value!r}")


CTOR_ARITY = {"Zero": 0, "Succ": 1, "True": 0, "False": 0}


@dataclass(frozen=True)
class Ctor(Expr):
    name: str
    args: tuple[Expr, ...] = ()

    def __post_init__(self) -> None:
        if self.name not in CTOR_ARITY:
            raise ValueError(f"unknown constructor {self.name!r}")
        if len(self.args) != CTOR_ARITY[self.name]:
            raise ValueError(f"{self.name} takes {CTOR_ARITY[self.name]} args, got {len(self.args)}")


NAT_OPS = ("+", "-", "*", "/", "%", "^")
REL_OPS = ("<", ">", "≤", "≥", "=", "≠")
BOOL_BINOPS = ("∧", "∨", "⇒")
ALL_OPS = NAT_OPS + REL_OPS + BOOL_BINOPS + ("¬",)


@dataclass(frozen=True)
class Op(Expr):
    op: str
    args: tuple[Expr, ...]

    def __post_init__(self) -> None:
        if self.op not in ALL_OPS:
            raise ValueError(f"unknown operator {self.op!r}")
        arity = 1 if self.op == "¬" else 2
        if len(self.args) != arity:
            raise ValueError(f"{self.op} takes {arity} args, got {len(self.args)}")


@dataclass(frozen=True)
class Lam(Expr):
    body: Expr


@dataclass(frozen=True)
class BoundVar(Expr):
    index: int

    def __post_init__(self) -> None:
        if self.index < 0:
            raise ValueError("de Bruijn index must be nonnegative")


@dataclass(frozen=True)
class Call(Expr):
    name: str


@dataclass(frozen=True)
class App(Expr):
    fun: Expr
    arg: Expr


@dataclass(frozen=True)
class Case(Expr):
    scrutinee: Expr
    # (constructor name, pattern arity, branch body); pattern variables are
    # referenced from the body as BoundVar 0..arity-1.
    branches: tuple[tuple[str, int, Expr], ...]


@dataclass(frozen=True)
class Where(Expr):
    main: Expr
    defs: tuple[tuple[str, Expr], ...]


TRUE = Ctor("True")
FALSE = Ctor("False")


def succ(e: Expr) -> Expr:
    """Successor that keeps numerals in compact form."""
    if isinstance(e, Num):
        return Num(e.value + 1)
    return Ctor("Succ", (e,))


def conjoin(conjuncts: list[Expr]) -> Expr:
    """Right-nested conjunction of a list; [] is True and [e] is e."""
    if not conjuncts:
        return TRUE
    out = conjuncts[-1]
    for c in reversed(conjuncts[:-1]):
        out = Op("∧", (c, out))
    return out


# ---------------------------------------------------------------------------
# Traversals

Subst = dict[str, Expr]


def substitute(e: Expr, theta: Subst) -> Expr:
    """Simultaneously replace free named variables per theta.

    Simultaneous means a binding's result is never re-substituted.  Bound
    structure (de Bruijn indices) is untouched; replacement terms must not
    contain loose BoundVars, which no caller in this package produces.
    """
    if not theta:
        return e
    match e:
        case Var(name):
            return theta.get(name, e)
        case Num() | BoundVar() | Call():
            return e
        case Ctor(name, args):
            return Ctor(name, tuple(substitute(a, theta) for a in args))
        case Op(op, args):
            return Op(op, tuple(substitute(a, theta) for a in args))
        case Lam(body):
            return Lam(substitute(body, theta))
        case App(fun, arg):
            return App(substitute(fun, theta), substitute(arg, theta))
        case Case(scrut, branches):
            return Case(
                substitute(scrut, theta),
                tuple((n, k, substitute(b, theta)) for n, k, b in branches),
            )
        case Where(main, defs):
            return Where(substitute(main, theta), tuple((f, substitute(d, theta)) for f, d in defs))
        case _:
            raise TypeError(f"not an Expr: {e!r}")


def free_vars(e: Expr) -> frozenset[str]:
    match e:
        case Var(name):
            return frozenset((name,))
        case Num() | BoundVar() | Call():
            return frozenset()
        case Ctor(_, args) | Op(_, args):
            out: frozenset[str] = frozenset()
            for a in args:
                out |= free_vars(a)
            return out
        case Lam(body):
            return free_vars(body)
        case App(fun, arg):
            return free_vars(fun) | free_vars(arg)
        case Case(scrut, branches):
            out = free_vars(scrut)
            for _, _, b in branches:
                out |= free_vars(b)
            return out
        case Where(main, defs):
            out = free_vars(main)
            for _, d in defs:
                out |= free_vars(d)
            return out
        case _:
            raise TypeError(f"not an Expr: {e!r}")


def alpha_eq(e1: Expr, e2: Expr) -> bool:
    """Alpha-equivalence; structural equality under de Bruijn binders."""
    return e1 == e2


def renaming_of(e1: Expr, e2: Expr, renameable: frozenset[str] | set[str]) -> dict[str, str] | None:
    """If e1 equals e2 with some bijective renaming of `renameable` names,
    return that renaming as a map from e2's names to e1's; otherwise None.

    Names outside `renameable` are rigid and must match exactly; a
    renameable name never maps to a rigid one or vice versa.
    """
    mapping: dict[str, str] = {}
    used: set[str] = set()

    def walk(a: Expr, b: Expr) -> bool:
        match (a, b):
            case (Var(x), Var(y)):
                x_ren, y_ren = x in renameable, y in renameable
                if not x_ren and not y_ren:
                    return x == y
                if x_ren and y_ren:
                    if y in mapping:
                        return mapping[y] == x
                    if x in used:
                        return False  # injectivity
                    mapping[y] = x
                    used.add(x)
                    return True
                return False
            case (Num(m), Num(n)):
                return m == n
            case (BoundVar(i), BoundVar(j)):
                return i == j
            case (Call(f), Call(g)):
                return f == g
            case (Ctor(n1, a1), Ctor(n2, a2)):
                return n1 == n2 and all(walk(x, y) for x, y in zip(a1, a2))
            case (Op(o1, a1), Op(o2, a2)):
                return o1 == o2 and len(a1) == len(a2) and all(walk(x, y) for x, y in zip(a1, a2))
            case (Lam(b1), Lam(b2)):
                return walk(b1, b2)
            case (App(f1, x1), App(f2, x2)):
                return walk(f1, f2) and walk(x1, x2)
            case (Case(s1, br1), Case(s2, br2)):
                if len(br1) != len(br2) or not walk(s1, s2):
                    return False
                return all(
                    n1 == n2 and k1 == k2 and walk(b1, b2)
                    for (n1, k1, b1), (n2, k2, b2) in zip(br1, br2)
                )
            case (Where(m1, d1), Where(m2, d2)):
                if len(d1) != len(d2) or not walk(m1, m2):
                    return False
                return all(f1 == f2 and walk(x1, x2) for (f1, x1), (f2, x2) in zip(d1, d2))
            case _:
                return False

    return mapping if walk(e1, e2) else None


# ---------------------------------------------------------------------------
# Sorts

NAT, BOOL = "nat", "bool"


def sort_of(e: Expr) -> str:
    """Infer the sort (nat or bool) of a first-order expression.

    Program variables are nat-sorted; operators have fixed signatures.
    Raises SortError for ill-sorted terms and for higher-order nodes,
    which have no first-order sort.
    """
    match e:
        case Var(_) | Num(_):
            return NAT
        case Ctor("True" | "False", _):
            return BOOL
        case Ctor("Zero", _):
            return NAT
        case Ctor("Succ", (arg,)):
            if sort_of(arg) != NAT:
                raise SortError("Succ applied to a boolean")
            return NAT
        case Op("¬", (a,)):
            if sort_of(a) != BOOL:
                raise SortError("¬ applied to a natural")
            return BOOL
        case Op(op, (a, b)) if op in NAT_OPS or op in REL_OPS:
            if sort_of(a) != NAT or sort_of(b) != NAT:
                raise SortError(f"{op} needs natural operands")
            return NAT if op in NAT_OPS else BOOL
        case Op(op, (a, b)) if op in BOOL_BINOPS:
            if sort_of(a) != BOOL or sort_of(b) != BOOL:
                raise SortError(f"{op} needs boolean operands")
            return BOOL
        case Case(scrut, branches):
            if sort_of(scrut) != BOOL:
                raise SortError("case scrutinee must be boolean")
            sorts = {sort_of(b) for _, _, b in branches}
            if len(sorts) != 1:
                raise SortError("case branches disagree on sort")
            return sorts.pop()
        case _:
            raise SortError(f"no first-order sort for {type(e).__name__}")


# ---------------------------------------------------------------------------
# Statements


@dataclass(frozen=True)
class Stmt:
    """Base class for statement nodes."""


@dataclass(frozen=True)
class Skip(Stmt):
    pass


@dataclass(frozen=True)
class Assign(Stmt):
    var: str
    rhs: Expr


@dataclass(frozen=True)
class Seq(Stmt):
    first: Stmt
    second: Stmt


@dataclass(frozen=True)
class If(Stmt):
    cond: Expr
    then_branch: Stmt
    else_branch: Stmt


@dataclass(frozen=True)
class Block(Stmt):
    locals: tuple[str, ...]
    body: Stmt


@dataclass(frozen=True)
class While(Stmt):
    cond: Expr
    body: Stmt
    invariant: Expr | None = None
    # A postcondition asserted immediately after the loop in the source
    # (`WHILE b DO s {q}`); engines use it to summarise inner loops.
    post: Expr | None = None
    line: int | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Triple:
    pre: Expr
    program: Stmt
    post: Expr


def assigned_vars(st: Stmt) -> frozenset[str]:
    """Variables a statement can observably assign (block locals excluded,
    since they are restored on block exit)."""
    match st:
        case Skip():
            return frozenset()
        case Assign(var, _):
            return frozenset((var,))
        case Seq(a, b):
            return assigned_vars(a) | assigned_vars(b)
        case If(_, t, e):
            return assigned_vars(t) | assigned_vars(e)
        case Block(locs, body):
            return assigned_vars(body) - frozenset(locs)
        case While(_, body):
            return assigned_vars(body)
        case _:
            raise TypeError(f"not a Stmt: {st!r}")


def stmt_vars(st: Stmt) -> frozenset[str]:
    """All variables a statement reads or writes (annotations excluded)."""
    match st:
        case Skip():
            return frozenset()
        case Assign(var, rhs):
            return frozenset((var,)) | free_vars(rhs)
        case Seq(a, b):
            return stmt_vars(a) | stmt_vars(b)
        case If(cond, t, e):
            return free_vars(cond) | stmt_vars(t) | stmt_vars(e)
        case Block(locs, body):
            return frozenset(locs) | stmt_vars(body)
        case While(cond, body):
            return free_vars(cond) | stmt_vars(body)
        case _:
            raise TypeError(f"not a Stmt: {st!r}")


def program_vars(t: Triple) -> frozenset[str]:
    """Every variable the triple's executable parts or contracts mention."""
    return stmt_vars(t.program) | free_vars(t.pre) | free_vars(t.post)
