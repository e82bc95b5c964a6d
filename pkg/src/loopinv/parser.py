"""Concrete syntax: lexer, recursive-descent parser, and pretty-printer.

Input files have the shape ``{pre} statements {post}``.  Assertions and
program expressions share one grammar.  Operator precedence, loosest to
tightest: ⇒ (right-assoc), ∨, ∧, relations (non-chaining), + -, * / %,
^, ¬.  All binary operators except ⇒ associate to the left.  ASCII
spellings (/\\ \\/ ~ => <= >= !=) and the unicode equivalents are both
accepted; keywords are case-insensitive; ``--`` starts a line comment.

Loops may carry two optional braced assertions::

    WHILE b DO { invariant } body { post }

The leading one (right after DO) is an invariant; the trailing one is a
loop postcondition, except at the very end of the program where a braced
assertion is the program's own postcondition.

Programs are sort-checked at parse time: program variables are naturals,
conditions and contracts must be boolean, assignment right-hand sides
natural.
"""

from __future__ import annotations

from dataclasses import dataclass

from .terms import (
    BOOL,
    NAT,
    Assign,
    Block,
    Expr,
    If,
    Num,
    Op,
    Seq,
    Skip,
    SortError,
    Stmt,
    Triple,
    Var,
    While,
    sort_of,
    FALSE,
    TRUE,
    Case,
    Ctor,
    Lam,
    BoundVar,
    Call,
    App,
    Where,
    BOOL_BINOPS,
    NAT_OPS,
    REL_OPS,
)


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str  # NUM IDENT KW OP LBRACE RBRACE LPAREN RPAREN SEMI COMMA ASSIGN EOF
    value: str
    line: int
    col: int


KEYWORDS = {"SKIP", "IF", "THEN", "ELSE", "WHILE", "DO", "BEGIN", "END", "VAR", "TRUE", "FALSE"}

# Longest match first.
_SYMBOLS = [
    (":=", ("ASSIGN", ":=")),
    ("=>", ("OP", "⇒")),
    ("<=", ("OP", "≤")),
    (">=", ("OP", "≥")),
    ("!=", ("OP", "≠")),
    ("/\\", ("OP", "∧")),
    ("\\/", ("OP", "∨")),
    ("⇒", ("OP", "⇒")),
    ("≤", ("OP", "≤")),
    ("≥", ("OP", "≥")),
    ("≠", ("OP", "≠")),
    ("∧", ("OP", "∧")),
    ("∨", ("OP", "∨")),
    ("¬", ("OP", "¬")),
    ("~", ("OP", "¬")),
    ("+", ("OP", "+")),
    ("-", ("OP", "-")),
    ("*", ("OP", "*")),
    ("/", ("OP", "/")),
    ("%", ("OP", "%")),
    ("^", ("OP", "^")),
    ("<", ("OP", "<")),
    (">", ("OP", ">")),
    ("=", ("OP", "=")),
    ("{", ("LBRACE", "{")),
    ("}", ("RBRACE", "}")),
    ("(", ("LPAREN", "(")),
    (")", ("RPAREN", ")")),
    (";", ("SEMI", ";")),
    (",", ("COMMA", ",")),
]


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("--", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch.isdigit():
            start = i
            while i < n and text[i].isdigit():
                i += 1
            tokens.append(Token("NUM", text[start:i], line, col))
            col += i - start
            continue
        if ch.isalpha() or ch == "_":
            start = i
            while i < n and (text[i].isalnum() or text[i] == "_"):
                i += 1
            word = text[start:i]
            if word.upper() in KEYWORDS:
                tokens.append(Token("KW", word.upper(), line, col))
            elif word != word.lower():
                raise ParseError(f"identifiers are lowercase, got {word!r}", line, col)
            else:
                tokens.append(Token("IDENT", word, line, col))
            col += i - start
            continue
        for sym, (kind, value) in _SYMBOLS:
            if text.startswith(sym, i):
                tokens.append(Token(kind, value, line, col))
                i += len(sym)
                col += len(sym)
                break
        else:
            raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(Token("EOF", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    # -- token plumbing ----------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def accept(self, kind: str, value: str | None = None) -> Token | None:
        tok = self.peek()
        if tok.kind == kind and (value is None or tok.value == value):
            return self.advance()
        return None

    def expect(self, kind: str, value: str | None = None, what: str | None = None) -> Token:
        tok = self.accept(kind, value)
        if tok is None:
            cur = self.peek()
            expected = what or (value if value is not None else kind)
            got = cur.value or cur.kind
            raise ParseError(f"expected {expected}, got {got!r}", cur.line, cur.col)
        return tok

    def fail(self, message: str) -> ParseError:
        tok = self.peek()
        return ParseError(message, tok.line, tok.col)

    # -- expressions -------------------------------------------------------

    def expression(self) -> Expr:
        return self._implies()

    def _implies(self) -> Expr:
        left = self._or()
        if self.accept("OP", "⇒"):
            return Op("⇒", (left, self._implies()))  # right-assoc
        return left

    def _or(self) -> Expr:
        left = self._and()
        while self.accept("OP", "∨"):
            left = Op("∨", (left, self._and()))
        return left

    def _and(self) -> Expr:
        left = self._rel()
        while self.accept("OP", "∧"):
            left = Op("∧", (left, self._rel()))
        return left

    def _rel(self) -> Expr:
        left = self._add()
        tok = self.peek()
        if tok.kind == "OP" and tok.value in REL_OPS:
            self.advance()
            right = self._add()
            nxt = self.peek()
            if nxt.kind == "OP" and nxt.value in REL_OPS:
                raise ParseError("comparisons do not chain; parenthesise", nxt.line, nxt.col)
            return Op(tok.value, (left, right))
        return left

    def _add(self) -> Expr:
        left = self._mul()
        while True:
            tok = self.peek()
            if tok.kind == "OP" and tok.value in ("+", "-"):
                self.advance()
                left = Op(tok.value, (left, self._mul()))
            else:
                return left

    def _mul(self) -> Expr:
        left = self._pow()
        while True:
            tok = self.peek()
            if tok.kind == "OP" and tok.value in ("*", "/", "%"):
                self.advance()
                left = Op(tok.value, (left, self._pow()))
            else:
                return left

    def _pow(self) -> Expr:
        left = self._unary()
        while self.accept("OP", "^"):
            left = Op("^", (left, self._unary()))
        return left

    def _unary(self) -> Expr:
        if self.accept("OP", "¬"):
            return Op("¬", (self._unary(),))
        return self._atom()

    def _atom(self) -> Expr:
        tok = self.peek()
        if tok.kind == "NUM":
            self.advance()
            return Num(int(tok.value))
        if tok.kind == "IDENT":
            self.advance()
            return Var(tok.value)
        if tok.kind == "KW" and tok.value == "TRUE":
            self.advance()
            return TRUE
        if tok.kind == "KW" and tok.value == "FALSE":
            self.advance()
            return FALSE
        if self.accept("LPAREN"):
            e = self.expression()
            self.expect("RPAREN")
            return e
        raise self.fail(f"expected an expression, got {tok.value or tok.kind!r}")

    def sorted_expression(self, want: str, what: str) -> Expr:
        tok = self.peek()
        e = self.expression()
        try:
            got = sort_of(e)
        except SortError as err:
            raise ParseError(f"{what}: {err}", tok.line, tok.col) from None
        if got != want:
            raise ParseError(f"{what} must be {want}-sorted, got {got}", tok.line, tok.col)
        return e

    def assertion(self, what: str) -> Expr:
        return self.sorted_expression(BOOL, what)

    # -- statements ----------------------------------------------------------

    def statements(self) -> Stmt:
        first = self.basic_statement()
        if self.accept("SEMI"):
            return Seq(first, self.statements())
        return first

    def basic_statement(self) -> Stmt:
        tok = self.peek()
        if tok.kind == "KW":
            match tok.value:
                case "SKIP":
                    self.advance()
                    return Skip()
                case "IF":
                    self.advance()
                    cond = self.assertion("condition")
                    self.expect("KW", "THEN")
                    then_branch = self.basic_statement()
                    if self.accept("KW", "ELSE"):
                        else_branch = self.basic_statement()
                    else:
                        else_branch = Skip()
                    return If(cond, then_branch, else_branch)
                case "WHILE":
                    return self.while_statement(tok)
                case "BEGIN":
                    self.advance()
                    locals_: tuple[str, ...] = ()
                    if self.accept("KW", "VAR"):
                        names = [self.expect("IDENT", what="variable name").value]
                        while self.accept("COMMA"):
                            names.append(self.expect("IDENT", what="variable name").value)
                        self.expect("SEMI")
                        locals_ = tuple(names)
                    body = self.statements()
                    self.expect("KW", "END")
                    if locals_:
                        return Block(locals_, body)
                    return body  # plain BEGIN..END is just grouping
        if tok.kind == "IDENT":
            self.advance()
            self.expect("ASSIGN")
            rhs = self.sorted_expression(NAT, "assignment right-hand side")
            return Assign(tok.value, rhs)
        raise self.fail(f"expected a statement, got {tok.value or tok.kind!r}")

    def while_statement(self, kw: Token) -> Stmt:
        self.advance()
        cond = self.assertion("loop condition")
        self.expect("KW", "DO")
        invariant = None
        if self.accept("LBRACE"):
            invariant = self.assertion("loop invariant")
            self.expect("RBRACE")
        body = self.basic_statement()
        post = None
        # A trailing {q} is this loop's postcondition unless it is the last
        # thing in the file, in which case it is the program postcondition.
        if self.peek().kind == "LBRACE":
            save = self.pos
            self.advance()
            q = self.assertion("loop postcondition")
            self.expect("RBRACE")
            if self.peek().kind == "EOF":
                self.pos = save
            else:
                post = q
        return While(cond, body, invariant=invariant, post=post, line=kw.line)


def parse_expression(text: str) -> Expr:
    """Parse a standalone expression (no sort restriction)."""
    p = _Parser(tokenize(text))
    e = p.expression()
    p.expect("EOF", what="end of input")
    return e


def parse_program(text: str) -> Triple:
    """Parse a ``{pre} statements {post}`` file into a sort-checked Triple."""
    p = _Parser(tokenize(text))
    p.expect("LBRACE", what="'{' opening the precondition")
    pre = p.assertion("precondition")
    p.expect("RBRACE")
    program = p.statements()
    p.expect("LBRACE", what="'{' opening the postcondition")
    post = p.assertion("postcondition")
    p.expect("RBRACE")
    p.expect("EOF", what="end of input")
    return Triple(pre, program, post)


# ---------------------------------------------------------------------------
# Pretty-printing

_PREC = {"⇒": 1, "∨": 2, "∧": 3}
_PREC.update({op: 4 for op in REL_OPS})
_PREC.update({"+": 5, "-": 5, "*": 6, "/": 6, "%": 6, "^": 7, "¬": 8})
_ATOM = 9


def _numeral(e: Expr) -> int | None:
    """Fold a Succ-chain over Zero/Num into a plain number, if possible."""
    k = 0
    while isinstance(e, Ctor) and e.name == "Succ":
        k += 1
        e = e.args[0]
    if isinstance(e, Num):
        return e.value + k
    if isinstance(e, Ctor) and e.name == "Zero":
        return k
    return None


def pretty(x: Expr | Stmt | Triple) -> str:
    """Render with unicode operators and minimal parentheses.

    Arithmetic and relational operators print tight (``x+1``, ``x%2=1``);
    boolean connectives are spaced.  Numeral Succ-chains fold to decimal.
    """
    if isinstance(x, Triple):
        return f"{{{pretty(x.pre)}}}\n{pretty(x.program)}\n{{{pretty(x.post)}}}"
    if isinstance(x, Stmt):
        return _pretty_stmt(x)
    return _pretty_expr(x, 0, "")


def _pretty_expr(e: Expr, parent: int, side: str) -> str:
    n = _numeral(e)
    if n is not None:
        return str(n)
    match e:
        case Var(name):
            return name
        case Ctor("True", _):
            return "true"
        case Ctor("False", _):
            return "false"
        case Op("¬", (a,)):
            return "¬" + _pretty_expr(a, _PREC["¬"], "right")
        case Op(op, (a, b)):
            prec = _PREC[op]
            assoc = "right" if op == "⇒" else ("" if op in REL_OPS else "left")
            body = (
                _pretty_expr(a, prec, "left")
                + (f" {op} " if op in BOOL_BINOPS else op)
                + _pretty_expr(b, prec, "right")
            )
            if prec < parent or (prec == parent and side != assoc):
                return f"({body})"
            return body
        case Case(scrut, (("True", 0, t), ("False", 0, f))) | Case(scrut, (("False", 0, f), ("True", 0, t))):
            body = (
                f"if {_pretty_expr(scrut, 0, '')} then "
                f"{_pretty_expr(t, 0, '')} else {_pretty_expr(f, 0, '')}"
            )
            return f"({body})" if parent > 0 else body
        case Lam(body):
            s = f"λ.{_pretty_expr(body, 0, '')}"
            return f"({s})" if parent > 0 else s
        case BoundVar(i):
            return f"#{i}"
        case Call(name):
            return name
        case App(fun, arg):
            return f"{_pretty_expr(fun, _ATOM, 'left')}({_pretty_expr(arg, 0, '')})"
        case Case(scrut, branches):
            arms = " | ".join(f"{n}/{k} -> {_pretty_expr(b, 0, '')}" for n, k, b in branches)
            return f"(case {_pretty_expr(scrut, 0, '')} of {arms})"
        case Where(main, defs):
            binds = ", ".join(f"{f} = {_pretty_expr(d, 0, '')}" for f, d in defs)
            return f"({_pretty_expr(main, 0, '')} where {binds})"
        case Ctor("Succ", (a,)):
            return f"succ({_pretty_expr(a, 0, '')})"
        case _:
            raise TypeError(f"not an Expr: {e!r}")


def _pretty_stmt(st: Stmt) -> str:
    match st:
        case Skip():
            return "SKIP"
        case Assign(var, rhs):
            return f"{var} := {pretty(rhs)}"
        case Seq(a, b):
            return f"{_pretty_stmt(a)}; {_pretty_stmt(b)}"
        case If(cond, t, e):
            s = f"IF {pretty(cond)} THEN {_pretty_stmt(t)}"
            if e != Skip():
                s += f" ELSE {_pretty_stmt(e)}"
            return s
        case Block(locs, body):
            if locs:
                return f"BEGIN VAR {', '.join(locs)}; {_pretty_stmt(body)} END"
            return f"BEGIN {_pretty_stmt(body)} END"
        case While(cond, body, invariant, post):
            inv = f" {{{pretty(invariant)}}}" if invariant is not None else ""
            tail = f" {{{pretty(post)}}}" if post is not None else ""
            inner = _pretty_stmt(body)
            if isinstance(body, Seq):
                inner = f"BEGIN {inner} END"
            return f"WHILE {pretty(cond)} DO{inv} {inner}{tail}"
        case _:
            raise TypeError(f"not a Stmt: {st!r}")
