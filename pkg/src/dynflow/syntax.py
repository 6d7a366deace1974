"""Abstract syntax, concrete parser and pretty-printer.

The grammar is documented in docs/grammar.md. Programs, expressions and
security labels share one tokenizer so that labels can appear inside
``output(b, e)`` commands and conditions can appear inside labels.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Union


# ---------------------------------------------------------------- expressions

@dataclass(frozen=True)
class Lit:
    value: int


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class EventRef:
    name: str


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Not:
    operand: "Expr"


@dataclass(frozen=True)
class Declassify:
    """Source-level marker; only legal as the whole right side of an assignment."""
    expr: "Expr"


Expr = Union[Lit, Var, EventRef, BinOp, Not, Declassify]

ARITH_OPS = ("+", "-", "*", "/")
CMP_OPS = ("==", "<", "<=", ">", ">=")
BOOL_OPS = ("&&", "||")


# ------------------------------------------------------------------- labels

@dataclass(frozen=True)
class Static:
    levels: frozenset


@dataclass(frozen=True)
class Mutate:
    cond: Expr
    left: "Label"
    right: "Label"
    direction: str  # one of "->", "<-", "<=>"


Label = Union[Static, Mutate]
DIRECTIONS = ("->", "<-", "<=>")


# ----------------------------------------------------------------- commands

@dataclass(frozen=True)
class Skip:
    pass


@dataclass(frozen=True)
class Seq:
    first: "Command"
    second: "Command"


@dataclass(frozen=True)
class Assign:
    target: str
    expr: Expr


@dataclass(frozen=True)
class If:
    cond: Expr
    then: "Command"
    orelse: "Command"


@dataclass(frozen=True)
class While:
    cond: Expr
    body: "Command"


@dataclass(frozen=True)
class Output:
    label: Label
    expr: Expr


@dataclass(frozen=True)
class EventOn:
    name: str


@dataclass(frozen=True)
class EventOff:
    name: str


@dataclass(frozen=True)
class Open:
    lock: str


@dataclass(frozen=True)
class Close:
    lock: str


Command = Union[Skip, Seq, Assign, If, While, Output, EventOn, EventOff, Open, Close]
Program = Command

SKIP = Skip()


def lock_event(lock: str) -> str:
    """Name of the security event that stands for lock ``lock``."""
    return "s_" + lock


def seq(*cmds: Command) -> Command:
    """Right-nested sequence; skips are kept, an empty call gives skip."""
    cmds = [c for c in cmds]
    if not cmds:
        return SKIP
    out = cmds[-1]
    for c in reversed(cmds[:-1]):
        out = Seq(c, out)
    return out


def flatten(c: Command) -> list:
    if isinstance(c, Seq):
        return flatten(c.first) + flatten(c.second)
    return [c]


def normalize(c: Command) -> Command:
    """Re-associate every sequence to the right-nested shape the parser builds."""
    if isinstance(c, Seq):
        return seq(*[normalize(x) for x in flatten(c)])
    if isinstance(c, If):
        return If(c.cond, normalize(c.then), normalize(c.orelse))
    if isinstance(c, While):
        return While(c.cond, normalize(c.body))
    return c


# --------------------------------------------------------------- traversal

def expr_names(e: Expr) -> set:
    if isinstance(e, (Var, EventRef)):
        return {e.name}
    if isinstance(e, BinOp):
        return expr_names(e.left) | expr_names(e.right)
    if isinstance(e, (Not, Declassify)):
        return expr_names(e.operand if isinstance(e, Not) else e.expr)
    return set()


def label_names(b: Label) -> set:
    if isinstance(b, Static):
        return set()
    return expr_names(b.cond) | label_names(b.left) | label_names(b.right)


def commands(c: Command) -> Iterable[Command]:
    yield c
    if isinstance(c, Seq):
        yield from commands(c.first)
        yield from commands(c.second)
    elif isinstance(c, If):
        yield from commands(c.then)
        yield from commands(c.orelse)
    elif isinstance(c, While):
        yield from commands(c.body)


def events_of(c: Command) -> set:
    out = set()
    for node in commands(c):
        if isinstance(node, (EventOn, EventOff)):
            out.add(node.name)
        elif isinstance(node, (Open, Close)):
            out.add(lock_event(node.lock))
    return out


def locks_of(c: Command) -> set:
    return {n.lock for n in commands(c) if isinstance(n, (Open, Close))}


def variables_of(c: Command) -> set:
    out = set()
    for node in commands(c):
        if isinstance(node, Assign):
            out.add(node.target)
            out |= {n for n in expr_names(node.expr)}
        elif isinstance(node, (If, While)):
            out |= expr_names(node.cond)
        elif isinstance(node, Output):
            out |= expr_names(node.expr) | label_names(node.label)
    return out - events_of(c)


# ------------------------------------------------------------------ errors

class ParseError(Exception):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {msg}" if line else msg)
        self.line, self.col = line, col


class WellFormednessError(ParseError):
    pass


# --------------------------------------------------------------- tokenizer

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+|//[^\n]*)
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><=>|:=|==|<=|>=|<-|->|&&|\|\||[-+*/<>!(){};,?])
""", re.VERBOSE)

KEYWORDS = {"skip", "if", "else", "while", "output", "EventOn", "EventOff",
            "open", "close", "declassify"}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list:
    toks, pos, line, lstart = [], 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - lstart + 1)
        kind = m.lastgroup
        if kind != "ws":
            toks.append(Token(kind, m.group(), line, m.start() - lstart + 1))
        nl = m.group().count("\n")
        if nl:
            line += nl
            lstart = m.start() + m.group().rfind("\n") + 1
        pos = m.end()
    toks.append(Token("eof", "", line, pos - lstart + 1))
    return toks


# ------------------------------------------------------------------ parser

Resolver = Callable[[str], frozenset]


def _singleton(name: str) -> frozenset:
    return frozenset({name})


class _Parser:
    def __init__(self, text: str, events: Iterable[str] = (), resolve: Optional[Resolver] = None):
        self.toks = tokenize(text)
        self.i = 0
        self.events = set(events)
        self.resolve = resolve or _singleton

    # token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind != "eof"

    def error(self, msg: str):
        raise ParseError(msg, self.tok.line, self.tok.col)

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        t = self.tok
        self.i += 1
        return t

    def ident(self) -> str:
        if self.tok.kind != "ident" or self.tok.text in KEYWORDS:
            self.error(f"expected identifier, found {self.tok.text or 'end of input'!r}")
        name = self.tok.text
        self.i += 1
        return name

    # commands
    def program(self) -> Command:
        c = self.stmts(top=True)
        if self.tok.kind != "eof":
            self.error(f"unexpected {self.tok.text!r}")
        return c

    def stmts(self, top: bool = False) -> Command:
        out = []
        while not (self.tok.kind == "eof" or self.at("}")):
            if self.at(";"):
                self.i += 1
                continue
            compound = self.at("if") or self.at("while")
            out.append(self.stmt())
            if compound or self.tok.kind == "eof" or self.at("}"):
                continue
            self.expect(";")
        return seq(*out)

    def block(self) -> Command:
        self.expect("{")
        c = self.stmts()
        self.expect("}")
        return c

    def stmt(self) -> Command:
        t = self.tok
        if self.at("skip"):
            self.i += 1
            return SKIP
        if self.at("if"):
            self.i += 1
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            then = self.block()
            orelse = SKIP
            if self.at("else"):
                self.i += 1
                orelse = self.stmt() if self.at("if") else self.block()
            return If(cond, then, orelse)
        if self.at("while"):
            self.i += 1
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            return While(cond, self.block())
        if self.at("output"):
            self.i += 1
            self.expect("(")
            b = self.label()
            self.expect(",")
            e = self.expr()
            self.expect(")")
            return Output(b, e)
        for kw, ctor in (("EventOn", EventOn), ("EventOff", EventOff), ("open", Open), ("close", Close)):
            if self.at(kw):
                self.i += 1
                self.expect("(")
                name = self.ident()
                self.expect(")")
                return ctor(name)
        if t.kind == "ident" and t.text not in KEYWORDS:
            name = self.ident()
            self.expect(":=")
            if self.at("declassify"):
                self.i += 1
                self.expect("(")
                e = self.expr()
                self.expect(")")
                return Assign(name, Declassify(e))
            return Assign(name, self.expr())
        self.error(f"unexpected {t.text or 'end of input'!r}")

    # expressions, lowest precedence first
    def expr(self) -> Expr:
        return self.disj()

    def disj(self) -> Expr:
        e = self.conj()
        while self.at("||"):
            self.i += 1
            e = BinOp("||", e, self.conj())
        return e

    def conj(self) -> Expr:
        e = self.cmp()
        while self.at("&&"):
            self.i += 1
            e = BinOp("&&", e, self.cmp())
        return e

    def cmp(self) -> Expr:
        e = self.add()
        if self.tok.text in CMP_OPS and self.tok.kind == "op":
            op = self.tok.text
            self.i += 1
            e = BinOp(op, e, self.add())
            if self.tok.text in CMP_OPS and self.tok.kind == "op":
                self.error("comparison operators do not chain")
        return e

    def add(self) -> Expr:
        e = self.mul()
        while self.at("+") or self.at("-"):
            op = self.tok.text
            self.i += 1
            e = BinOp(op, e, self.mul())
        return e

    def mul(self) -> Expr:
        e = self.unary()
        while self.at("*") or self.at("/"):
            op = self.tok.text
            self.i += 1
            e = BinOp(op, e, self.unary())
        return e

    def unary(self) -> Expr:
        if self.at("!"):
            self.i += 1
            return Not(self.unary())
        if self.at("-") and self.toks[self.i + 1].kind == "num":
            self.i += 1
            return Lit(-int(self.num()))
        return self.atom()

    def num(self) -> str:
        t = self.tok
        self.i += 1
        return t.text

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            return Lit(int(self.num()))
        if self.at("("):
            self.i += 1
            e = self.expr()
            self.expect(")")
            return e
        if self.at("declassify"):
            self.error("declassify is only allowed as the whole right side of an assignment")
        name = self.ident()
        return EventRef(name) if name in self.events else Var(name)

    # labels
    def label(self) -> Label:
        save = self.i
        if not self.at("{"):
            try:
                cond = self.expr()
            except ParseError:
                cond = None
            if cond is not None and self.at("?"):
                self.i += 1
                left = self.label_atom()
                if self.tok.text not in DIRECTIONS:
                    self.error("expected '->', '<-' or '<=>'")
                d = self.tok.text
                self.i += 1
                return Mutate(cond, left, self.label(), d)
            self.i = save
        return self.label_atom()

    def label_atom(self) -> Label:
        if self.at("{"):
            self.i += 1
            names = []
            while not self.at("}"):
                names.append(self.ident())
                if not self.at("}"):
                    self.expect(",")
            self.expect("}")
            return Static(frozenset(names))
        if self.at("("):
            self.i += 1
            b = self.label()
            self.expect(")")
            return b
        t = self.tok
        name = self.ident()
        try:
            return Static(frozenset(self.resolve(name)))
        except KeyError:
            raise ParseError(f"unknown level {name!r}", t.line, t.col) from None


def _prescan_events(text: str) -> set:
    toks = tokenize(text)
    out = set()
    for a, b, c in zip(toks, toks[1:], toks[2:]):
        if b.text == "(" and c.kind == "ident":
            if a.text in ("EventOn", "EventOff"):
                out.add(c.text)
            elif a.text in ("open", "close"):
                out.add(lock_event(c.text))
    return out


def parse_program(text: str, resolve: Optional[Resolver] = None, events: Iterable[str] = ()) -> Program:
    """Parse program text. ``resolve`` maps bare level names to level sets."""
    evs = _prescan_events(text) | set(events)
    p = _Parser(text, evs, resolve)
    prog = p.program()
    check_program(prog)
    return prog


def parse_expr(text: str, events: Iterable[str] = ()) -> Expr:
    p = _Parser(text, events)
    e = p.expr()
    if p.tok.kind != "eof":
        p.error(f"unexpected {p.tok.text!r}")
    return e


def parse_label(text: str, resolve: Optional[Resolver] = None, events: Iterable[str] = ()) -> Label:
    p = _Parser(text, events, resolve)
    b = p.label()
    if p.tok.kind != "eof":
        p.error(f"unexpected {p.tok.text!r}")
    check_label(b)
    return b


# ------------------------------------------------------ well-formedness pass

def expr_type(e: Expr) -> str:
    """'int' or 'bool'; raises WellFormednessError on a type clash."""
    if isinstance(e, Lit) or isinstance(e, Var):
        return "int"
    if isinstance(e, EventRef):
        return "bool"
    if isinstance(e, Declassify):
        return expr_type(e.expr)
    if isinstance(e, Not):
        check_cond(e.operand)
        return "bool"
    lt, rt = expr_type(e.left), expr_type(e.right)
    if e.op in ARITH_OPS or e.op in ("<", "<=", ">", ">="):
        if lt != "int" or rt != "int":
            raise WellFormednessError(f"operator {e.op} needs integer operands")
        return "int" if e.op in ARITH_OPS else "bool"
    if e.op == "==":
        if lt != rt:
            raise WellFormednessError("== compares values of different types")
        return "bool"
    check_cond(e.left)
    check_cond(e.right)
    return "bool"


def check_cond(e: Expr) -> None:
    """Conditions are Boolean; a bare variable or literal reads as ``!= 0``."""
    if isinstance(e, (Var, Lit)):
        return
    if expr_type(e) != "bool":
        raise WellFormednessError("arithmetic result used as a condition")


def check_label(b: Label) -> None:
    if isinstance(b, Mutate):
        check_cond(b.cond)
        check_label(b.left)
        check_label(b.right)


def check_program(c: Command) -> None:
    evs = events_of(c)
    for node in commands(c):
        if isinstance(node, Assign):
            if node.target in evs:
                raise WellFormednessError(f"{node.target!r} is a security event and cannot be assigned")
            e = node.expr.expr if isinstance(node.expr, Declassify) else node.expr
            if _has_declassify(e):
                raise WellFormednessError("nested declassify")
            if expr_type(e) != "int":
                raise WellFormednessError(f"assignment to {node.target!r} of a Boolean value")
        elif isinstance(node, (If, While)):
            check_cond(node.cond)
        elif isinstance(node, Output):
            check_label(node.label)
            if expr_type(node.expr) != "int":
                raise WellFormednessError("output of a Boolean value")
    clash = {n for n in variables_of(c) if n in evs}
    if clash:
        raise WellFormednessError(f"names used both as event and variable: {sorted(clash)}")


def _has_declassify(e: Expr) -> bool:
    if isinstance(e, Declassify):
        return True
    if isinstance(e, BinOp):
        return _has_declassify(e.left) or _has_declassify(e.right)
    if isinstance(e, Not):
        return _has_declassify(e.operand)
    return False


# --------------------------------------------------------------- printer

_PREC = {"||": 1, "&&": 2, "==": 3, "<": 3, "<=": 3, ">": 3, ">=": 3,
         "+": 4, "-": 4, "*": 5, "/": 5}


def show_expr(e: Expr, prec: int = 0) -> str:
    if isinstance(e, Lit):
        s = str(e.value)
        return f"({s})" if e.value < 0 and prec > 5 else s
    if isinstance(e, (Var, EventRef)):
        return e.name
    if isinstance(e, Not):
        return "!" + show_expr(e.operand, 6)
    if isinstance(e, Declassify):
        return f"declassify({show_expr(e.expr)})"
    p = _PREC[e.op]
    # left-assoc chains keep the left operand bare; comparisons never chain
    lp = p + 1 if p == 3 else p
    s = f"{show_expr(e.left, lp)} {e.op} {show_expr(e.right, p + 1)}"
    return f"({s})" if p < prec else s


def show_levels(levels: frozenset, names: Optional[Callable[[frozenset], Optional[str]]] = None) -> str:
    if names is not None:
        n = names(levels)
        if n is not None:
            return n
    return "{" + ",".join(sorted(levels)) + "}"


def show_label(b: Label, names=None) -> str:
    if isinstance(b, Static):
        return show_levels(b.levels, names)
    left = show_label(b.left, names)
    if isinstance(b.left, Mutate):
        left = f"({left})"
    return f"{show_expr(b.cond)} ? {left} {b.direction} {show_label(b.right, names)}"


def show_program(c: Command, indent: str = "  ", names=None) -> str:
    lines: list = []
    _emit(c, 0, lines, indent, names)
    return "\n".join(lines) + ("\n" if lines else "")


def _emit(c: Command, depth: int, lines: list, indent: str, names) -> None:
    pad = indent * depth
    for s in flatten(c):
        if isinstance(s, If):
            lines.append(f"{pad}if ({show_expr(s.cond)}) {{")
            _emit_block(s.then, depth + 1, lines, indent, names)
            if s.orelse != SKIP:
                lines.append(f"{pad}}} else {{")
                _emit_block(s.orelse, depth + 1, lines, indent, names)
            lines.append(f"{pad}}}")
        elif isinstance(s, While):
            lines.append(f"{pad}while ({show_expr(s.cond)}) {{")
            _emit_block(s.body, depth + 1, lines, indent, names)
            lines.append(f"{pad}}}")
        else:
            lines.append(pad + _simple(s, names) + ";")


def _emit_block(c: Command, depth: int, lines: list, indent: str, names) -> None:
    if c != SKIP:
        _emit(c, depth, lines, indent, names)


def _simple(s: Command, names) -> str:
    if isinstance(s, Skip):
        return "skip"
    if isinstance(s, Assign):
        return f"{s.target} := {show_expr(s.expr)}"
    if isinstance(s, Output):
        return f"output({show_label(s.label, names)}, {show_expr(s.expr)})"
    if isinstance(s, (EventOn, EventOff)):
        return f"{type(s).__name__}({s.name})"
    if isinstance(s, Open):
        return f"open({s.lock})"
    if isinstance(s, Close):
        return f"close({s.lock})"
    raise TypeError(f"not a simple command: {s!r}")
