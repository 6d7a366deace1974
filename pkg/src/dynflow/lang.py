"""Small-step interpreter for the While-language with events and labeled outputs."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Mapping, Optional, Union

from .syntax import (
    SKIP, Assign, Close, Command, Declassify, EventOff, EventOn, EventRef,
    Expr, If, Label, Lit, Not, Open, Output, Program, Seq, Skip, Var, While,
    events_of, lock_event, parse_program, show_program,
)

log = logging.getLogger(__name__)

INT_MIN, INT_MAX = -(2 ** 63), 2 ** 63 - 1
DEFAULT_FUEL = 100_000

Value = Union[int, bool]
Memory = Mapping[str, Value]

__all__ = [
    "parse_program", "show_program", "eval_expr", "eval_cond", "step", "run",
    "ExecTrace", "RawOutput", "Nontermination", "StuckError", "DEFAULT_FUEL",
]


class StuckError(Exception):
    """The configuration cannot step (unbound name, division by zero, overflow, ...)."""


class UnboundName(StuckError):
    pass


class DivisionByZero(StuckError):
    pass


class Overflow(StuckError):
    pass


class TypeMismatch(StuckError):
    pass


def _int(v: Value, op: str) -> int:
    if isinstance(v, bool):
        raise TypeMismatch(f"operator {op} applied to a Boolean")
    return v


def _checked(v: int) -> int:
    if not INT_MIN <= v <= INT_MAX:
        raise Overflow(f"integer overflow: {v}")
    return v


def truthy(v: Value) -> bool:
    return v if isinstance(v, bool) else v != 0


def eval_expr(m: Memory, e: Expr) -> Value:
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, Var):
        try:
            v = m[e.name]
        except KeyError:
            raise UnboundName(f"unbound variable {e.name!r}") from None
        if isinstance(v, bool):
            raise TypeMismatch(f"{e.name!r} holds a Boolean")
        return v
    if isinstance(e, EventRef):
        return bool(m.get(e.name, False))
    if isinstance(e, Not):
        return not eval_cond(m, e.operand)
    if isinstance(e, Declassify):
        raise StuckError("declassify must be encoded before running")
    op = e.op
    if op == "&&":
        return eval_cond(m, e.left) and eval_cond(m, e.right)
    if op == "||":
        return eval_cond(m, e.left) or eval_cond(m, e.right)
    a, b = eval_expr(m, e.left), eval_expr(m, e.right)
    if op == "==":
        if isinstance(a, bool) != isinstance(b, bool):
            raise TypeMismatch("== on values of different types")
        return a == b
    a, b = _int(a, op), _int(b, op)
    if op == "+":
        return _checked(a + b)
    if op == "-":
        return _checked(a - b)
    if op == "*":
        return _checked(a * b)
    if op == "/":
        if b == 0:
            raise DivisionByZero("division by zero")
        q = abs(a) // abs(b)
        return _checked(q if (a >= 0) == (b >= 0) else -q)
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    if op == ">=":
        return a >= b
    raise ValueError(f"unknown operator {op!r}")


def eval_cond(m: Memory, e: Expr) -> bool:
    return truthy(eval_expr(m, e))


@dataclass(frozen=True)
class RawOutput:
    label: Label
    value: int
    step: int  # index of the emitting configuration


def step(c: Command, m: Memory):
    """One small step: returns (command', memory', raw output or None)."""
    if isinstance(c, Skip):
        raise ValueError("skip is terminal")
    if isinstance(c, Seq):
        if isinstance(c.first, Skip):
            return c.second, m, None
        c1, m1, out = step(c.first, m)
        return Seq(c1, c.second), m1, out
    if isinstance(c, Assign):
        v = eval_expr(m, c.expr)
        m1 = dict(m)
        m1[c.target] = v
        return SKIP, m1, None
    if isinstance(c, If):
        return (c.then if eval_cond(m, c.cond) else c.orelse), m, None
    if isinstance(c, While):
        return If(c.cond, Seq(c.body, c), SKIP), m, None
    if isinstance(c, Output):
        return SKIP, m, (c.label, eval_expr(m, c.expr))
    if isinstance(c, (EventOn, Open)):
        m1 = dict(m)
        m1[c.name if isinstance(c, EventOn) else lock_event(c.lock)] = True
        return SKIP, m1, None
    if isinstance(c, (EventOff, Close)):
        m1 = dict(m)
        m1[c.name if isinstance(c, EventOff) else lock_event(c.lock)] = False
        return SKIP, m1, None
    raise TypeError(f"not a command: {c!r}")


@dataclass(frozen=True)
class ExecTrace:
    """Configurations 0..|τ| and the raw outputs emitted along the way."""
    configs: tuple
    outputs: tuple

    def __len__(self) -> int:
        return len(self.configs) - 1

    @property
    def memories(self) -> list:
        return [mem for _, mem in self.configs]

    def prefix(self, i: int) -> "ExecTrace":
        """τ^[:i], configurations 0..i inclusive."""
        return ExecTrace(self.configs[: i + 1], tuple(o for o in self.outputs if o.step < i))

    def postfix(self, i: int) -> tuple:
        """τ^[i:], configurations i..|τ|."""
        return self.configs[i:]


@dataclass(frozen=True)
class Nontermination:
    steps: int


def initial_memory(p: Program, m: Memory) -> dict:
    mem = {s: False for s in events_of(p)}
    mem.update(m)
    return mem


def run(p: Program, m: Memory, fuel: int = DEFAULT_FUEL) -> Union[ExecTrace, Nontermination]:
    """Run to completion within ``fuel`` steps. StuckError propagates."""
    if fuel <= 0:
        raise ValueError("fuel must be positive")
    c, mem = p, initial_memory(p, m)
    configs = [(c, mem)]
    outputs = []
    for k in range(fuel):
        if isinstance(c, Skip):
            break
        c, mem, out = step(c, mem)
        if out is not None:
            outputs.append(RawOutput(out[0], out[1], k))
        configs.append((c, mem))
    else:
        if not isinstance(c, Skip):
            return Nontermination(fuel)
    return ExecTrace(tuple(configs), tuple(outputs))


def try_run(p: Program, m: Memory, fuel: int = DEFAULT_FUEL) -> Optional[ExecTrace]:
    """Like run, but stuck and nonterminating runs come back as None (and are logged)."""
    try:
        r = run(p, m, fuel)
    except StuckError as exc:
        log.info("excluding stuck memory %s: %s", dict(m), exc)
        return None
    if isinstance(r, Nontermination):
        log.info("excluding nonterminating memory %s", dict(m))
        return None
    return r
