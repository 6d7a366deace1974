"""Gradual release and tight gradual release: encoders and both checker forms."""
from __future__ import annotations

from typing import Mapping

from ..knowledge import TraceTable, k1
from ..labels import Lattice, LevelSet
from ..syntax import (
    Assign, Command, Declassify, EventOff, EventOn, EventRef, If, Label, Mutate,
    Output, Seq, Static, Var, While, seq,
)
from ..traces import indist
from .framework import (
    INSECURE, SECURE, Ctx, FrameworkInstance, Verdict, Witness, check_framework,
    closure_public,
)

RELEASE_EVENT = "r"


def release_event(x: str) -> str:
    return "r_" + x


class EncodingError(ValueError):
    pass


def _map_assign(c: Command, f) -> Command:
    """Rebuild ``c`` with every assignment replaced by f(assign)."""
    if isinstance(c, Assign):
        return f(c)
    if isinstance(c, Seq):
        return Seq(_map_assign(c.first, f), _map_assign(c.second, f))
    if isinstance(c, If):
        return If(c.cond, _map_assign(c.then, f), _map_assign(c.orelse, f))
    if isinstance(c, While):
        return While(c.cond, _map_assign(c.body, f))
    return c


def encode_gradual_release(p: Command, gamma: Mapping[str, Label], lattice: Lattice,
                           event: str = RELEASE_EVENT):
    """x := declassify(e) becomes EventOn(r); x := e; output(Γ(x), e); EventOff(r)."""
    def f(a: Assign) -> Command:
        if not isinstance(a.expr, Declassify):
            return a
        e = a.expr.expr
        return seq(EventOn(event), Assign(a.target, e), Output(gamma[a.target], e), EventOff(event))

    top = Static(lattice.universe)
    new_gamma = {x: Mutate(EventRef(event), top, b, "<=>") for x, b in gamma.items()}
    return _map_assign(p, f), new_gamma


def encode_tight_gr(p: Command, gamma: Mapping[str, Label], lattice: Lattice):
    """x' := declassify(x) becomes EventOn(r_x); x' := x; output(Γ(x'), x)."""
    declassified = set()

    def f(a: Assign) -> Command:
        if not isinstance(a.expr, Declassify):
            return a
        src = a.expr.expr
        if not isinstance(src, Var):
            raise EncodingError("tight gradual release only declassifies single variables")
        declassified.add(src.name)
        return seq(EventOn(release_event(src.name)), Assign(a.target, src), Output(gamma[a.target], src))

    out = _map_assign(p, f)
    top = Static(lattice.universe)
    new_gamma = dict(gamma)
    for x in declassified:
        new_gamma[x] = Mutate(EventRef(release_event(x)), top, gamma[x], "<-")
    return out, new_gamma


# ------------------------------------------------------------ framework rows

def _sim(ctx, a, b):
    return indist(a, b, ctx.L)


def gr_instance() -> FrameworkInstance:
    def allow(ctx: Ctx, m: int, t, index) -> frozenset:
        i = index[0]
        return closure_public(ctx, m, t[i - 1].gamma) & k1(ctx.table, t[: i - 1], ctx.L)

    return FrameworkInstance("gr", _sim, allow, per_label=False,
                             knowledge=lambda ctx, t: k1(ctx.table, t, ctx.L))


def tgr_instance() -> FrameworkInstance:
    def allow(ctx: Ctx, m: int, t, index) -> frozenset:
        return closure_public(ctx, m, t[index[0] - 1].gamma)

    return FrameworkInstance("tgr", _sim, allow, per_label=False,
                             knowledge=lambda ctx, t: k1(ctx.table, t, ctx.L))


def check_gradual_release(table: TraceTable) -> Verdict:
    return check_framework(gr_instance(), table)


def check_tight_gr(table: TraceTable) -> Verdict:
    return check_framework(tgr_instance(), table)


# ---------------------------------------------------------- direct forms

def _k(table: TraceTable, m: int, t, L: LevelSet, base: Mapping[str, LevelSet]) -> frozenset:
    """Members agreeing with m on Γ-public variables whose run extends t."""
    pub = {x for x, ls in base.items() if L <= ls}
    return table.closure(m, pub) & k1(table, t, L)


def gr_direct(table: TraceTable, base: Mapping[str, LevelSet], event: str = RELEASE_EVENT) -> Verdict:
    """Knowledge is constant across every event emitted while ``event`` is off."""
    for m, t in enumerate(table.seqs):
        for L in table.attackers:
            for i in range(1, len(t) + 1):
                if event in t[i - 1].delta:
                    continue
                before, after = _k(table, m, t[: i - 1], L, base), _k(table, m, t[:i], L, base)
                if before != after:
                    off = min(before - after)
                    return Verdict(INSECURE, "gr", Witness(m, (i,), L, None, off,
                                                           dict(table.memories[m]), dict(table.memories[off])))
    return Verdict(SECURE, "gr")


def tgr_direct(table: TraceTable, base: Mapping[str, LevelSet]) -> Verdict:
    """⌊m⌋_{L,Γ} ∩ ⌊m⌋_{X_i} ⊆ k at every event, X_i the variables released so far."""
    for m, t in enumerate(table.seqs):
        for L in table.attackers:
            pub = {x for x, ls in base.items() if L <= ls}
            for i in range(1, len(t) + 1):
                X = {x for x in base if release_event(x) in t[i - 1].delta}
                lhs = table.closure(m, pub | X)
                rhs = _k(table, m, t[:i], L, base)
                if not lhs <= rhs:
                    off = min(lhs - rhs)
                    return Verdict(INSECURE, "tgr", Witness(m, (i,), L, None, off,
                                                            dict(table.memories[m]), dict(table.memories[off])))
    return Verdict(SECURE, "tgr")
