"""Flow locks: per-attacker encoding into mutable labels, plus the direct check."""
from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping

from ..knowledge import TraceTable, k1
from ..syntax import (
    Assign, Close, Command, EventOff, EventOn, EventRef, If, Mutate, Open,
    Output, Seq, Static, While, BinOp, locks_of, lock_event,
)
from ..traces import indist
from .framework import (
    INSECURE, SECURE, Ctx, FrameworkInstance, Verdict, Witness, check_framework,
    closure_public,
)

DEFAULT_MAX_LOCKS = 3

# var -> actor -> locks that must be open for the var to reach the actor
FlowLocks = Mapping[str, Mapping[str, frozenset]]


@dataclass(frozen=True, order=True)
class Attacker:
    actor: str
    locks: frozenset

    def __str__(self) -> str:
        return f"{self.actor}:{{{','.join(sorted(self.locks))}}}"


_ATTACKER = re.compile(r"^\s*([A-Za-z_]\w*)\s*:\s*\{\s*([\w\s,]*)\}\s*$")


def parse_attacker(text: str) -> Attacker:
    m = _ATTACKER.match(text)
    if not m:
        raise ValueError(f"attacker must look like 'a:{{D,N}}', got {text!r}")
    locks = frozenset(x.strip() for x in m.group(2).split(",") if x.strip())
    return Attacker(m.group(1), locks)


def normalize_flowlocks(doc: Mapping) -> dict:
    return {x: {a: frozenset(ls) for a, ls in per.items()} for x, per in doc.items()}


def mentioned_locks(p: Command, specs: FlowLocks) -> list:
    out = set(locks_of(p))
    for per in specs.values():
        for ls in per.values():
            out |= set(ls)
    return sorted(out)


def actors(specs: FlowLocks) -> list:
    return sorted({a for per in specs.values() for a in per})


def default_attackers(p: Command, specs: FlowLocks, max_locks: int = DEFAULT_MAX_LOCKS) -> list:
    locks = mentioned_locks(p, specs)
    if len(locks) > max_locks:
        raise ValueError(f"{len(locks)} locks exceed the attacker enumeration cap of {max_locks}")
    subsets = [frozenset(c) for r in range(len(locks) + 1) for c in combinations(locks, r)]
    return [Attacker(a, s) for a in actors(specs) for s in subsets]


def base_label(specs: FlowLocks, x: str, atk: Attacker) -> Static:
    need = specs.get(x, {}).get(atk.actor)
    ok = need is not None and need <= atk.locks
    return Static(frozenset({atk.actor}) if ok else frozenset())


def _release_cond(outside: list):
    cond = EventRef(lock_event(outside[0]))
    for s in outside[1:]:
        cond = BinOp("||", cond, EventRef(lock_event(s)))
    return cond


def encode_paralocks(p: Command, specs: FlowLocks, atk: Attacker, variables: Iterable[str] = (),
                     observation: bool = False):
    """Transformed program and Γ'_A for one attacker.

    A release happens while some lock outside Σ_A is open; then every variable
    is public to the actor. Each assignment is followed by an output on the
    target's label. With ``observation`` the channel is the target's static
    label instead, which is what the direct check observes.
    """
    unknown = set(locks_of(p)) - set(mentioned_locks(p, specs))
    if unknown:
        raise ValueError(f"unknown locks {sorted(unknown)}")
    if atk.actor not in actors(specs):
        raise ValueError(f"unknown principal {atk.actor!r}")
    names = set(specs) | set(variables)
    outside = [s for s in mentioned_locks(p, specs) if s not in atk.locks]
    top = Static(frozenset({atk.actor}))
    base = {x: base_label(specs, x, atk) for x in sorted(names)}
    gamma: dict = {}
    for x, b in base.items():
        gamma[x] = b if (not outside or b == top) else Mutate(_release_cond(outside), top, b, "<=>")

    def tr(c: Command) -> Command:
        if isinstance(c, Open):
            return EventOn(lock_event(c.lock))
        if isinstance(c, Close):
            return EventOff(lock_event(c.lock))
        if isinstance(c, Assign):
            chan = base[c.target] if observation else gamma[c.target]
            return Seq(c, Output(chan, c.expr))
        if isinstance(c, Seq):
            return Seq(tr(c.first), tr(c.second))
        if isinstance(c, If):
            return If(c.cond, tr(c.then), tr(c.orelse))
        if isinstance(c, While):
            return While(c.cond, tr(c.body))
        return c

    return tr(p), (base if observation else gamma)


# ---------------------------------------------------------- checks

def _open_locks(ev, locks: Iterable[str]) -> frozenset:
    return frozenset(s for s in locks if lock_event(s) in ev.delta)


def pl_instance(atk: Attacker, locks: Iterable[str]) -> FrameworkInstance:
    """Framework row: constrained only while the open locks are within Σ_A."""
    locks = list(locks)

    def allow(ctx: Ctx, m: int, t, index) -> frozenset:
        i = index[0]
        if not _open_locks(t[i - 1], locks) <= atk.locks:
            return frozenset({m})
        return k1(ctx.table, t[: i - 1], ctx.L) & closure_public(ctx, m, t[i - 1].gamma)

    return FrameworkInstance("paralocks", lambda ctx, a, b: indist(a, b, ctx.L), allow,
                             per_label=False, knowledge=lambda ctx, t: k1(ctx.table, t, ctx.L))


def check_paralocks_table(table: TraceTable, atk: Attacker, locks: Iterable[str], table_id: int = 0) -> Verdict:
    return check_framework(pl_instance(atk, locks), table, table_id)


def pl_direct(table: TraceTable, atk: Attacker, locks: Iterable[str], table_id: int = 0) -> Verdict:
    """Knowledge ⌊m⌋_A ∩ 𝒦 stays constant across events emitted with Δ ⊆ Σ_A."""
    locks = list(locks)
    for m, t in enumerate(table.seqs):
        for L in table.attackers:
            ctx = Ctx(table, L, None)
            for i in range(1, len(t) + 1):
                if not _open_locks(t[i - 1], locks) <= atk.locks:
                    continue
                fixed = closure_public(ctx, m, t[i - 1].gamma)
                before = fixed & k1(table, t[: i - 1], L)
                after = fixed & k1(table, t[:i], L)
                if before != after:
                    off = min(before - after)
                    return Verdict(INSECURE, "paralocks", Witness(
                        m, (i,), L, None, off, dict(table.memories[m]), dict(table.memories[off]), table_id))
    return Verdict(SECURE, "paralocks")
