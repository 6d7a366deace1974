"""Forgetful attackers described by deterministic automata over observations."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Sequence

from ..knowledge import TraceTable
from ..traces import keys, project_L
from .framework import (
    INSECURE, SECURE, Ctx, FrameworkInstance, Verdict, Witness, check_framework,
    closure_public, definitional_knowledge,
)


@dataclass(frozen=True)
class Automaton:
    name: str
    initial: Any
    delta: Callable[[Any, tuple], Any]  # (state, observed event key) -> state

    def run(self, observed: Sequence[tuple]) -> Any:
        q = self.initial
        for k in observed:
            q = self.delta(q, k)
        return q

    def states(self, observed: Sequence[tuple]) -> set:
        """States reached after every prefix, the empty one included."""
        q = self.initial
        out = {q}
        for k in observed:
            q = self.delta(q, k)
            out.add(q)
        return out


def single_memory_automaton() -> Automaton:
    """Remembers only the most recent observation."""
    return Automaton("single", None, lambda q, k: k)


def perfect_recall_automaton() -> Automaton:
    return Automaton("perfect", (), lambda q, k: q + (k,))


def absorbing_automaton() -> Automaton:
    return Automaton("absorbing", 0, lambda q, k: 0)


def sim_fa(atk: Automaton):
    def sim(ctx: Ctx, a: Sequence, b: Sequence) -> bool:
        return atk.run(keys(project_L(a, ctx.L))) in atk.states(keys(project_L(b, ctx.L)))
    return sim


def fa_instance(atk: Automaton = None, name: str = "fa-single") -> FrameworkInstance:
    atk = atk or single_memory_automaton()
    sim = sim_fa(atk)
    inst_box = []

    def allow(ctx: Ctx, m: int, t, index) -> frozenset:
        i = index[0]
        prior = definitional_knowledge(inst_box[0], ctx, t[: i - 1])
        return prior & closure_public(ctx, m, t[i - 1].gamma)

    inst = FrameworkInstance(name, sim, allow, per_label=False)
    inst_box.append(inst)
    return inst


def check_forgetful(table: TraceTable, atk: Automaton = None) -> Verdict:
    return check_framework(fa_instance(atk), table)


def fa_direct(table: TraceTable, atk: Automaton = None, name: str = "fa-single") -> Verdict:
    """k_FA(t·t') ⊇ k_FA(t) ∩ ⌊m⌋_{L,γ'} with k_FA from reachable automaton states."""
    atk = atk or single_memory_automaton()
    for L in table.attackers:
        reach = [atk.states(table.proj(m, L)) for m in range(len(table.seqs))]

        def k_fa(t):
            q = atk.run(keys(project_L(t, L)))
            return frozenset(m for m, qs in enumerate(reach) if q in qs)

        ctx = Ctx(table, L, None)
        for m, t in enumerate(table.seqs):
            for i in range(1, len(t) + 1):
                need = k_fa(t[: i - 1]) & closure_public(ctx, m, t[i - 1].gamma)
                have = k_fa(t[:i])
                if not need <= have:
                    off = min(need - have)
                    return Verdict(INSECURE, name, Witness(m, (i,), L, None, off,
                                                           dict(table.memories[m]), dict(table.memories[off])))
    return Verdict(SECURE, name)
