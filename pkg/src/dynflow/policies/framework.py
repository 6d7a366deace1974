"""Generic knowledge-vs-allowance checker that every policy instantiates."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

from ..knowledge import TraceTable, k_gen
from ..labels import Lattice, LevelSet, all_levelsets, denning_levelset
from ..traces import LabelGroup, OutEvent, public_vars

SECURE, INSECURE, NOT_APPLICABLE = "Secure", "Insecure", "NotApplicable"


class BudgetExceeded(Exception):
    """An enumeration hit its configured cap; no verdict is given."""


@dataclass(frozen=True)
class Witness:
    memory: int                 # row in the trace table
    index: tuple                # (i,) for prefix mode, (i, j) for subtrace mode, 1-based
    attacker: LevelSet
    label: Optional[LabelGroup]
    offending: int              # member of allowance but not of knowledge
    init: Optional[dict] = None
    offending_init: Optional[dict] = None
    table: int = 0              # which per-attacker table, for lock-based tests

    def describe(self) -> str:
        lab = f", label {self.label}" if self.label is not None else ""
        at = "{" + ",".join(sorted(self.attacker)) + "}"
        idx = "event " + "..".join(str(i) for i in self.index)
        return (f"from {self.init}, {idx}, attacker {at}{lab}: "
                f"allowed {self.offending_init} is ruled out")


@dataclass(frozen=True)
class Verdict:
    kind: str
    policy: str = ""
    witness: Optional[Witness] = None
    note: str = ""

    @property
    def secure(self) -> Optional[bool]:
        return None if self.kind == NOT_APPLICABLE else self.kind == SECURE

    def __str__(self) -> str:
        return self.kind


@dataclass(frozen=True)
class Ctx:
    table: TraceTable
    L: LevelSet
    b: Optional[LabelGroup]


@dataclass(frozen=True)
class FrameworkInstance:
    """sim, consist and allow as in the generalized framework.

    ``knowledge`` is an optional fast path that must equal the definitional
    union of 𝒦 over consistent prefixes; tests compare the two.
    """
    name: str
    sim: Callable[[Ctx, Sequence, Sequence], bool]
    allow: Callable[[Ctx, int, Sequence, tuple], frozenset]
    consist: Optional[Callable[[Ctx, Sequence, Sequence], bool]] = None
    mode: str = "prefix"
    per_label: bool = True
    knowledge: Optional[Callable[[Ctx, Sequence], frozenset]] = None


def definitional_knowledge(inst: FrameworkInstance, ctx: Ctx, t: Sequence) -> frozenset:
    sim = lambda a, b: inst.sim(ctx, a, b)  # noqa: E731
    if inst.consist is None:
        return k_gen(ctx.table, t, sim)
    out = set()
    for t2 in ctx.table.seqs:
        for j in range(len(t2) + 1):
            if inst.consist(ctx, t2[:j], t):
                out |= k_gen(ctx.table, t2[:j], sim)
    return frozenset(out)


def knowledge_of(inst: FrameworkInstance, ctx: Ctx, t: Sequence) -> frozenset:
    if inst.knowledge is not None:
        return inst.knowledge(ctx, t)
    return definitional_knowledge(inst, ctx, t)


def windows(t: Sequence, mode: str):
    """(index, window) pairs: prefixes t[:i], or contiguous t[i..j] (1-based, inclusive)."""
    n = len(t)
    if mode == "prefix":
        for i in range(1, n + 1):
            yield (i,), t[:i]
    elif mode == "subtrace":
        for i in range(1, n + 1):
            for j in range(i, n + 1):
                yield (i, j), t[i - 1:j]
    else:
        raise ValueError(f"unknown quantifier mode {mode!r}")


def _window(t: Sequence, index: tuple) -> Sequence:
    return t[: index[0]] if len(index) == 1 else t[index[0] - 1: index[1]]


def check_framework(inst: FrameworkInstance, table: TraceTable, table_id: int = 0) -> Verdict:
    labels: Iterable = table.groups if inst.per_label else (None,)
    for m, t in enumerate(table.seqs):
        for L in table.attackers:
            for b in labels:
                ctx = Ctx(table, L, b)
                for index, w in windows(t, inst.mode):
                    allowed = inst.allow(ctx, m, t, index)
                    known = knowledge_of(inst, ctx, w)
                    missing = allowed - known
                    if missing:
                        off = min(missing)
                        return Verdict(INSECURE, inst.name, Witness(
                            m, index, L, b, off, dict(table.memories[m]),
                            dict(table.memories[off]), table_id))
    return Verdict(SECURE, inst.name)


def replay_witness(inst: FrameworkInstance, table: TraceTable, w: Witness) -> bool:
    """True iff the witness still shows allowance ⊄ knowledge."""
    t = table.seqs[w.memory]
    ctx = Ctx(table, w.attacker, w.label)
    allowed = inst.allow(ctx, w.memory, t, w.index)
    known = definitional_knowledge(inst, ctx, _window(t, w.index))
    return w.offending in allowed and w.offending not in known


def combine(verdicts: Sequence[Verdict], policy: str) -> Verdict:
    """Secure iff every part is secure (used for per-attacker tables)."""
    for v in verdicts:
        if v.kind == INSECURE:
            return v
    if verdicts and all(v.kind == NOT_APPLICABLE for v in verdicts):
        return Verdict(NOT_APPLICABLE, policy)
    return Verdict(SECURE, policy)


# ---------------------------------------------------------- enumerations

def default_attackers(lattice: Optional[Lattice], seqs: Iterable[Sequence[OutEvent]],
                      powerset: bool = False) -> tuple:
    """Denning images of the declared levels plus every observed channel level."""
    found = set()
    if lattice is not None:
        found |= {denning_levelset(lattice, lv) for lv in lattice.levels}
        if powerset:
            if len(lattice.levels) > 4:
                raise ValueError("powerset attackers are limited to 4 levels")
            found |= set(all_levelsets(lattice.levels))
    for t in seqs:
        found |= {e.level for e in t}
    return tuple(sorted(found, key=lambda s: (len(s), sorted(s))))


def groups_from_gamma(gamma: dict) -> tuple:
    """Variables grouped by structurally equal labels."""
    by: dict = {}
    for x, b in gamma.items():
        by.setdefault(b, set()).add(x)
    return tuple(sorted((LabelGroup(frozenset(v), b) for b, v in by.items()), key=lambda g: g.rep))


def groups_from_traces(variables: Iterable[str], seqs: Iterable[Sequence[OutEvent]]) -> tuple:
    """Without source labels, variables with identical γ histories share a policy."""
    seqs = list(seqs)
    by: dict = {}
    for x in sorted(variables):
        hist = tuple(tuple(e.gamma.get(x) for e in t) for t in seqs)
        by.setdefault(hist, set()).add(x)
    return tuple(sorted((LabelGroup(frozenset(v)) for v in by.values()), key=lambda g: g.rep))


def closure_public(ctx: Ctx, m: int, gamma) -> frozenset:
    """⌊m⌋_{L,γ}."""
    return ctx.table.closure(m, public_vars(gamma, ctx.L) & ctx.table.variables())


def closure_not_b(ctx: Ctx, m: int) -> frozenset:
    """⌊m⌋_{≠b}."""
    return ctx.table.closure(m, ctx.table.variables() - ctx.b.variables)
