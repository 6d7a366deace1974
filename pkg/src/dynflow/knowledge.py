"""Knowledge operators over a precomputed table of runs."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .labels import Lattice, LevelSet, flows_to
from .traces import LabelGroup, OutEvent, Universe, is_secret, keys, project_L


@dataclass
class TraceTable:
    """Every terminating member of a universe with its extended output sequence.

    Knowledge sets are frozensets of member indices. The table plays the role
    of the program: all knowledge operators quantify over its rows.
    """
    universe: Universe
    seqs: tuple
    groups: tuple = ()
    attackers: tuple = ()
    persistent: bool = False
    lattice: Optional[Lattice] = None
    excluded: tuple = ()
    _proj: dict = field(default_factory=dict, repr=False)
    _k1: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if len(self.seqs) != len(self.universe):
            raise ValueError("one output sequence per universe member")

    @property
    def memories(self) -> tuple:
        return self.universe.memories

    @property
    def all(self) -> frozenset:
        return self.universe.all

    def proj(self, m: int, L: LevelSet) -> tuple:
        key = (m, L)
        if key not in self._proj:
            self._proj[key] = keys(project_L(self.seqs[m], L))
        return self._proj[key]

    def closure(self, m: int, X) -> frozenset:
        return self.universe.closure(m, X)

    def variables(self) -> frozenset:
        return self.universe.variables

    def members(self, ks) -> list:
        return [self.memories[i] for i in sorted(ks)]


def k1(table: TraceTable, t: Sequence[OutEvent], L: LevelSet) -> frozenset:
    """{m | t ∼_L t_m}: members whose run extends what was observed."""
    p = keys(project_L(t, L))
    return k1_keys(table, p, L)


def k1_keys(table: TraceTable, p: tuple, L: LevelSet) -> frozenset:
    ck = (p, L)
    hit = table._k1.get(ck)
    if hit is None:
        n = len(p)
        hit = frozenset(m for m in range(len(table.seqs)) if table.proj(m, L)[:n] == p)
        table._k1[ck] = hit
    return hit


def k_gen(table: TraceTable, t: Sequence[OutEvent], sim: Callable) -> frozenset:
    """𝒦(c, t, sim) = {m | t sim t_m}."""
    return frozenset(m for m, t2 in enumerate(table.seqs) if sim(t, t2))


def k2(table: TraceTable, t: Sequence[OutEvent], L: LevelSet, b: LabelGroup) -> frozenset:
    """Knowledge attributable to the last event: union of k1 over consistent prefixes."""
    sp = [e.key for e in t if is_secret(e, b, L)]
    n = len(sp)
    last = sp[-1] if sp else None
    out = set()
    for m, t2 in enumerate(table.seqs):
        count, lk, vis = 0, None, []
        for j in range(len(t2) + 1):
            if j:
                ev = t2[j - 1]
                if flows_to(ev.level, L):
                    vis.append(ev.key)
                if is_secret(ev, b, L):
                    count += 1
                    lk = ev.key
                if count > n:
                    break
            if count == n and (n == 0 or lk == last):
                out |= k1_keys(table, tuple(vis), L)
    return frozenset(out)


def allowance(table: TraceTable, m: int, t: Sequence[OutEvent], b: LabelGroup, L: LevelSet,
              persistent: bool) -> frozenset:
    """⌊m⌋_{≠b}, intersected with the prior knowledge when persistent."""
    allowed = table.closure(m, table.variables() - b.variables)
    if persistent:
        allowed &= k1(table, t[:-1], L)
    return allowed


def degenerate(table: TraceTable) -> bool:
    """True when ⌊m⌋_{≠b} = {m} for every member and group.

    Such a universe never lets a labeled variable vary, so every policy
    accepts it vacuously.
    """
    if not table.seqs:
        return False
    rest = table.variables()
    return all(table.closure(m, rest - g.variables) == {m}
               for g in table.groups for m in range(len(table.seqs)))
