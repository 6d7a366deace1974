"""Level sets, lattices and the trace-indexed interpretation of mutable labels."""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Mapping, Optional, Sequence

from .lang import eval_cond
from .syntax import (
    Label, Mutate, Static, parse_label as _parse_label,
    show_label, show_levels,
)

LevelSet = frozenset

__all__ = [
    "LevelSet", "Label", "Static", "Mutate", "Lattice", "PolicySpec", "leq",
    "flows_to", "denning_levelset", "role_levelset", "parse_label", "show_label",
    "interpret_label", "LabelInterpreter", "dynamic_spec",
]


def leq(l1: LevelSet, l2: LevelSet) -> bool:
    """L1 ⊑ L2 iff L2 ⊆ L1: bigger level sets are less restrictive."""
    return l2 <= l1


flows_to = leq


def _closure(nodes: Iterable[str], pairs: Iterable[tuple]) -> set:
    """Reflexive-transitive closure of ``pairs`` over ``nodes``."""
    nodes = list(nodes)
    rel = {(a, a) for a in nodes} | set(pairs)
    changed = True
    while changed:
        changed = False
        for (a, b), (c, d) in product(list(rel), list(rel)):
            if b == c and (a, d) not in rel:
                rel.add((a, d))
                changed = True
    return rel


@dataclass(frozen=True)
class Lattice:
    levels: tuple
    order: tuple = ()  # pairs (lo, hi) meaning lo ⊑ hi
    _rel: frozenset = field(default=frozenset(), compare=False, repr=False)

    def __post_init__(self):
        unknown = {x for p in self.order for x in p} - set(self.levels)
        if unknown:
            raise ValueError(f"order mentions unknown levels {sorted(unknown)}")
        rel = _closure(self.levels, self.order)
        for a, b in rel:
            if a != b and (b, a) in rel:
                raise ValueError(f"order is not antisymmetric: {a} and {b}")
        object.__setattr__(self, "_rel", frozenset(rel))

    @classmethod
    def two_point(cls) -> "Lattice":
        return cls(("L", "H"), (("L", "H"),))

    @property
    def universe(self) -> LevelSet:
        return frozenset(self.levels)

    def below(self, a: str, b: str) -> bool:
        return (a, b) in self._rel

    def levelset(self, level: str) -> LevelSet:
        return denning_levelset(self, level)

    def name_of(self, ls: LevelSet) -> Optional[str]:
        for lv in self.levels:
            if self.levelset(lv) == ls:
                return lv
        return None

    def render(self, ls: LevelSet) -> str:
        """Level name when ``ls`` is the image of exactly one level, else a set literal."""
        return show_levels(ls, self.name_of)

    def resolve(self, text: str) -> LevelSet:
        """Parse a level name or a ``{a,b}`` literal."""
        text = text.strip()
        if text.startswith("{"):
            b = _parse_label(text)
            assert isinstance(b, Static)
            extra = b.levels - self.universe
            if extra:
                raise KeyError(f"unknown levels {sorted(extra)}")
            return b.levels
        return self.levelset(text)


def denning_levelset(lat: Lattice, level: str) -> LevelSet:
    """L_ℓ = {ℓ' | ℓ ⊑ ℓ'}."""
    if level not in lat.levels:
        raise KeyError(f"unknown level {level!r}")
    return frozenset(h for h in lat.levels if lat.below(level, h))


def role_levelset(actsfor: Iterable[tuple], principal: str, principals: Iterable[str] = ()) -> LevelSet:
    """{P' | P' actsfor P}; ``actsfor`` holds pairs (P', P)."""
    pairs = list(actsfor)
    nodes = set(principals) | {x for p in pairs for x in p}
    if principal not in nodes:
        raise KeyError(f"unknown principal {principal!r}")
    rel = _closure(nodes, pairs)
    return frozenset(a for a in nodes if (a, principal) in rel)


def parse_label(text: str, lattice: Optional[Lattice] = None, events: Iterable[str] = ()) -> Label:
    return _parse_label(text, lattice.levelset if lattice else None, events)


@dataclass(frozen=True)
class PolicySpec:
    gamma: Mapping[str, Label]
    persistent: bool = False

    @property
    def ptype(self) -> str:
        return "Per" if self.persistent else "Tran"


# ---------------------------------------------------------- interpretation

class LabelInterpreter:
    """𝒫⟦b⟧ over sub-traces of one fixed list of memories, memoized."""

    def __init__(self, memories: Sequence[Mapping]):
        self.memories = list(memories)
        self._memo: dict = {}
        self._cond: dict = {}

    def cond(self, e, k: int) -> bool:
        key = (e, k)
        if key not in self._cond:
            self._cond[key] = eval_cond(self.memories[k], e)
        return self._cond[key]

    def interpret(self, b: Label, start: int, end: int) -> LevelSet:
        """Interpretation over the configurations start..end inclusive."""
        if isinstance(b, Static):
            return b.levels
        key = (b, start, end)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        rng = range(start, end + 1)
        if b.direction == "->":
            i = next((k for k in rng if not self.cond(b.cond, k)), None)
            res = self.interpret(b.left, start, end) if i is None else self.interpret(b.right, i, end)
        elif b.direction == "<-":
            i = next((k for k in rng if self.cond(b.cond, k)), None)
            res = self.interpret(b.right, start, end) if i is None else self.interpret(b.left, i, end)
        elif b.direction == "<=>":
            final = self.cond(b.cond, end)
            flips = [k for k in rng if self.cond(b.cond, k) != final]
            j = flips[-1] + 1 if flips else start
            res = self.interpret(b.left if final else b.right, j, end)
        else:
            raise ValueError(f"unknown direction {b.direction!r}")
        self._memo[key] = res
        return res

    def at(self, b: Label, i: int) -> LevelSet:
        """𝒫⟦b⟧(τ^[:i])."""
        return self.interpret(b, 0, i)


def interpret_label(b: Label, trace) -> LevelSet:
    """𝒫⟦b⟧(τ) for a whole trace (an ExecTrace or a list of memories)."""
    mems = trace.memories if hasattr(trace, "memories") else list(trace)
    return LabelInterpreter(mems).interpret(b, 0, len(mems) - 1)


def dynamic_spec(gamma, trace, i: int, interp: Optional[LabelInterpreter] = None) -> dict:
    """γ_i: every variable's label interpreted over τ^[:i]."""
    g = gamma.gamma if isinstance(gamma, PolicySpec) else gamma
    it = interp or LabelInterpreter(trace.memories if hasattr(trace, "memories") else trace)
    if not 0 <= i < len(it.memories):
        raise IndexError(f"execution point {i} out of range")
    return {x: it.at(b, i) for x, b in g.items()}


def all_levelsets(universe: Iterable[str]) -> list:
    u = sorted(universe)
    return [frozenset(x for x, keep in zip(u, bits) if keep) for bits in product((0, 1), repeat=len(u))]
