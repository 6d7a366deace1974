"""Extended output sequences, projections, memory closures and indistinguishability."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional, Sequence

from .labels import LabelInterpreter, LevelSet, PolicySpec, flows_to
from .syntax import Label, Static


@dataclass(frozen=True)
class OutEvent:
    """⟨b, v, γ⟩ plus the events that were on when it was emitted."""
    label: Label
    level: LevelSet  # γ(b) for the channel label b
    value: int
    gamma: Mapping[str, LevelSet] = field(default_factory=dict)
    delta: frozenset = frozenset()

    @property
    def key(self) -> tuple:
        """What an observer compares: channel and value."""
        return (self.level, self.value)


OutSeq = tuple


@dataclass(frozen=True)
class LabelGroup:
    """The variables sharing one policy b; γ(b) is read off any member."""
    variables: frozenset
    label: Optional[Label] = None

    @property
    def rep(self) -> str:
        return min(self.variables)

    def level(self, ev: OutEvent) -> LevelSet:
        return ev.gamma[self.rep]

    def __str__(self) -> str:
        return "{" + ",".join(sorted(self.variables)) + "}"


def extend(trace, gamma) -> OutSeq:
    """Attach γ snapshots and open events to every raw output of ``trace``."""
    g = gamma.gamma if isinstance(gamma, PolicySpec) else gamma
    it = LabelInterpreter(trace.memories)
    out = []
    for raw in trace.outputs:
        k = raw.step
        mem = it.memories[k]
        out.append(OutEvent(
            label=raw.label,
            level=it.at(raw.label, k),
            value=raw.value,
            gamma={x: it.at(b, k) for x, b in g.items()},
            delta=frozenset(n for n, v in mem.items() if v is True),
        ))
    return tuple(out)


def project(t: Sequence[OutEvent], f: Callable[[OutEvent], bool]) -> OutSeq:
    return tuple(e for e in t if f(e))


def visible(ev: OutEvent, L: LevelSet) -> bool:
    return flows_to(ev.level, L)


def project_L(t: Sequence[OutEvent], L: LevelSet) -> OutSeq:
    """⌊t⌋_L: events whose channel flows to the attacker level L."""
    return project(t, lambda e: visible(e, L))


def is_secret(ev: OutEvent, b: LabelGroup, L: LevelSet) -> bool:
    return not flows_to(b.level(ev), L) and visible(ev, L)


def project_secret(t: Sequence[OutEvent], b: LabelGroup, L: LevelSet) -> OutSeq:
    """⌊t⌋_{b,L}: visible events emitted while b is secret to L."""
    return project(t, lambda e: is_secret(e, b, L))


def keys(t: Iterable[OutEvent]) -> tuple:
    return tuple(e.key for e in t)


def indist(t1: Sequence[OutEvent], t2: Sequence[OutEvent], L: LevelSet) -> bool:
    """t1 ∼_L t2: the L-projection of t1 is a prefix of that of t2."""
    a, b = keys(project_L(t1, L)), keys(project_L(t2, L))
    return b[: len(a)] == a


def consistent(t1: Sequence[OutEvent], t2: Sequence[OutEvent], b: LabelGroup, L: LevelSet) -> bool:
    """t1 ≡_{b,L} t2: secret projections agree on length and last event."""
    a, c = project_secret(t1, b, L), project_secret(t2, b, L)
    if len(a) != len(c):
        return False
    return not a or a[-1].key == c[-1].key


# ------------------------------------------------------------ memories

@dataclass(frozen=True)
class Universe:
    """A finite list of initial memories over one shared variable set."""
    memories: tuple

    def __post_init__(self):
        if not self.memories:
            raise ValueError("a universe needs at least one memory")
        names = set(self.memories[0])
        for m in self.memories[1:]:
            if set(m) != names:
                raise ValueError("universe members bind different names")

    def __len__(self) -> int:
        return len(self.memories)

    @property
    def variables(self) -> frozenset:
        return frozenset(self.memories[0])

    @property
    def all(self) -> frozenset:
        return frozenset(range(len(self.memories)))

    def closure(self, m: int, X: Iterable[str]) -> frozenset:
        """⌊m⌋_X as a set of member indices."""
        X = list(X)
        unknown = set(X) - self.variables
        if unknown:
            raise KeyError(f"closure over unbound names {sorted(unknown)}")
        base = self.memories[m]
        return frozenset(i for i, m2 in enumerate(self.memories) if all(m2[x] == base[x] for x in X))


def closure(m: Mapping, U: Sequence[Mapping], X: Iterable[str]) -> list:
    """⌊m⌋_X over plain memories."""
    X = list(X)
    return [m2 for m2 in U if all(m2[x] == m[x] for x in X)]


def public_vars(gamma: Mapping[str, LevelSet], L: LevelSet) -> frozenset:
    """{x | γ(x) ⊑ L}, the variables ⌊m⌋_{L,γ} fixes."""
    return frozenset(x for x, ls in gamma.items() if flows_to(ls, L))


def static_event(level: LevelSet, value: int, gamma=None) -> OutEvent:
    return OutEvent(Static(level), level, value, gamma or {})
