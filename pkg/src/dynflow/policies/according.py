"""Noninterference according to policy: correspondence relations between runs."""
from __future__ import annotations

from itertools import combinations
from typing import Callable, Sequence

from ..knowledge import TraceTable
from ..traces import LabelGroup, is_secret
from .framework import (
    INSECURE, SECURE, BudgetExceeded, Ctx, FrameworkInstance, Verdict, Witness,
    check_framework, closure_not_b,
)

DEFAULT_BUDGET = 10 ** 6


def compatible(e1, e2, b: LabelGroup, L) -> bool:
    """Filtered single events agree unless both survive the filter and differ."""
    k1, k2 = is_secret(e1, b, L), is_secret(e2, b, L)
    return not (k1 and k2) or e1.key == e2.key


def _cover(n1: int, n2: int, ok: Callable[[int, int], bool], budget: list) -> bool:
    """A non-decreasing f: [0,n1) -> [0,n2) with f(0)=0 and ok(i, f(i)) everywhere.

    Depth-first over candidate extensions with memoized dead ends. Taking, for
    each i, the least j related to it shows such an f exists whenever a
    complete, monotone, (0,0)-anchored relation covering the first run does.
    """
    dead = set()

    def go(i: int, j: int) -> bool:
        if i == n1:
            return True
        if (i, j) in dead:
            return False
        for j2 in range(j, n2):
            budget[0] -= 1
            if budget[0] < 0:
                raise BudgetExceeded("correspondence enumeration budget exceeded")
            if ok(i, j2) and go(i + 1, j2):
                return True
        dead.add((i, j))
        return False

    return ok(0, 0) and go(1, 0)


def correspondence_exists(t1: Sequence, t2: Sequence, b: LabelGroup, L,
                          budget: int = DEFAULT_BUDGET) -> bool:
    n1, n2 = len(t1), len(t2)
    if n1 == 0 or n2 == 0:
        return True  # the empty relation is complete for the empty side
    box = [budget]
    ok = lambda i, j: compatible(t1[i], t2[j], b, L)  # noqa: E731
    return _cover(n1, n2, ok, box) or _cover(n2, n1, lambda j, i: ok(i, j), box)


def correspondence_brute(t1: Sequence, t2: Sequence, b: LabelGroup, L) -> bool:
    """Reference: try every relation over the index pairs (tiny traces only)."""
    n1, n2 = len(t1), len(t2)
    pairs = [(i, j) for i in range(n1) for j in range(n2)]
    if len(pairs) > 16:
        raise BudgetExceeded("brute-force correspondence limited to 16 pairs")
    for r in range(len(pairs) + 1):
        for R in combinations(pairs, r):
            dom, ran = {i for i, _ in R}, {j for _, j in R}
            if dom != set(range(n1)) and ran != set(range(n2)):
                continue
            if R and (0, 0) not in R:
                continue
            if any((i < i2 and j > j2) or (j < j2 and i > i2) for (i, j) in R for (i2, j2) in R):
                continue
            if all(compatible(t1[i], t2[j], b, L) for i, j in R):
                return True
    return False


def ap_instance(budget: int = DEFAULT_BUDGET) -> FrameworkInstance:
    return FrameworkInstance(
        name="ap",
        sim=lambda ctx, a, c: correspondence_exists(a, c, ctx.b, ctx.L, budget),
        allow=lambda ctx, m, t, index: closure_not_b(ctx, m),
    )


def check_according_to_policy(table: TraceTable, budget: int = DEFAULT_BUDGET) -> Verdict:
    return check_framework(ap_instance(budget), table)


def ap_direct(table: TraceTable, budget: int = DEFAULT_BUDGET) -> Verdict:
    """Every pair of runs whose initial memories differ only on b's variables corresponds."""
    for m1, t1 in enumerate(table.seqs):
        for b in table.groups:
            ctx = Ctx(table, frozenset(), b)
            for m2 in sorted(closure_not_b(ctx, m1)):
                for L in table.attackers:
                    if not correspondence_exists(t1, table.seqs[m2], b, L, budget):
                        return Verdict(INSECURE, "ap", Witness(
                            m1, (len(t1),), L, b, m2, dict(table.memories[m1]), dict(table.memories[m2])))
    return Verdict(SECURE, "ap")
