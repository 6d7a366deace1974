"""Cryptographic erasure: an attacker who may start watching mid-run."""
from __future__ import annotations

from typing import Sequence

from ..knowledge import TraceTable
from ..traces import keys, project_L
from .framework import (
    INSECURE, SECURE, Ctx, FrameworkInstance, Verdict, Witness, check_framework,
    closure_public, windows,
)


def is_subtrace(small: tuple, big: tuple) -> bool:
    """Contiguous occurrence; the empty sequence occurs everywhere."""
    n = len(small)
    return any(big[k:k + n] == small for k in range(len(big) - n + 1))


def sim_ce(ctx: Ctx, a: Sequence, b: Sequence) -> bool:
    return is_subtrace(keys(project_L(a, ctx.L)), keys(project_L(b, ctx.L)))


def _allow(ctx: Ctx, m: int, t, index) -> frozenset:
    out = ctx.table.all
    for ev in t[index[0] - 1: index[1]]:
        out &= closure_public(ctx, m, ev.gamma)
    return out


def ce_instance() -> FrameworkInstance:
    return FrameworkInstance("ce", sim_ce, _allow, mode="subtrace", per_label=False)


def check_crypto_erasure(table: TraceTable) -> Verdict:
    return check_framework(ce_instance(), table)


def k_ce(table: TraceTable, L, window: Sequence) -> frozenset:
    """Members with some raw run segment whose projection equals the window's."""
    target = keys(project_L(window, L))
    out = set()
    for m, t in enumerate(table.seqs):
        n = len(t)
        if any(keys(project_L(t[a:c], L)) == target for a in range(n + 1) for c in range(a, n + 1)):
            out.add(m)
    return frozenset(out)


def ce_direct(table: TraceTable) -> Verdict:
    for m, t in enumerate(table.seqs):
        for L in table.attackers:
            ctx = Ctx(table, L, None)
            for index, w in windows(t, "subtrace"):
                allowed = _allow(ctx, m, t, index)
                known = k_ce(table, L, w)
                if not allowed <= known:
                    off = min(allowed - known)
                    return Verdict(INSECURE, "ce", Witness(m, index, L, None, off,
                                                           dict(table.memories[m]), dict(table.memories[off])))
    return Verdict(SECURE, "ce")
