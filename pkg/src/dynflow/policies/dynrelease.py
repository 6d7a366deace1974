"""The dynamic release policy: last-event knowledge bounded by the allowance."""
from __future__ import annotations

from ..knowledge import TraceTable, allowance, k2
from ..traces import consistent, indist
from .framework import Ctx, FrameworkInstance, Verdict, check_framework


def dynrelease_instance(persistent: bool) -> FrameworkInstance:
    name = "dynrelease-per" if persistent else "dynrelease-tran"

    def allow(ctx: Ctx, m: int, t, index) -> frozenset:
        return allowance(ctx.table, m, t[: index[0]], ctx.b, ctx.L, persistent)

    return FrameworkInstance(
        name=name,
        sim=lambda ctx, a, b: indist(a, b, ctx.L),
        consist=lambda ctx, a, b: consistent(a, b, ctx.b, ctx.L),
        allow=allow,
        knowledge=lambda ctx, t: k2(ctx.table, t, ctx.L, ctx.b),
    )


def check_dynrelease(table: TraceTable, persistent=None) -> Verdict:
    """``persistent=None`` uses the table's own policy type."""
    per = table.persistent if persistent is None else persistent
    return check_framework(dynrelease_instance(per), table)
