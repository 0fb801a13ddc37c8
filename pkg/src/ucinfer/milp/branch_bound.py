"""Embedded exact MILP solver: best-first branch and bound over LP relaxations.

This solver exists as a deterministic reference for small instances (it is
the oracle the test suite trusts), not as a production engine; instances are
capped by binary count. Branching picks the most fractional binary, breaking
ties toward the lowest column index, and explores the rounded-down child
first. With the deterministic LP underneath, identical inputs always produce
identical solutions.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from ..errors import LpNumericalFailure, NodeLimitExceeded, TooManyBinaries
from . import simplex
from .build import MilpInstance
from .solution import INFEASIBLE, OPTIMAL, MilpSolution

_INT_TOL = 1e-7
_PRUNE_EPS = 1e-9


@dataclass
class BnbLimits:
    binary_cap: int = 60
    node_limit: int = 200_000


def bnb_solve(instance: MilpInstance, limits: BnbLimits | None = None) -> MilpSolution:
    limits = limits or BnbLimits()
    binary_cols = instance.binary_columns
    if binary_cols.size > limits.binary_cap:
        raise TooManyBinaries(
            f"{binary_cols.size} binaries exceed the embedded cap of "
            f"{limits.binary_cap}"
        )

    def relax(lower, upper):
        return simplex.solve_lp(
            instance.objective, instance.rows, instance.relations,
            instance.rhs, lower, upper,
        )

    root = relax(instance.lower, instance.upper)
    if root.status == simplex.INFEASIBLE:
        return MilpSolution(INFEASIBLE)
    if root.status == simplex.UNBOUNDED:
        raise LpNumericalFailure("LP relaxation is unbounded")

    best_obj = np.inf
    best_x = None
    counter = 0
    heap = [(root.objective, counter, instance.lower, instance.upper, root.x)]
    nodes = 0

    while heap:
        bound, _, lower, upper, x = heapq.heappop(heap)
        if bound >= best_obj - _PRUNE_EPS:
            continue
        nodes += 1
        if nodes > limits.node_limit:
            raise NodeLimitExceeded(f"exceeded {limits.node_limit} nodes")

        frac = np.abs(x[binary_cols] - np.round(x[binary_cols]))
        if frac.size == 0 or frac.max() <= _INT_TOL:
            if bound < best_obj - _PRUNE_EPS:
                best_obj = bound
                best_x = x
            continue

        # most fractional binary; ties resolved toward the lowest column
        scores = np.abs(frac - 0.5)
        pick = int(binary_cols[np.argmin(scores)])
        floor = np.floor(x[pick] + _INT_TOL)

        for value in (floor, floor + 1.0):  # rounded-down child first
            lo, up = lower.copy(), upper.copy()
            lo[pick] = max(lo[pick], value)
            up[pick] = min(up[pick], value)
            if lo[pick] > up[pick]:
                continue
            child = relax(lo, up)
            if child.status == simplex.INFEASIBLE:
                continue
            if child.status == simplex.UNBOUNDED:
                raise LpNumericalFailure("LP relaxation is unbounded")
            if child.objective >= best_obj - _PRUNE_EPS:
                continue
            child_frac = np.abs(
                child.x[binary_cols] - np.round(child.x[binary_cols])
            )
            if child_frac.size == 0 or child_frac.max() <= _INT_TOL:
                if child.objective < best_obj - _PRUNE_EPS:
                    best_obj = child.objective
                    best_x = child.x
            else:
                counter += 1
                heapq.heappush(
                    heap, (child.objective, counter, lo, up, child.x)
                )

    if best_x is None:
        return MilpSolution(INFEASIBLE)
    return MilpSolution(OPTIMAL, primal=best_x, objective=float(best_obj), mip_gap=0.0)
