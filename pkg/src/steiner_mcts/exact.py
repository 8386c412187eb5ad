"""Exact Steiner tree solvers.

``exact_solve`` runs the Dreyfus-Wagner dynamic program over (terminal subset,
node) states; ``brute_force_solve`` enumerates Steiner node subsets and is
only meant as an independent test oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .graph import (
    SteinerInstance,
    SteinerTree,
    Weight,
    induced_edges,
    is_connected,
    minimum_spanning_tree,
    prune_tree,
)

DEFAULT_TERMINAL_LIMIT = 14
BRUTE_FORCE_LIMIT = 20


class CapacityError(ValueError):
    """Instance too large for an exact method; use the heuristics instead."""


def integer_scale(instance: SteinerInstance) -> int:
    """Smallest factor turning every edge weight into an integer."""
    scale = 1
    for _, _, w in instance.edges:
        if isinstance(w, Fraction):
            scale = math.lcm(scale, w.denominator)
    return scale


def _unscale(value: int, scale: int) -> Weight:
    if scale == 1:
        return int(value)
    out = Fraction(int(value), scale)
    return int(out) if out.denominator == 1 else out


@dataclass
class DpTable:
    """``cost[S, v]``: cheapest tree joining terminal subset ``S`` (bitmask) and node ``v``.

    ``split[S, u]`` is the submask used when the tree branches at ``u`` and
    ``via[S, v]`` the branching node ``u`` reached from ``v`` by a shortest
    path. Costs are integers scaled by ``scale``.
    """

    terminals: tuple[int, ...]
    cost: np.ndarray
    split: np.ndarray
    via: np.ndarray
    scale: int

    @property
    def optimum(self) -> Weight:
        full = (1 << len(self.terminals)) - 1
        return _unscale(self.cost[full].min(), self.scale)


def _submasks_with_lowbit(mask: int) -> np.ndarray:
    """Proper submasks of ``mask`` that contain its lowest bit, ascending."""
    bits = [b for b in range(mask.bit_length()) if mask >> b & 1]
    codes = np.arange(1, 1 << len(bits), 2, dtype=np.int64)[:-1]
    subs = np.zeros_like(codes)
    for j, b in enumerate(bits):
        subs |= ((codes >> j) & 1) << b
    return subs


def dreyfus_wagner(instance: SteinerInstance, limit: int = DEFAULT_TERMINAL_LIMIT) -> DpTable:
    terminals = instance.terminals
    k = len(terminals)
    if k > limit:
        raise CapacityError(f"{k} terminals exceed the exact solver limit of {limit}; use the heuristics")
    n = instance.n
    scale = integer_scale(instance)
    dist = np.array([[int(d * scale) for d in row] for row in instance.all_pairs[0]], dtype=np.int64)

    size = 1 << k
    cost = np.zeros((size, n), dtype=np.int64)
    split = np.zeros((size, n), dtype=np.int64)
    via = np.zeros((size, n), dtype=np.int64)
    for i, t in enumerate(terminals):
        cost[1 << i] = dist[t]
        via[1 << i] = t
    for mask in range(3, size):
        if mask & (mask - 1) == 0:
            continue
        subs = _submasks_with_lowbit(mask)
        joined = cost[subs] + cost[mask ^ subs]
        best = joined.argmin(axis=0)
        split[mask] = subs[best]
        merged = joined[best, np.arange(n)]
        reach = merged[:, None] + dist
        src = reach.argmin(axis=0)
        via[mask] = src
        cost[mask] = reach[src, np.arange(n)]
    return DpTable(terminals, cost, split, via, scale)


def _reconstruct(instance: SteinerInstance, table: DpTable, mask: int, v: int, out: set) -> None:
    u = int(table.via[mask, v])
    path = instance.path(u, v)
    for a, b in zip(path, path[1:]):
        out.add((min(a, b), max(a, b)))
    if mask & (mask - 1) == 0:
        return
    sub = int(table.split[mask, u])
    _reconstruct(instance, table, sub, u, out)
    _reconstruct(instance, table, mask ^ sub, u, out)


def exact_solve(instance: SteinerInstance, limit: int = DEFAULT_TERMINAL_LIMIT) -> SteinerTree:
    """Minimum-cost Steiner tree via Dreyfus-Wagner; raises CapacityError beyond ``limit`` terminals."""
    if len(instance.terminals) == 1:
        return SteinerTree((), 0)
    table = dreyfus_wagner(instance, limit)
    full = (1 << len(instance.terminals)) - 1
    pairs: set[tuple[int, int]] = set()
    _reconstruct(instance, table, full, instance.terminals[0], pairs)
    edges = [(u, v, instance.edge_weight(u, v)) for u, v in pairs]
    nodes = {x for e in pairs for x in e}
    tree = prune_tree(SteinerTree.from_edges(minimum_spanning_tree(nodes, edges)), instance.terminals)
    optimum = _unscale(table.cost[full, instance.terminals[0]], table.scale)
    if tree.cost != optimum:
        raise AssertionError(f"reconstruction cost {tree.cost} differs from DP optimum {optimum}")
    return tree


def brute_force_solve(instance: SteinerInstance, limit: int = BRUTE_FORCE_LIMIT) -> SteinerTree:
    """Minimum over Steiner node subsets X of MST(G[T + X])."""
    others = [v for v in range(instance.n) if v not in instance.terminal_set]
    if len(others) > limit:
        raise CapacityError(f"{len(others)} non-terminals exceed the brute force limit of {limit}")
    if len(instance.terminals) == 1:
        return SteinerTree((), 0)
    best = None
    for bits in range(1 << len(others)):
        nodes = list(instance.terminals) + [others[i] for i in range(len(others)) if bits >> i & 1]
        edges = induced_edges(instance, nodes)
        if not is_connected(nodes, edges):
            continue
        tree = SteinerTree.from_edges(minimum_spanning_tree(nodes, edges))
        if best is None or tree.cost < best.cost:
            best = tree
    return prune_tree(best, instance.terminals)
