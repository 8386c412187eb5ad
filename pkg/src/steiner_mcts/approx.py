"""Metric-closure MST 2-approximation."""

from __future__ import annotations

from collections.abc import Iterable

from .graph import SteinerInstance, SteinerTree, metric_closure, minimum_spanning_tree, mst_tree


def closure_tree(instance: SteinerInstance, nodes: Iterable[int]) -> SteinerTree:
    """MST of the metric closure on ``nodes``, expanded to graph paths, re-spanned and pruned."""
    closure = metric_closure(instance, nodes)
    if len(closure.nodes) == 1:
        return SteinerTree((), 0)
    index = closure.nodes
    closure_edges = [
        (a, b, closure.dist[i][j])
        for i, a in enumerate(index)
        for j, b in enumerate(index)
        if i < j
    ]
    union: set[tuple[int, int]] = set()
    for a, b, _ in minimum_spanning_tree(index, closure_edges):
        path = closure.witness_paths[(a, b)]
        union.update((min(x, y), max(x, y)) for x, y in zip(path, path[1:]))
    nodes_used = {x for e in union for x in e}
    edges = [(u, v, instance.edge_weight(u, v)) for u, v in union]
    return mst_tree(instance, nodes_used, edges)


def two_approximation(instance: SteinerInstance) -> SteinerTree:
    return closure_tree(instance, instance.terminals)
