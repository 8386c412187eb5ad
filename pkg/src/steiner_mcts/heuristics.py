"""Turning a selected node set into a Steiner tree, plus the matching stopping rules.

Two constructions are provided:

``mst``
    MST of the induced subgraph on the selection (extended in the given order
    until connected), pruned of non-terminal leaves.
``metric-closure``
    MST of the metric closure on the selection, expanded back to graph paths.
    With the selection equal to the terminals this is the 2-approximation.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence

from .approx import closure_tree
from .graph import SteinerInstance, SteinerTree, induced_edges, is_connected, mst_tree

MST = "mst"
METRIC_CLOSURE = "metric-closure"
HEURISTICS = (MST, METRIC_CLOSURE)


def _with_terminals(instance: SteinerInstance, selected: Sequence[int]) -> list[int]:
    seen = set()
    out = []
    for v in list(instance.terminals) + list(selected):
        if v not in seen:
            seen.add(v)
            out.append(v)
    return out


def induced_connected(instance: SteinerInstance, nodes: Iterable[int]) -> bool:
    nodes = set(nodes)
    return is_connected(nodes, induced_edges(instance, nodes))


def build_mst_heuristic(
    instance: SteinerInstance,
    selected: Sequence[int],
    order: Sequence[int] | None = None,
) -> SteinerTree:
    """MST-based construction.

    ``order`` lists further candidate nodes to append while the induced graph
    is disconnected; by default the remaining nodes in id order.
    """
    nodes = _with_terminals(instance, selected)
    if not induced_connected(instance, nodes):
        chosen = set(nodes)
        extra = order if order is not None else range(instance.n)
        for v in list(extra) + list(range(instance.n)):
            if v in chosen:
                continue
            chosen.add(v)
            nodes.append(v)
            if induced_connected(instance, nodes):
                break
    return mst_tree(instance, nodes)


def build_metric_closure_heuristic(instance: SteinerInstance, selected: Sequence[int]) -> SteinerTree:
    return closure_tree(instance, _with_terminals(instance, selected))


def selection_budget(instance: SteinerInstance) -> int:
    """Number of non-terminals the metric-closure rule selects: ceil(10% of non-terminals)."""
    others = instance.n - len(instance.terminals)
    return -(-others // 10)


def is_complete(instance: SteinerInstance, selected: Sequence[int], heuristic: str) -> bool:
    """Stopping rule of ``heuristic`` for the selection (terminals implied)."""
    if heuristic == MST:
        return induced_connected(instance, _with_terminals(instance, selected))
    if heuristic == METRIC_CLOSURE:
        extra = len(set(selected) - instance.terminal_set)
        return extra >= selection_budget(instance)
    raise ValueError(f"unknown heuristic {heuristic!r}")


def build_tree(
    instance: SteinerInstance,
    selected: Sequence[int],
    heuristic: str,
    order: Sequence[int] | None = None,
) -> SteinerTree:
    if heuristic == MST:
        return build_mst_heuristic(instance, selected, order)
    if heuristic == METRIC_CLOSURE:
        return build_metric_closure_heuristic(instance, selected)
    raise ValueError(f"unknown heuristic {heuristic!r}")


def default_heuristic(instance: SteinerInstance) -> str:
    """MST construction for geometric or unweighted graphs, metric closure otherwise."""
    if instance.coords is not None or instance.is_unweighted:
        return MST
    return METRIC_CLOSURE
