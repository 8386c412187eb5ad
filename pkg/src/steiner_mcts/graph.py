"""Steiner instances, solution trees, shortest paths, spanning trees and validation.

Weights are kept exact (``int`` or ``fractions.Fraction``) so that costs from
different solvers can be compared with ``==``. Floating point only appears in
the neural network.
"""

from __future__ import annotations

import heapq
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Union

Weight = Union[int, Fraction]
Edge = tuple[int, int, Weight]


class InstanceError(ValueError):
    """An instance violates one of the model invariants."""


class DisconnectedGraphError(ValueError):
    pass


class InvalidSolution(ValueError):
    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = violations


def as_weight(value) -> Weight:
    """Coerce a number or numeric string to an exact positive weight."""
    if isinstance(value, bool):
        raise InstanceError(f"invalid weight {value!r}")
    if isinstance(value, float):
        frac = Fraction(value)
    else:
        frac = Fraction(str(value)) if isinstance(value, str) else Fraction(value)
    if frac <= 0:
        raise InstanceError(f"edge weight must be positive, got {value!r}")
    return int(frac) if frac.denominator == 1 else frac


def _edge_key(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class SteinerInstance:
    """Weighted undirected connected graph plus a terminal set.

    Edges are stored canonically as ``(u, v, w)`` with ``u < v``, sorted.
    Terminals are a sorted tuple.
    """

    n: int
    edges: tuple[Edge, ...]
    terminals: tuple[int, ...]
    coords: tuple[tuple[float, float], ...] | None = None
    id: str = ""

    def __post_init__(self):
        if self.n < 1:
            raise InstanceError("node_count must be positive")
        canon: dict[tuple[int, int], Weight] = {}
        for u, v, w in self.edges:
            u, v = int(u), int(v)
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise InstanceError(f"edge ({u}, {v}) has a node outside [0, {self.n})")
            if u == v:
                raise InstanceError(f"self-loop on node {u}")
            key = _edge_key(u, v)
            if key in canon:
                raise InstanceError(f"duplicate edge {key}")
            canon[key] = as_weight(w)
        object.__setattr__(self, "edges", tuple((u, v, canon[(u, v)]) for u, v in sorted(canon)))

        terms = sorted({int(t) for t in self.terminals})
        if len(terms) != len(self.terminals):
            raise InstanceError("duplicate terminal")
        if not terms:
            raise InstanceError("at least one terminal is required")
        if terms[0] < 0 or terms[-1] >= self.n:
            raise InstanceError("terminal outside node range")
        object.__setattr__(self, "terminals", tuple(terms))

        if self.coords is not None:
            if len(self.coords) != self.n:
                raise InstanceError("coords must have one (x, y) per node")
            object.__setattr__(self, "coords", tuple((float(x), float(y)) for x, y in self.coords))

        if not is_connected(range(self.n), self.edges):
            raise InstanceError("graph is not connected")

    # -- derived structure -------------------------------------------------

    @cached_property
    def adjacency(self) -> tuple[tuple[tuple[int, Weight], ...], ...]:
        """Neighbor lists sorted by neighbor id."""
        adj: list[list[tuple[int, Weight]]] = [[] for _ in range(self.n)]
        for u, v, w in self.edges:
            adj[u].append((v, w))
            adj[v].append((u, w))
        return tuple(tuple(sorted(a)) for a in adj)

    @cached_property
    def weight(self) -> dict[tuple[int, int], Weight]:
        return {(u, v): w for u, v, w in self.edges}

    def edge_weight(self, u: int, v: int) -> Weight:
        return self.weight[_edge_key(u, v)]

    @cached_property
    def terminal_set(self) -> frozenset[int]:
        return frozenset(self.terminals)

    @cached_property
    def is_unweighted(self) -> bool:
        return all(w == 1 for _, _, w in self.edges)

    @cached_property
    def all_pairs(self) -> tuple[list[list[Weight]], list[list[int]]]:
        """Distances and shortest-path parents from every source (cached)."""
        dist, parent = [], []
        for s in range(self.n):
            d, p = shortest_paths(self, s)
            dist.append(d)
            parent.append(p)
        return dist, parent

    def path(self, source: int, target: int) -> list[int]:
        """Witness shortest path source -> target using the cached parent trees."""
        parent = self.all_pairs[1][source]
        out = [target]
        while out[-1] != source:
            out.append(parent[out[-1]])
        out.reverse()
        return out


@dataclass(frozen=True)
class SteinerTree:
    """A solution: canonical ``(u, v, w)`` edges (sorted, ``u < v``) and exact cost."""

    edges: tuple[Edge, ...]
    cost: Weight = field(default=0)

    @classmethod
    def from_edges(cls, edges: Iterable[Edge]) -> "SteinerTree":
        canon = sorted({(*_edge_key(u, v), w) for u, v, w in edges})
        return cls(tuple(canon), sum((w for _, _, w in canon), 0))

    @property
    def nodes(self) -> frozenset[int]:
        return frozenset(x for u, v, _ in self.edges for x in (u, v))

    @property
    def edge_pairs(self) -> frozenset[tuple[int, int]]:
        return frozenset((u, v) for u, v, _ in self.edges)

    def steiner_nodes(self, terminals: Iterable[int]) -> list[int]:
        return sorted(self.nodes - set(terminals))


@dataclass(frozen=True)
class MetricClosure:
    nodes: tuple[int, ...]
    dist: tuple[tuple[Weight, ...], ...]
    witness_paths: dict[tuple[int, int], tuple[int, ...]]


# -- union-find / connectivity ----------------------------------------------


class _DisjointSet:
    def __init__(self, items: Iterable[int]):
        self.parent = {x: x for x in items}

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True


def is_connected(nodes: Iterable[int], edges: Iterable[Sequence]) -> bool:
    nodes = list(nodes)
    if len(nodes) <= 1:
        return True
    ds = _DisjointSet(nodes)
    components = len(nodes)
    for e in edges:
        u, v = e[0], e[1]
        if u in ds.parent and v in ds.parent and ds.union(u, v):
            components -= 1
    return components == 1


def induced_edges(instance: SteinerInstance, nodes: Iterable[int]) -> list[Edge]:
    keep = set(nodes)
    return [(u, v, w) for u, v, w in instance.edges if u in keep and v in keep]


# -- core operations ----------------------------------------------------------


def shortest_paths(instance: SteinerInstance, source: int) -> tuple[list[Weight], list[int]]:
    """Single-source Dijkstra.

    Among equal-length paths the predecessor with the smallest id wins, which
    makes witness paths reproducible. ``parents[source] == source``.
    """
    if not 0 <= source < instance.n:
        raise IndexError(f"source {source} outside [0, {instance.n})")
    inf = None
    dist: list = [inf] * instance.n
    parent = [-1] * instance.n
    dist[source] = 0
    parent[source] = source
    done = [False] * instance.n
    heap = [(0, source)]
    adj = instance.adjacency
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for v, w in adj[u]:
            alt = d + w
            if dist[v] is None or alt < dist[v]:
                dist[v] = alt
                parent[v] = u
                heapq.heappush(heap, (alt, v))
            elif alt == dist[v] and v != source and u < parent[v]:
                parent[v] = u
    return dist, parent


def metric_closure(instance: SteinerInstance, nodes: Iterable[int] | None = None) -> MetricClosure:
    """Complete graph on ``nodes`` (default: the terminals) weighted by shortest-path length."""
    nodes = tuple(sorted(set(instance.terminals if nodes is None else nodes)))
    all_dist = instance.all_pairs[0]
    dist = tuple(tuple(all_dist[a][b] for b in nodes) for a in nodes)
    paths = {}
    for i, a in enumerate(nodes):
        for b in nodes[i + 1:]:
            paths[(a, b)] = tuple(instance.path(a, b))
    return MetricClosure(nodes, dist, paths)


def minimum_spanning_tree(nodes: Iterable[int], edges: Iterable[Edge]) -> list[Edge]:
    """Kruskal with ties broken by (weight, min endpoint, max endpoint)."""
    nodes = sorted(set(nodes))
    ds = _DisjointSet(nodes)
    ordered = sorted(((w, *_edge_key(u, v)) for u, v, w in edges if u in ds.parent and v in ds.parent))
    tree: list[Edge] = []
    for w, u, v in ordered:
        if ds.union(u, v):
            tree.append((u, v, w))
            if len(tree) == len(nodes) - 1:
                break
    if len(tree) != max(len(nodes) - 1, 0):
        raise DisconnectedGraphError("edge set does not connect the node set")
    return tree


def prune_tree(tree: SteinerTree, terminals: Iterable[int]) -> SteinerTree:
    """Strip non-terminal leaves until every leaf is a terminal."""
    terminals = set(terminals)
    adj: dict[int, dict[int, Weight]] = {}
    for u, v, w in tree.edges:
        adj.setdefault(u, {})[v] = w
        adj.setdefault(v, {})[u] = w
    stack = [x for x, nb in adj.items() if len(nb) <= 1 and x not in terminals]
    while stack:
        x = stack.pop()
        if x not in adj or x in terminals or len(adj[x]) > 1:
            continue
        for y in adj.pop(x):
            del adj[y][x]
            if len(adj[y]) <= 1 and y not in terminals:
                stack.append(y)
    edges = [(u, v, w) for u, nb in adj.items() for v, w in nb.items() if u < v]
    return SteinerTree.from_edges(edges)


def mst_tree(instance: SteinerInstance, nodes: Iterable[int], edges: Iterable[Edge] | None = None) -> SteinerTree:
    """MST over ``nodes`` (induced edges unless given), pruned to the terminals."""
    nodes = set(nodes)
    if edges is None:
        edges = induced_edges(instance, nodes)
    return prune_tree(SteinerTree.from_edges(minimum_spanning_tree(nodes, edges)), instance.terminals)


def check_solution(instance: SteinerInstance, tree: SteinerTree) -> list[str]:
    """Return one message per violated property (empty when valid)."""
    problems = []
    seen = set()
    for u, v, w in tree.edges:
        key = _edge_key(u, v)
        if key in seen:
            problems.append(f"duplicate edge {key}")
        seen.add(key)
        if instance.weight.get(key) != w:
            problems.append(f"edge not in instance: {key}")
    nodes = {x for e in seen for x in e}
    if tree.edges and len(seen) != len(nodes) - 1:
        problems.append("not a tree: edge count is not node count minus one")
    ds = _DisjointSet(nodes)
    for u, v in seen:
        if not ds.union(u, v):
            problems.append("not a tree: cycle detected")
            break
    if len({ds.find(x) for x in nodes}) > 1:
        problems.append("not a tree: disconnected")
    covered = nodes if tree.edges else set(instance.terminals[:1])
    missing = [t for t in instance.terminals if t not in covered]
    if missing:
        problems.append(f"terminal uncovered: {missing}")
    if sum((w for _, _, w in tree.edges), 0) != tree.cost:
        problems.append("cost mismatch")
    return problems


def validate_solution(instance: SteinerInstance, tree: SteinerTree) -> Weight:
    """Return the exact cost of a valid tree, raise :class:`InvalidSolution` otherwise."""
    problems = check_solution(instance, tree)
    if problems:
        raise InvalidSolution(problems)
    return tree.cost
