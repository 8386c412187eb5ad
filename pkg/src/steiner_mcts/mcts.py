"""GNN-guided Monte Carlo tree search over node-addition actions.

A search node holds an ordered selection ``S`` (terminals first). Its actions
add one node of ``V - S``. Leaves are valued by greedily completing ``S``
with the network's top choice until the heuristic's stopping rule fires and
building the tree; the reward is minus its cost. Edges keep the best reward
seen below them, normalised per parent into [0, 1] (best child 1, worst 0)
for the PUCT rule.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .approx import two_approximation
from .gnn import SEGNN, encode_structure, node_features, segment_softmax
from .graph import SteinerInstance, SteinerTree, Weight
from .heuristics import build_tree, default_heuristic, is_complete

C_PUCT = 1.3


def default_simulations(n: int) -> int:
    return 800 if n <= 50 else 1200


@dataclass
class SearchNode:
    selected: tuple[int, ...]
    terminal: bool
    expanded: bool = False
    prior: dict[int, float] = field(default_factory=dict)
    visits: dict[int, int] = field(default_factory=dict)
    best: dict[int, Weight | None] = field(default_factory=dict)
    children: dict[int, "SearchNode"] = field(default_factory=dict)
    evaluations: int = 0

    @property
    def actions(self) -> list[int]:
        return sorted(self.prior)

    @property
    def total_visits(self) -> int:
        return self.evaluations + sum(self.visits.values())


def normalized_values(node: SearchNode) -> dict[int, float]:
    """Per-parent min-max normalisation of child rewards; unvalued children map to 0.

    When every valued child has the same reward there is nothing to rank and
    they also map to 0, leaving the choice to the exploration term.
    """
    valued = [v for v in node.best.values() if v is not None]
    out = {a: 0.0 for a in node.prior}
    if not valued:
        return out
    hi, lo = max(valued), min(valued)
    if hi == lo:
        return out
    for a, v in node.best.items():
        if v is not None:
            out[a] = float((v - lo) / (hi - lo))
    return out


def select_action(node: SearchNode, c_puct: float = C_PUCT) -> int:
    """PUCT: argmax of normalised value plus prior-weighted exploration.

    Ties (e.g. a fresh node where every bonus is zero) go to the larger prior,
    then the smaller node id.
    """
    if not node.prior:
        raise ValueError("no legal action: node is terminal or unexpanded")
    q = normalized_values(node)
    root_n = math.sqrt(sum(node.visits.values()))
    best_key, best_a = None, None
    for a, p in node.prior.items():
        key = (q[a] + c_puct * p * root_n / (1 + node.visits[a]), p, -a)
        if best_key is None or key > best_key:
            best_key, best_a = key, a
    return best_a


def backup(path: Sequence[tuple[SearchNode, int]], reward: Weight) -> None:
    for node, a in path:
        node.visits[a] += 1
        if node.best[a] is None or reward > node.best[a]:
            node.best[a] = reward


def play(root: SearchNode) -> int:
    """Action to commit: a valued child with the best normalised value, ties to the smallest id."""
    if not root.prior:
        raise ValueError("root has no actions")
    q = normalized_values(root)
    return max(root.prior, key=lambda a: (root.best[a] is not None, q[a], -a))


class Predictor:
    """Eval-mode network priors for one instance, cached by selected set."""

    def __init__(self, model: SEGNN, instance: SteinerInstance):
        self.model = model.eval()
        self.instance = instance
        self.structure = encode_structure([instance])
        self.edge_cache = model.edge_embeddings(self.structure)
        self._cache: dict[frozenset, np.ndarray] = {}
        self.calls = 0

    def probabilities(self, selected: Sequence[int]) -> np.ndarray:
        key = frozenset(selected)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        self.calls += 1
        features = node_features(self.structure, [key])
        logits, _ = self.model.forward(self.structure, features, edge_cache=self.edge_cache, update_stats=False)
        logits[list(key)] = -np.inf
        probs = segment_softmax(logits, self.structure.offsets)
        self._cache[key] = probs
        return probs


@dataclass
class SearchResult:
    tree: SteinerTree
    selected: tuple[int, ...]
    search_cost: Weight
    approx_cost: Weight
    moves: list[dict]
    simulations: int
    network_calls: int


class GuidedSearch:
    def __init__(
        self,
        instance: SteinerInstance,
        model: SEGNN,
        heuristic: str | None = None,
        simulations: int | None = None,
        c_puct: float = C_PUCT,
    ):
        self.instance = instance
        self.heuristic = heuristic or default_heuristic(instance)
        self.simulations = default_simulations(instance.n) if simulations is None else simulations
        if self.simulations < 1:
            raise ValueError("simulations must be at least 1")
        self.c_puct = c_puct
        self.predictor = Predictor(model, instance)
        self._values: dict[frozenset, tuple[Weight, tuple[int, ...]]] = {}
        self.simulations_run = 0

    def new_node(self, selected: tuple[int, ...]) -> SearchNode:
        return SearchNode(selected, is_complete(self.instance, selected, self.heuristic))

    def expand(self, node: SearchNode) -> None:
        """Create child edges for every legal action with renormalised network priors."""
        node.expanded = True
        if node.terminal:
            return
        probs = self.predictor.probabilities(node.selected)
        chosen = set(node.selected)
        legal = [v for v in range(self.instance.n) if v not in chosen]
        total = float(sum(probs[v] for v in legal))
        for v in legal:
            node.prior[v] = float(probs[v]) / total if total > 0 else 1.0 / len(legal)
            node.visits[v] = 0
            node.best[v] = None

    def complete(self, selected: Sequence[int]) -> tuple[int, ...]:
        """Greedy completion: add the top-prior legal node until the stopping rule fires."""
        current = list(selected)
        while not is_complete(self.instance, current, self.heuristic):
            probs = self.predictor.probabilities(current)
            current.append(int(np.argmax(probs)))
        return tuple(current)

    def evaluate_leaf(self, selected: Sequence[int]) -> Weight:
        key = frozenset(selected)
        hit = self._values.get(key)
        if hit is None:
            final = self.complete(selected)
            tree = build_tree(self.instance, final, self.heuristic)
            hit = (-tree.cost, final)
            self._values[key] = hit
        return hit[0]

    def simulate(self, root: SearchNode) -> None:
        node, path = root, []
        while node.expanded and not node.terminal:
            a = select_action(node, self.c_puct)
            path.append((node, a))
            child = node.children.get(a)
            if child is None:
                child = node.children[a] = self.new_node(node.selected + (a,))
            node = child
        if not node.expanded:
            self.expand(node)
        reward = self.evaluate_leaf(node.selected)
        node.evaluations += 1
        backup(path, reward)
        self.simulations_run += 1

    def run(self, trace: bool = False) -> SearchResult:
        instance = self.instance
        root = self.new_node(tuple(instance.terminals))
        moves = []
        while not root.terminal:
            for _ in range(self.simulations):
                self.simulate(root)
            a = play(root)
            if trace:
                moves.append({
                    "action": a,
                    "value": None if root.best[a] is None else -root.best[a],
                    "visits": root.visits[a],
                    "prior": root.prior[a],
                })
            child = root.children.get(a)
            root = child if child is not None else self.new_node(root.selected + (a,))
        tree = build_tree(instance, root.selected, self.heuristic)
        approx = two_approximation(instance)
        best = tree if tree.cost <= approx.cost else approx
        return SearchResult(best, root.selected, tree.cost, approx.cost, moves,
                            self.simulations_run, self.predictor.calls)


def run_search(
    instance: SteinerInstance,
    model: SEGNN,
    heuristic: str | None = None,
    simulations: int | None = None,
    seed: int = 0,
) -> SteinerTree:
    """Search for a Steiner tree; never worse than the 2-approximation.

    The search is deterministic, ``seed`` only labels the run.
    """
    return GuidedSearch(instance, model, heuristic, simulations).run().tree
