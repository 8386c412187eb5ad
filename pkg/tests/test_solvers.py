from fractions import Fraction

import pytest
from hypothesis import given, settings

from steiner_mcts.approx import two_approximation
from steiner_mcts.exact import CapacityError, brute_force_solve, dreyfus_wagner, exact_solve
from steiner_mcts.graph import SteinerInstance, validate_solution
from steiner_mcts.heuristics import (
    METRIC_CLOSURE,
    MST,
    build_tree,
    default_heuristic,
    is_complete,
    selection_budget,
)

from conftest import generated_instances, random_graphs


class TestFig2:
    def test_exact_and_brute(self, fig2):
        assert exact_solve(fig2).cost == 9
        assert brute_force_solve(fig2).cost == 9
        assert exact_solve(fig2).steiner_nodes(fig2.terminals) == [3]

    def test_approx(self, fig2):
        tree = two_approximation(fig2)
        assert tree.cost == 10
        assert tree.edge_pairs == {(0, 1), (0, 2)}

    def test_metric_closure_heuristic_with_hub(self, fig2):
        assert build_tree(fig2, [0, 1, 2, 3], METRIC_CLOSURE).cost == 9

    def test_mst_heuristic(self, fig2):
        assert build_tree(fig2, [0, 1, 2, 3], MST).cost == 9
        # triangle alone is already connected, so the rule stops at the terminals
        assert is_complete(fig2, [0, 1, 2], MST)
        assert build_tree(fig2, [0, 1, 2], MST).cost == 10


@given(generated_instances())
@settings(max_examples=80)
def test_exact_matches_brute_force(inst):
    exact = exact_solve(inst)
    assert validate_solution(inst, exact) == brute_force_solve(inst).cost


@given(random_graphs(max_n=9, fractional=True))
@settings(max_examples=60)
def test_exact_with_fractional_weights(inst):
    assert exact_solve(inst).cost == brute_force_solve(inst).cost


@given(generated_instances())
@settings(max_examples=60)
def test_approximation_bound(inst):
    opt = exact_solve(inst).cost
    approx = validate_solution(inst, two_approximation(inst))
    assert opt <= approx <= 2 * opt


@given(random_graphs(min_n=3, max_n=12))
def test_two_terminals_is_shortest_path(inst):
    s, t = inst.terminals[0], inst.terminals[-1]
    two = SteinerInstance(inst.n, inst.edges, (s, t))
    if s != t:
        assert exact_solve(two).cost == inst.all_pairs[0][s][t]


def test_all_terminals_is_mst():
    inst = SteinerInstance(4, ((0, 1, 1), (1, 2, 2), (2, 3, 1), (0, 3, 5), (0, 2, 2)), (0, 1, 2, 3))
    assert exact_solve(inst).cost == 4


def test_single_terminal():
    inst = SteinerInstance(3, ((0, 1, 1), (1, 2, 1)), (2,))
    assert exact_solve(inst).cost == 0 and exact_solve(inst).edges == ()
    assert two_approximation(inst).cost == 0


def test_capacity_limits():
    inst = SteinerInstance(16, tuple((i, i + 1, 1) for i in range(15)), tuple(range(16)))
    with pytest.raises(CapacityError):
        exact_solve(inst, limit=14)
    big = SteinerInstance(30, tuple((i, i + 1, 1) for i in range(29)), (0, 29))
    with pytest.raises(CapacityError):
        brute_force_solve(big)


def test_dp_table_optimum(fig2):
    assert dreyfus_wagner(fig2).optimum == 9


def test_fractional_scale():
    inst = SteinerInstance(3, ((0, 1, Fraction(1, 2)), (1, 2, Fraction(1, 3)), (0, 2, 1)), (0, 2))
    assert exact_solve(inst).cost == Fraction(5, 6)


class TestHeuristics:
    @given(generated_instances())
    @settings(max_examples=40)
    def test_any_selection_gives_valid_tree(self, inst):
        selected = list(inst.terminals) + [v for v in range(inst.n) if v % 3 == 0 and v not in inst.terminals]
        for h in (MST, METRIC_CLOSURE):
            tree = build_tree(inst, selected, h)
            assert validate_solution(inst, tree) >= exact_solve(inst).cost

    def test_metric_closure_with_terminals_is_approx(self, fig2):
        assert build_tree(fig2, [0, 1, 2], METRIC_CLOSURE) == two_approximation(fig2)

    def test_mst_extends_in_given_order(self):
        # path 0-1-2-3 plus hub 4 joined to everything by heavy edges
        edges = [(0, 1, 1), (1, 2, 1), (2, 3, 1)] + [(i, 4, 9) for i in range(4)]
        inst = SteinerInstance(5, tuple(edges), (0, 3))
        assert build_tree(inst, [0, 3], MST, order=[4]).cost == 18
        assert build_tree(inst, [0, 3], MST, order=[1, 2]).cost == 3

    def test_selection_budget(self):
        inst = SteinerInstance(20, tuple((i, i + 1, 1) for i in range(19)), tuple(range(10)))
        assert selection_budget(inst) == 1
        inst = SteinerInstance(50, tuple((i, i + 1, 1) for i in range(49)), (0, 1))
        assert selection_budget(inst) == 5
        assert not is_complete(inst, [0, 1, 7, 8], METRIC_CLOSURE)
        assert is_complete(inst, [0, 1, 7, 8, 9, 10, 11], METRIC_CLOSURE)

    def test_default_heuristic(self, fig2):
        assert default_heuristic(fig2) == METRIC_CLOSURE
        assert default_heuristic(SteinerInstance(2, ((0, 1, 1),), (0, 1))) == MST

    def test_unknown_heuristic(self, fig2):
        with pytest.raises(ValueError):
            build_tree(fig2, [0, 1, 2], "greedy")
