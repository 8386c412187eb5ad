import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from steiner_mcts.generators import (
    BA_M,
    BA_M0,
    MODELS,
    WS_K,
    GenerationError,
    GeneratorConfig,
    derive_seed,
    er_probability,
    generate,
    geometric_radius,
    make_dataset,
    terminal_count_for,
)
from steiner_mcts.io import dumps_instance


def test_geometric_worked_example():
    inst = generate(GeneratorConfig("geometric", 20, 10, seed=1))
    assert inst.n == 20 and len(inst.terminals) == 10 and inst.coords is not None


def test_parameters():
    assert er_probability(20) == pytest.approx(0.2995732273553991)
    assert geometric_radius(20) == pytest.approx(math.sqrt(math.log(20) / (10 * math.pi)))


@given(st.sampled_from(MODELS), st.integers(7, 30), st.booleans(), st.integers(0, 2**63 - 1))
@settings(max_examples=60)
def test_invariants(model, n, weighted, seed):
    t = max(2, n // 3)
    inst = generate(GeneratorConfig(model, n, t, weighted, seed))
    assert inst.n == n and len(inst.terminals) == t
    weights = {w for _, _, w in inst.edges}
    assert weights <= set(range(1, 11)) if weighted else weights == {1}
    if model == "geometric":
        r = geometric_radius(n)
        pairs = {(u, v) for u, v, _ in inst.edges}
        for u in range(n):
            for v in range(u + 1, n):
                assert ((u, v) in pairs) == (math.dist(inst.coords[u], inst.coords[v]) <= r)
    else:
        assert inst.coords is None
    if model == "barabasi_albert":
        assert len(inst.edges) == (BA_M0 - 1) + BA_M * (n - BA_M0)
    if model == "watts_strogatz":
        assert len(inst.edges) == n * WS_K // 2


@pytest.mark.parametrize("model", MODELS)
def test_deterministic(model):
    cfg = GeneratorConfig(model, 20, 5, True, 42)
    assert dumps_instance(generate(cfg)) == dumps_instance(generate(cfg))
    other = generate(GeneratorConfig(model, 20, 5, True, 43))
    assert dumps_instance(other) != dumps_instance(generate(cfg))


def test_ba_weights_in_range():
    inst = generate(GeneratorConfig("barabasi_albert", 50, 10, True, 3))
    assert all(1 <= w <= 10 for _, _, w in inst.edges)


def test_terminal_fractions():
    assert [terminal_count_for(f, 50) for f in (0.2, 0.4, 0.6, 0.8)] == [10, 20, 30, 40]
    # 1.5 rounds up, 4.5 rounds up, 7.5 rounds up
    assert [terminal_count_for(f, 50) for f in (0.03, 0.06, 0.09, 0.12, 0.15, 0.18)] == [2, 3, 5, 6, 8, 9]
    assert terminal_count_for(0.01, 50) == 2


def test_dataset_cycles_fractions():
    insts, manifest = make_dataset("erdos_renyi", 50, 8, [0.2, 0.4, 0.6, 0.8], seed=5)
    assert [len(i.terminals) for i in insts] == [10, 20, 30, 40] * 2
    assert len({i.id for i in insts}) == 8
    assert [e["id"] for e in manifest["instances"]] == [i.id for i in insts]


def test_dataset_fixed_count_and_empty():
    insts, _ = make_dataset("geometric", 20, 40, 10, seed=0)
    assert len(insts) == 40 and {len(i.terminals) for i in insts} == {10}
    assert make_dataset("geometric", 20, 0, 10, seed=0)[0] == []


def test_bad_config():
    with pytest.raises(ValueError):
        GeneratorConfig("lattice", 10, 3)
    with pytest.raises(ValueError):
        GeneratorConfig("erdos_renyi", 10, 1)


def test_unreachable_connectivity(monkeypatch):
    import steiner_mcts.generators as g

    monkeypatch.setitem(g._BUILDERS, "erdos_renyi", lambda n, rng: ([], None))
    with pytest.raises(GenerationError):
        generate(GeneratorConfig("erdos_renyi", 10, 3))


def test_derive_seed_independent():
    assert derive_seed(1, 0) != derive_seed(1, 1) != derive_seed(2, 0)
    assert 0 <= derive_seed(2**70, 3) < 2**63
