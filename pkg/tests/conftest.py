import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from steiner_mcts.generators import MODELS, GeneratorConfig, generate
from steiner_mcts.graph import SteinerInstance

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def fig2():
    """Triangle A-B-C of weight-5 edges with a hub D joined to each by weight 3.

    Terminals A, B, C. The metric-closure MST costs 10, the star through D costs 9.
    """
    a, b, c, d = range(4)
    edges = [(a, c, 5), (c, b, 5), (a, b, 5), (a, d, 3), (b, d, 3), (c, d, 3)]
    return SteinerInstance(4, tuple(edges), (a, b, c), id="fig2")


@st.composite
def random_graphs(draw, min_n=2, max_n=9, weighted=None, fractional=False):
    """Connected graph: random spanning tree plus random extra edges."""
    n = draw(st.integers(min_n, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    if weighted is None:
        weighted = draw(st.booleans())
    edges = {}
    order = rng.permutation(n)
    for i in range(1, n):
        u, v = int(order[i]), int(order[rng.integers(i)])
        edges[(min(u, v), max(u, v))] = None
    density = draw(st.floats(0.0, 0.6))
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < density:
                edges[(u, v)] = None
    out = []
    for u, v in sorted(edges):
        if not weighted:
            w = 1
        elif fractional:
            w = f"{rng.integers(1, 40)}/{rng.choice([1, 2, 4])}"
        else:
            w = int(rng.integers(1, 11))
        out.append((u, v, w))
    k = draw(st.integers(1 if n == 1 else 2, n)) if n > 1 else 1
    terminals = sorted(rng.choice(n, size=k, replace=False).tolist())
    return SteinerInstance(n, tuple(out), tuple(terminals), id=f"rand-{seed}")


@st.composite
def generated_instances(draw, n_range=(8, 12), t_range=(2, 5)):
    model = draw(st.sampled_from(MODELS))
    n = draw(st.integers(*n_range))
    if model == "watts_strogatz":
        n = max(n, 7)
    t = draw(st.integers(t_range[0], min(t_range[1], n)))
    cfg = GeneratorConfig(model, n, t, draw(st.booleans()), draw(st.integers(0, 2**40)))
    return generate(cfg)
