"""Random Steiner instances: Erdos-Renyi, Watts-Strogatz, Barabasi-Albert, random geometric.

Parameters follow the experimental setup the solver was designed for:

* ER edge probability ``2 ln(n) / n``
* WS ring lattice with K = 6 neighbours (3 per side), rewiring probability 0.2
* BA initial core of 5 nodes joined as a path, each new node attaches 5 edges
* geometric: points uniform in the unit square, radius ``sqrt(2 ln(n) / (pi n))``

Connectivity is only likely, so a disconnected draw is rejected and the
model is re-sampled from a derived seed (at most ``MAX_ATTEMPTS`` times).
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from .graph import SteinerInstance, is_connected

MODELS = ("erdos_renyi", "watts_strogatz", "barabasi_albert", "geometric")
MAX_ATTEMPTS = 100
WS_K = 6
WS_P = 0.2
BA_M0 = 5
BA_M = 5
MAX_WEIGHT = 10


class GenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class GeneratorConfig:
    model: str
    n: int
    terminal_count: int
    weighted: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; choose from {MODELS}")
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if not 2 <= self.terminal_count <= self.n:
            raise ValueError(f"terminal_count must be in [2, {self.n}]")
        if self.model == "barabasi_albert" and self.n < BA_M0:
            raise ValueError(f"barabasi_albert needs n >= {BA_M0}")
        if self.model == "watts_strogatz" and self.n <= WS_K:
            raise ValueError(f"watts_strogatz needs n > {WS_K}")


def derive_seed(seed: int, *keys: int) -> int:
    """Independent 63-bit child seed for ``(seed, *keys)``."""
    ss = np.random.SeedSequence([seed % 2**64, *keys])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def er_probability(n: int) -> float:
    return 2 * math.log(n) / n


def geometric_radius(n: int) -> float:
    return math.sqrt(2 * math.log(n) / (math.pi * n))


def _erdos_renyi(n, rng):
    p = er_probability(n)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < p
    return list(zip(iu[keep].tolist(), ju[keep].tolist())), None


def _watts_strogatz(n, rng):
    half = WS_K // 2
    adj = [set() for _ in range(n)]
    for u in range(n):
        for j in range(1, half + 1):
            v = (u + j) % n
            adj[u].add(v)
            adj[v].add(u)
    for j in range(1, half + 1):
        for u in range(n):
            v = (u + j) % n
            if v not in adj[u] or rng.random() >= WS_P:
                continue
            if len(adj[u]) >= n - 1:
                continue
            # resample until the new endpoint is neither u nor an existing neighbour
            while True:
                x = int(rng.integers(n))
                if x != u and x not in adj[u]:
                    break
            adj[u].discard(v)
            adj[v].discard(u)
            adj[u].add(x)
            adj[x].add(u)
    return [(u, v) for u in range(n) for v in adj[u] if u < v], None


def _barabasi_albert(n, rng):
    edges = [(i, i + 1) for i in range(BA_M0 - 1)]
    degree = np.zeros(n)
    for u, v in edges:
        degree[u] += 1
        degree[v] += 1
    for new in range(BA_M0, n):
        existing = np.arange(new)
        probs = degree[:new] / degree[:new].sum()
        targets = rng.choice(existing, size=min(BA_M, new), replace=False, p=probs)
        for t in sorted(int(x) for x in targets):
            edges.append((t, new))
            degree[t] += 1
            degree[new] += 1
    return edges, None


def _geometric(n, rng):
    pts = rng.random((n, 2))
    r = geometric_radius(n)
    edges = []
    for u in range(n):
        for v in range(u + 1, n):
            if math.dist(pts[u], pts[v]) <= r:
                edges.append((u, v))
    return edges, [tuple(map(float, p)) for p in pts]


_BUILDERS = {
    "erdos_renyi": _erdos_renyi,
    "watts_strogatz": _watts_strogatz,
    "barabasi_albert": _barabasi_albert,
    "geometric": _geometric,
}


def instance_name(config: GeneratorConfig) -> str:
    kind = "w" if config.weighted else "u"
    return f"{config.model}-n{config.n}-t{config.terminal_count}-{kind}-s{config.seed}"


def generate(config: GeneratorConfig) -> SteinerInstance:
    """Draw one connected instance; deterministic in ``config``."""
    build = _BUILDERS[config.model]
    for attempt in range(MAX_ATTEMPTS):
        rng = np.random.default_rng(derive_seed(config.seed, attempt))
        pairs, coords = build(config.n, rng)
        if not is_connected(range(config.n), pairs):
            continue
        if config.weighted:
            weights = rng.integers(1, MAX_WEIGHT + 1, size=len(pairs)).tolist()
        else:
            weights = [1] * len(pairs)
        terminals = sorted(rng.choice(config.n, size=config.terminal_count, replace=False).tolist())
        edges = tuple((u, v, w) for (u, v), w in zip(pairs, weights))
        return SteinerInstance(config.n, edges, tuple(terminals), coords and tuple(coords), instance_name(config))
    raise GenerationError(f"no connected {config.model} graph with n={config.n} after {MAX_ATTEMPTS} attempts")


def terminal_count_for(fraction: float, n: int) -> int:
    """round(fraction * n) with halves rounded up, at least 2."""
    exact = Fraction(str(fraction)) * n
    return max(2, math.floor(exact + Fraction(1, 2)))


def make_dataset(
    model: str,
    n: int,
    count: int,
    terminal_spec: int | Sequence[float],
    seed: int,
    weighted: bool = False,
) -> tuple[list[SteinerInstance], dict]:
    """Generate ``count`` instances; ``terminal_spec`` is a fixed count or fractions cycled per instance.

    Returns the instances and a manifest dict recording each instance's config.
    """
    instances, entries = [], []
    for i in range(count):
        if isinstance(terminal_spec, (int, np.integer)):
            t = int(terminal_spec)
        else:
            t = terminal_count_for(terminal_spec[i % len(terminal_spec)], n)
        cfg = GeneratorConfig(model, n, min(t, n), weighted, derive_seed(seed, i))
        inst = generate(cfg)
        instances.append(inst)
        entries.append({"id": inst.id, "config": asdict(cfg)})
    manifest = {
        "model": model,
        "n": n,
        "count": count,
        "terminal_spec": terminal_spec if isinstance(terminal_spec, int) else list(terminal_spec),
        "weighted": weighted,
        "seed": seed,
        "instances": entries,
    }
    return instances, manifest
