"""Shared test oracles."""

import numpy as np

from steiner_mcts.generators import GeneratorConfig, generate
from steiner_mcts.gnn import SEGNN, ModelConfig, loss_and_gradients


def random_gradient_case(trial: int, hidden: int = 6, edge_dim: int = 3, per_batch: int = 2):
    """A small random model and a minibatch of (instance, partial, truth) triples."""
    rng = np.random.default_rng(1000 + trial)
    model = SEGNN(ModelConfig(hidden=hidden, edge_dim=edge_dim, seed=trial)).train()
    # perturb the batch-norm affine parameters so they are not at their init values
    for name, p in model.params.items():
        if "gamma" in name or "beta" in name:
            p += rng.normal(scale=0.3, size=p.shape)
        if "theta4" in name:
            p *= 0.3
    samples = []
    for b in range(per_batch):
        model_name = ("erdos_renyi", "geometric", "barabasi_albert", "watts_strogatz")[(trial + b) % 4]
        inst = generate(GeneratorConfig(model_name, 8, 3, weighted=True, seed=int(rng.integers(2**32))))
        others = [v for v in range(inst.n) if v not in inst.terminal_set]
        extra = list(rng.choice(others, size=int(rng.integers(0, 3)), replace=False))
        rest = [v for v in others if v not in extra]
        samples.append((inst, tuple(inst.terminals) + tuple(int(x) for x in extra), int(rng.choice(rest))))
    return model, samples


def gradient_check(model, samples, eps: float = 1e-5, max_coords: int | None = None, seed: int = 0) -> float:
    """Largest per-tensor relative error between analytic and central-difference gradients.

    Relative error of a tensor is ``|a - f| / max(|a|, |f|, 1e-8)`` in the
    2-norm. The floor matters for tensors whose gradient is identically zero
    (e.g. the last shift parameters, since softmax ignores a constant offset).
    ``max_coords`` limits the checked coordinates per tensor.
    """
    _, analytic = loss_and_gradients(model, samples)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for name, param in model.params.items():
        flat = param.reshape(-1)
        idx = np.arange(flat.size)
        if max_coords is not None and flat.size > max_coords:
            idx = rng.choice(flat.size, size=max_coords, replace=False)
        fd = np.empty(idx.size)
        for j, i in enumerate(idx):
            old = flat[i]
            flat[i] = old + eps
            up, _ = loss_and_gradients(model, samples)
            flat[i] = old - eps
            down, _ = loss_and_gradients(model, samples)
            flat[i] = old
            fd[j] = (up - down) / (2 * eps)
        a = analytic[name].reshape(-1)[idx]
        denom = max(np.linalg.norm(a), np.linalg.norm(fd), 1e-8)
        worst = max(worst, float(np.linalg.norm(a - fd) / denom))
    return worst
