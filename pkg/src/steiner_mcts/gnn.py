"""Static-edge graph neural network (SE-GNN) in numpy with hand-written backprop.

Each layer computes, for every node ``u``::

    z_u = theta1 h_u + sum_{v in N(u)} theta2 h_v + sum_{v in N(u)} theta3 sigmoid(theta4 w(u, v))
    h_u' = MLP(z_u)

where the MLP is two dense sublayers, each followed by batch norm and ReLU.
The readout scores node ``u`` by the sum of its final embedding and applies a
softmax over the nodes of each graph.

A minibatch of graphs is processed as one block-diagonal graph; batch-norm
statistics are taken over all nodes of the minibatch.
"""

from __future__ import annotations

import io
import json
import zipfile
from collections.abc import Iterable, Sequence
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.sparse as sp

from .graph import SteinerInstance

CHECKPOINT_VERSION = 1
IN_FEATURES = 4
PARAM_NAMES = ("theta1", "theta2", "theta3", "theta4", "w1", "gamma1", "beta1", "w2", "gamma2", "beta2")


class ModelError(ValueError):
    pass


class CheckpointError(ValueError):
    pass


@dataclass
class ModelConfig:
    hidden: int = 128
    edge_dim: int = 16
    layers: int = 2
    bn_eps: float = 1e-5
    bn_momentum: float = 0.9
    seed: int = 0
    lr: float = 1e-3
    batch_size: int = 32
    patience: int = 15
    node_size: int | None = None


@dataclass
class GraphStructure:
    """Feature-independent part of an encoded graph (or block-diagonal batch)."""

    adj: sp.csr_matrix
    incidence: sp.csr_matrix
    edge_weight: np.ndarray
    coords: np.ndarray
    terminal: np.ndarray
    offsets: np.ndarray

    @property
    def num_nodes(self) -> int:
        return int(self.offsets[-1])


def encode_structure(instances: Sequence[SteinerInstance]) -> GraphStructure:
    offsets = np.zeros(len(instances) + 1, dtype=np.int64)
    src, dst, wts, coords, term = [], [], [], [], []
    for g, inst in enumerate(instances):
        base = offsets[g]
        offsets[g + 1] = base + inst.n
        for u, v, w in inst.edges:
            src += [base + u, base + v]
            dst += [base + v, base + u]
            wts += [float(w), float(w)]
        c = np.zeros((inst.n, 2)) if inst.coords is None else np.asarray(inst.coords, dtype=float)
        coords.append(c)
        t = np.zeros(inst.n)
        t[list(inst.terminals)] = 1.0
        term.append(t)
    n_total = int(offsets[-1])
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    m = src.size
    adj = sp.csr_matrix((np.ones(m), (src, dst)), shape=(n_total, n_total))
    adj.sort_indices()
    inc = sp.csr_matrix((np.ones(m), (src, np.arange(m))), shape=(n_total, m))
    return GraphStructure(adj, inc, np.asarray(wts), np.concatenate(coords), np.concatenate(term), offsets)


def node_features(structure: GraphStructure, partials: Sequence[Iterable[int]]) -> np.ndarray:
    """Feature tags ``[in_partial, is_terminal, x, y]`` for every node of the batch."""
    x = np.zeros((structure.num_nodes, IN_FEATURES))
    for g, part in enumerate(partials):
        idx = [structure.offsets[g] + v for v in part]
        x[idx, 0] = 1.0
    x[:, 1] = structure.terminal
    x[:, 2:] = structure.coords
    return x


def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _xavier(rng, fan_out, fan_in, shape=None):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape or (fan_out, fan_in))


class SEGNN:
    """Parameters, batch-norm running statistics and the forward/backward passes."""

    def __init__(self, config: ModelConfig | None = None):
        self.config = config or ModelConfig()
        self.training = False
        self.params: dict[str, np.ndarray] = {}
        self.buffers: dict[str, np.ndarray] = {}
        rng = np.random.default_rng(self.config.seed)
        d, de = self.config.hidden, self.config.edge_dim
        for l in range(self.config.layers):
            d_in = IN_FEATURES if l == 0 else d
            p = f"layers.{l}."
            self.params[p + "theta1"] = _xavier(rng, d, d_in)
            self.params[p + "theta2"] = _xavier(rng, d, d_in)
            self.params[p + "theta3"] = _xavier(rng, d, de)
            self.params[p + "theta4"] = _xavier(rng, de, 1, shape=(de,))
            for k in (1, 2):
                self.params[p + f"w{k}"] = _xavier(rng, d, d)
                self.params[p + f"gamma{k}"] = np.ones(d)
                self.params[p + f"beta{k}"] = np.zeros(d)
                self.buffers[p + f"running_mean{k}"] = np.zeros(d)
                self.buffers[p + f"running_var{k}"] = np.ones(d)

    def train(self, mode: bool = True) -> "SEGNN":
        self.training = mode
        return self

    def eval(self) -> "SEGNN":
        return self.train(False)

    def layer(self, l: int) -> dict[str, np.ndarray]:
        p = f"layers.{l}."
        return {k: self.params[p + k] for k in PARAM_NAMES}

    # -- forward -------------------------------------------------------------

    def edge_embeddings(self, structure: GraphStructure) -> list[np.ndarray]:
        """Per layer: (sigmoid edge embeddings per directed edge, their sum per node)."""
        out = []
        for l in range(self.config.layers):
            s = _sigmoid(structure.edge_weight[:, None] * self.params[f"layers.{l}.theta4"][None, :])
            out.append((s, structure.incidence @ s))
        return out

    def _batch_norm(self, u, l, k, update_stats, cache):
        p = f"layers.{l}."
        gamma, beta = self.params[p + f"gamma{k}"], self.params[p + f"beta{k}"]
        eps = self.config.bn_eps
        if self.training:
            mean = u.mean(axis=0)
            var = u.var(axis=0)
            if update_stats:
                mom = self.config.bn_momentum
                self.buffers[p + f"running_mean{k}"] = mom * self.buffers[p + f"running_mean{k}"] + (1 - mom) * mean
                self.buffers[p + f"running_var{k}"] = mom * self.buffers[p + f"running_var{k}"] + (1 - mom) * var
        else:
            mean = self.buffers[p + f"running_mean{k}"]
            var = self.buffers[p + f"running_var{k}"]
        inv_std = 1.0 / np.sqrt(var + eps)
        xhat = (u - mean) * inv_std
        cache[f"xhat{k}"] = xhat
        cache[f"inv_std{k}"] = inv_std
        return gamma * xhat + beta

    def forward(self, structure: GraphStructure, features: np.ndarray, edge_cache=None,
                update_stats: bool = True):
        """Node scores (logits) for every node of the batch plus the backward cache."""
        if features.shape != (structure.num_nodes, IN_FEATURES):
            raise ModelError(f"features have shape {features.shape}, expected ({structure.num_nodes}, {IN_FEATURES})")
        edges = edge_cache if edge_cache is not None else self.edge_embeddings(structure)
        h = features
        caches = []
        for l in range(self.config.layers):
            P = self.layer(l)
            s, e_sum = edges[l]
            agg = structure.adj @ h
            z = h @ P["theta1"].T + agg @ P["theta2"].T + e_sum @ P["theta3"].T
            c = {"h": h, "agg": agg, "s": s, "e_sum": e_sum, "z": z}
            y1 = self._batch_norm(z @ P["w1"].T, l, 1, update_stats, c)
            r1 = np.maximum(y1, 0.0)
            y2 = self._batch_norm(r1 @ P["w2"].T, l, 2, update_stats, c)
            h = np.maximum(y2, 0.0)
            c.update(y1=y1, r1=r1, y2=y2)
            caches.append(c)
        return h.sum(axis=1), caches

    # -- backward ------------------------------------------------------------

    def _batch_norm_backward(self, dy, l, k, cache, grads):
        p = f"layers.{l}."
        xhat, inv_std = cache[f"xhat{k}"], cache[f"inv_std{k}"]
        grads[p + f"gamma{k}"] = (dy * xhat).sum(axis=0)
        grads[p + f"beta{k}"] = dy.sum(axis=0)
        dxhat = dy * self.params[p + f"gamma{k}"]
        if not self.training:
            return dxhat * inv_std
        n = dy.shape[0]
        return inv_std / n * (n * dxhat - dxhat.sum(axis=0) - xhat * (dxhat * xhat).sum(axis=0))

    def backward(self, structure: GraphStructure, caches, dlogits: np.ndarray) -> dict[str, np.ndarray]:
        grads: dict[str, np.ndarray] = {}
        dh = np.repeat(dlogits[:, None], self.config.hidden, axis=1)
        for l in reversed(range(self.config.layers)):
            P, c, p = self.layer(l), caches[l], f"layers.{l}."
            dy2 = dh * (c["y2"] > 0)
            du2 = self._batch_norm_backward(dy2, l, 2, c, grads)
            grads[p + "w2"] = du2.T @ c["r1"]
            dy1 = (du2 @ P["w2"]) * (c["y1"] > 0)
            du1 = self._batch_norm_backward(dy1, l, 1, c, grads)
            grads[p + "w1"] = du1.T @ c["z"]
            dz = du1 @ P["w1"]
            grads[p + "theta1"] = dz.T @ c["h"]
            grads[p + "theta2"] = dz.T @ c["agg"]
            grads[p + "theta3"] = dz.T @ c["e_sum"]
            ds = structure.incidence.T @ (dz @ P["theta3"])
            s = c["s"]
            grads[p + "theta4"] = (ds * s * (1.0 - s) * structure.edge_weight[:, None]).sum(axis=0)
            if l > 0:
                dh = dz @ P["theta1"] + structure.adj.T @ (dz @ P["theta2"])
        return grads


# -- readout, loss ------------------------------------------------------------


def segment_softmax(logits: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """Softmax within each graph of a batch (log-sum-exp stabilised)."""
    starts = offsets[:-1]
    seg_max = np.maximum.reduceat(logits, starts)
    counts = np.diff(offsets)
    shifted = logits - np.repeat(seg_max, counts)
    ex = np.exp(shifted)
    return ex / np.repeat(np.add.reduceat(ex, starts), counts)


def segment_log_softmax(logits: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    starts = offsets[:-1]
    counts = np.diff(offsets)
    seg_max = np.maximum.reduceat(logits, starts)
    shifted = logits - np.repeat(seg_max, counts)
    lse = np.log(np.add.reduceat(np.exp(shifted), starts))
    return shifted - np.repeat(lse, counts)


def forward(model: SEGNN, instance: SteinerInstance, partial: Iterable[int], mask: bool = False) -> np.ndarray:
    """Selection probabilities over the nodes of one instance.

    With ``mask=True`` nodes already in ``partial`` get probability zero.
    """
    partial = list(partial)
    if not instance.terminal_set <= set(partial):
        raise ModelError("partial solution must contain every terminal")
    structure = encode_structure([instance])
    logits, _ = model.forward(structure, node_features(structure, [partial]), update_stats=False)
    if mask:
        logits = logits.copy()
        logits[partial] = -np.inf
    return segment_softmax(logits, structure.offsets)


def batch_loss(model: SEGNN, structure: GraphStructure, features: np.ndarray, truth: np.ndarray,
               update_stats: bool = True):
    """Mean cross-entropy over the graphs of a batch; returns (loss, dlogits, caches)."""
    logits, caches = model.forward(structure, features, update_stats=update_stats)
    logp = segment_log_softmax(logits, structure.offsets)
    idx = structure.offsets[:-1] + truth
    b = len(truth)
    loss = -logp[idx].mean()
    dlogits = np.exp(logp)
    dlogits[idx] -= 1.0
    dlogits /= b
    return float(loss), dlogits, caches


def loss_and_gradients(model: SEGNN, samples, update_stats: bool = False):
    """Cross-entropy of the ground-truth node and gradients for every parameter.

    ``samples`` is a list of ``(instance, partial, truth)`` triples; the loss
    is averaged over them. Uses the model's current mode for batch norm.
    """
    instances = [s[0] for s in samples]
    structure = encode_structure(instances)
    features = node_features(structure, [s[1] for s in samples])
    truth = np.asarray([s[2] for s in samples], dtype=np.int64)
    loss, dlogits, caches = batch_loss(model, structure, features, truth, update_stats)
    return loss, model.backward(structure, caches, dlogits)


# -- optimizer ---------------------------------------------------------------


@dataclass
class Adam:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray], lr: float | None = None) -> None:
        lr = self.lr if lr is None else lr
        self.t += 1
        bc1 = 1.0 - self.beta1 ** self.t
        bc2 = 1.0 - self.beta2 ** self.t
        for name, g in grads.items():
            if name not in self.m:
                self.m[name] = np.zeros_like(params[name])
                self.v[name] = np.zeros_like(params[name])
            self.m[name] = self.beta1 * self.m[name] + (1 - self.beta1) * g
            self.v[name] = self.beta2 * self.v[name] + (1 - self.beta2) * g * g
            params[name] -= lr * (self.m[name] / bc1) / (np.sqrt(self.v[name] / bc2) + self.eps)


# -- checkpoints -------------------------------------------------------------


def save_checkpoint(model: SEGNN) -> bytes:
    """Serialize to an ``.npz`` container.

    Layout: one array per parameter (``param/<name>``) and running statistic
    (``buffer/<name>``), plus ``meta``: UTF-8 JSON with ``version`` and ``config``.
    """
    meta = json.dumps({"version": CHECKPOINT_VERSION, "config": asdict(model.config)}).encode()
    arrays = {"meta": np.frombuffer(meta, dtype=np.uint8)}
    arrays.update({f"param/{k}": v for k, v in model.params.items()})
    arrays.update({f"buffer/{k}": v for k, v in model.buffers.items()})
    buf = io.BytesIO()
    # fixed zip timestamps so identical models give identical bytes
    with zipfile.ZipFile(buf, "w", compression=zipfile.ZIP_STORED) as zf:
        for name, arr in arrays.items():
            with zf.open(zipfile.ZipInfo(name + ".npy", date_time=(1980, 1, 1, 0, 0, 0)), "w") as fh:
                np.lib.format.write_array(fh, np.ascontiguousarray(arr), allow_pickle=False)
    return buf.getvalue()


def load_checkpoint(payload: bytes) -> SEGNN:
    try:
        with np.load(io.BytesIO(payload), allow_pickle=False) as data:
            meta = json.loads(bytes(data["meta"]).decode())
            arrays = {k: np.array(data[k]) for k in data.files if k != "meta"}
    except CheckpointError:
        raise
    except Exception as exc:
        raise CheckpointError(f"corrupt checkpoint: {exc}") from None
    if meta.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(f"checkpoint version {meta.get('version')} != {CHECKPOINT_VERSION}")
    model = SEGNN(ModelConfig(**meta["config"]))
    for key, arr in arrays.items():
        kind, name = key.split("/", 1)
        target = model.params if kind == "param" else model.buffers
        if name not in target or target[name].shape != arr.shape:
            raise CheckpointError(f"unexpected tensor {key} with shape {arr.shape}")
        target[name] = arr
    missing = (set(model.params) | set(model.buffers)) - {k.split("/", 1)[1] for k in arrays}
    if missing:
        raise CheckpointError(f"checkpoint lacks tensors {sorted(missing)}")
    return model
