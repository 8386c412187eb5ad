"""Supervised training data from optimal trees, and the training loop."""

from __future__ import annotations

import copy
import itertools
import json
import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .exact import exact_solve
from .gnn import Adam, SEGNN, batch_loss, encode_structure, node_features, segment_log_softmax
from .graph import SteinerInstance, SteinerTree

log = logging.getLogger(__name__)


class TrainingDiverged(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainingSample:
    """Partial solution (terminals first, then Steiner nodes in order) and the next node."""

    instance_id: str
    partial: tuple[int, ...]
    truth: int

    def to_json(self) -> str:
        return json.dumps({"instance_id": self.instance_id, "partial": list(self.partial), "truth": self.truth})

    @classmethod
    def from_json(cls, line: str) -> "TrainingSample":
        d = json.loads(line)
        return cls(d["instance_id"], tuple(d["partial"]), int(d["truth"]))


def expand_permutations(instance: SteinerInstance, optimal: SteinerTree, k: int, seed: int) -> list[TrainingSample]:
    """One sample per prefix of each of ``k`` orderings of the optimal tree's Steiner nodes.

    When ``m! <= k`` all ``m!`` orderings are used exactly once.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    steiner = optimal.steiner_nodes(instance.terminals)
    m = len(steiner)
    if m == 0:
        return []
    if math.factorial(m) <= k:
        orders = list(itertools.permutations(steiner))
    else:
        rng = np.random.default_rng(seed)
        orders = [tuple(int(x) for x in rng.permutation(steiner)) for _ in range(k)]
    base = tuple(instance.terminals)
    samples = []
    for order in orders:
        for j, node in enumerate(order):
            samples.append(TrainingSample(instance.id, base + order[:j], node))
    return samples


def label_instances(instances: Sequence[SteinerInstance], k: int, seed: int) -> list[TrainingSample]:
    """Solve every instance exactly and expand its optimal tree into samples."""
    out = []
    for i, inst in enumerate(instances):
        out += expand_permutations(inst, exact_solve(inst), k, seed + i)
    return out


def write_samples(samples: Iterable[TrainingSample], path: str | Path) -> None:
    with open(path, "w") as fh:
        for s in samples:
            fh.write(s.to_json() + "\n")


def read_samples(path: str | Path) -> list[TrainingSample]:
    with open(path) as fh:
        return [TrainingSample.from_json(line) for line in fh if line.strip()]


def split_by_instance(samples: Sequence[TrainingSample], seed: int, holdout: float = 0.1):
    """Deterministic train/validation split that keeps each instance on one side."""
    ids = sorted({s.instance_id for s in samples})
    if len(ids) < 2:
        return list(samples), list(samples)
    rng = np.random.default_rng(seed)
    order = [ids[i] for i in rng.permutation(len(ids))]
    n_val = max(1, round(holdout * len(ids)))
    val_ids = set(order[:n_val])
    train = [s for s in samples if s.instance_id not in val_ids]
    val = [s for s in samples if s.instance_id in val_ids]
    return train, val


def _batches(samples, size):
    for i in range(0, len(samples), size):
        yield samples[i:i + size]


def _encode(batch, lookup):
    structure = encode_structure([lookup[s.instance_id] for s in batch])
    features = node_features(structure, [s.partial for s in batch])
    truth = np.asarray([s.truth for s in batch], dtype=np.int64)
    return structure, features, truth


@dataclass
class Evaluation:
    loss: float
    accuracy: float
    baseline: float


def evaluate(model: SEGNN, samples: Sequence[TrainingSample], lookup: dict[str, SteinerInstance],
             batch_size: int = 256) -> Evaluation:
    """Eval-mode cross-entropy, masked top-1 accuracy and the uniform-legal-action baseline."""
    was_training = model.training
    model.eval()
    total_loss, hits, baseline = 0.0, 0, 0.0
    for batch in _batches(list(samples), batch_size):
        structure, features, truth = _encode(batch, lookup)
        logits, _ = model.forward(structure, features, update_stats=False)
        logp = segment_log_softmax(logits, structure.offsets)
        starts = structure.offsets[:-1]
        total_loss -= logp[starts + truth].sum()
        masked = np.where(features[:, 0] > 0, -np.inf, logits)
        for g, s in enumerate(batch):
            lo, hi = structure.offsets[g], structure.offsets[g + 1]
            hits += int(np.argmax(masked[lo:hi]) == s.truth)
            baseline += 1.0 / (hi - lo - len(set(s.partial)))
    model.train(was_training)
    n = max(len(samples), 1)
    return Evaluation(total_loss / n, hits / n, baseline / n)


@dataclass
class History:
    train_loss: list[float] = field(default_factory=list)
    val_loss: list[float] = field(default_factory=list)
    val_accuracy: list[float] = field(default_factory=list)
    best_epoch: int = -1
    best_val_loss: float = math.inf

    @property
    def epochs_run(self) -> int:
        return len(self.train_loss)


def train(
    model: SEGNN,
    samples: Sequence[TrainingSample],
    instances: Iterable[SteinerInstance],
    patience: int | None = None,
    max_epochs: int = 200,
    seed: int = 0,
    lr: float | None = None,
    batch_size: int | None = None,
) -> tuple[SEGNN, History]:
    """ADAM training with early stopping on validation loss; returns the best-epoch model."""
    if not samples:
        raise ValueError("no training samples")
    cfg = model.config
    patience = cfg.patience if patience is None else patience
    batch_size = batch_size or cfg.batch_size
    lookup = {inst.id: inst for inst in instances}
    train_set, val_set = split_by_instance(samples, seed)
    rng = np.random.default_rng(seed)
    opt = Adam(lr=cfg.lr if lr is None else lr)
    history = History()
    best_state = None

    for epoch in range(max_epochs):
        model.train()
        order = rng.permutation(len(train_set))
        epoch_loss = 0.0
        for batch_idx in _batches(order, batch_size):
            batch = [train_set[i] for i in batch_idx]
            structure, features, truth = _encode(batch, lookup)
            loss, dlogits, caches = batch_loss(model, structure, features, truth)
            if not math.isfinite(loss):
                raise TrainingDiverged(f"non-finite loss {loss} at epoch {epoch} (batch of {len(batch)})")
            grads = model.backward(structure, caches, dlogits)
            opt.step(model.params, grads)
            epoch_loss += loss * len(batch)
        history.train_loss.append(epoch_loss / len(train_set))
        ev = evaluate(model, val_set, lookup)
        history.val_loss.append(ev.loss)
        history.val_accuracy.append(ev.accuracy)
        log.info("epoch %d train %.4f val %.4f acc %.3f", epoch, history.train_loss[-1], ev.loss, ev.accuracy)
        if ev.loss < history.best_val_loss:
            history.best_val_loss = ev.loss
            history.best_epoch = epoch
            best_state = (copy.deepcopy(model.params), copy.deepcopy(model.buffers))
        elif epoch - history.best_epoch >= patience:
            break

    model.params, model.buffers = best_state
    model.eval()
    return model, history
