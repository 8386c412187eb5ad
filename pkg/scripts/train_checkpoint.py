"""Label a generated dataset with exact solutions and train an SE-GNN checkpoint.

    python3 scripts/train_checkpoint.py --model geometric --count 200 --out ckpt/geometric20.npz
"""

import argparse
import json
import logging
import time
from pathlib import Path

from steiner_mcts.generators import MODELS, make_dataset
from steiner_mcts.gnn import SEGNN, ModelConfig, save_checkpoint
from steiner_mcts.training import label_instances, train


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--model", choices=MODELS, default="geometric")
    ap.add_argument("--n", type=int, default=20)
    ap.add_argument("--count", type=int, default=200)
    ap.add_argument("--terminals", type=int, default=10)
    ap.add_argument("--weighted", action="store_true")
    ap.add_argument("--k", type=int, default=20)
    ap.add_argument("--epochs", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--data-seed", type=int, default=1)
    ap.add_argument("--out", required=True)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    start = time.perf_counter()
    instances, _ = make_dataset(args.model, args.n, args.count, args.terminals, args.data_seed, args.weighted)
    samples = label_instances(instances, args.k, args.seed)
    labelled = time.perf_counter() - start
    model, history = train(SEGNN(ModelConfig(seed=args.seed, node_size=args.n)), samples, instances,
                           max_epochs=args.epochs, seed=args.seed)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    Path(args.out).write_bytes(save_checkpoint(model))
    print(json.dumps({
        "samples": len(samples),
        "label_s": round(labelled, 1),
        "total_s": round(time.perf_counter() - start, 1),
        "best_epoch": history.best_epoch,
        "epochs_run": history.epochs_run,
        "val_accuracy": history.val_accuracy[history.best_epoch],
    }))


if __name__ == "__main__":
    main()
