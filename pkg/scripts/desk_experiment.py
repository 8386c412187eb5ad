"""Desk-scale benchmark: exact vs 2-approximation vs guided search on several datasets.

Trains one checkpoint per 20-node family (or loads it from --ckpt-dir), benches
each dataset and prints a runtime table in seconds. Reports go to --out-dir.

    python3 scripts/desk_experiment.py --out-dir runs/desk
"""

import argparse
import json
import time
from pathlib import Path

from steiner_mcts.bench import BenchConfig, emit_report, run_experiment, runtime_table
from steiner_mcts.generators import make_dataset
from steiner_mcts.gnn import SEGNN, ModelConfig, load_checkpoint, save_checkpoint
from steiner_mcts.training import label_instances, train

# name -> (model, n, count, terminal spec, weighted, data seed, checkpoint family)
DATASETS = {
    "GE20": ("geometric", 20, 40, 10, False, 7, "geometric"),
    "ER20": ("erdos_renyi", 20, 20, 10, False, 7, "erdos_renyi"),
    "WS20": ("watts_strogatz", 20, 20, 10, False, 7, "watts_strogatz"),
    "BA20": ("barabasi_albert", 20, 20, 10, False, 7, "barabasi_albert"),
    "ER50w": ("erdos_renyi", 50, 40, [0.03, 0.06, 0.09, 0.12, 0.15, 0.18], True, 5, "erdos_renyi"),
}


def checkpoint(family: str, ckpt_dir: Path, train_count: int) -> SEGNN:
    path = ckpt_dir / f"{family}20.npz"
    if path.exists():
        return load_checkpoint(path.read_bytes())
    instances, _ = make_dataset(family, 20, train_count, 10, 1, weighted=False)
    model, _ = train(SEGNN(ModelConfig(seed=0, node_size=20)), label_instances(instances, 20, 0), instances,
                     max_epochs=100, seed=0)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(save_checkpoint(model))
    return model


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="runs/desk")
    ap.add_argument("--ckpt-dir", default="runs/checkpoints")
    ap.add_argument("--train-count", type=int, default=200)
    ap.add_argument("--datasets", nargs="*", default=list(DATASETS), choices=list(DATASETS))
    ap.add_argument("--profile", default="paper-mini")
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--svg", action="store_true")
    args = ap.parse_args()

    out = Path(args.out_dir)
    summaries = {}
    for name in args.datasets:
        model_name, n, count, spec, weighted, seed, family = DATASETS[name]
        model = checkpoint(family, Path(args.ckpt_dir), args.train_count)
        instances, _ = make_dataset(model_name, n, count, spec, seed, weighted)
        start = time.perf_counter()
        results = run_experiment(instances, model, BenchConfig(profile=args.profile, jobs=args.jobs))
        summaries[name] = emit_report(results, out / name, svg=args.svg, title=name)
        s = summaries[name]
        print(f"{name}: {len(results)} instances in {time.perf_counter() - start:.0f}s, "
              f"mcts/opt {s['mean_mcts_over_opt']}, approx/opt {s['mean_approx_over_opt']}, "
              f"mcts optimal {s['mcts_optimal']}/{s['instances_with_opt']}")
    table = runtime_table(summaries)
    (out / "runtime_table.md").write_text(table)
    (out / "summaries.json").write_text(json.dumps(summaries, indent=2) + "\n")
    print(table)


if __name__ == "__main__":
    main()
