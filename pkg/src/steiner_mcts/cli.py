"""Command line entry point: ``steiner-mcts <subcommand>``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from . import bench
from .approx import two_approximation
from .exact import DEFAULT_TERMINAL_LIMIT, exact_solve
from .generators import MODELS, make_dataset
from .gnn import ModelConfig, SEGNN, load_checkpoint, save_checkpoint
from .heuristics import HEURISTICS
from .io import load_instance, save_instance, solution_to_dict
from .mcts import GuidedSearch
from .training import label_instances, read_samples, train, write_samples


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def cmd_generate(args) -> int:
    spec = args.terminals if args.fractions is None else [float(x) for x in args.fractions.split(",")]
    if spec is None:
        raise SystemExit("give --terminals or --fractions")
    instances, manifest = make_dataset(args.model, args.n, args.count, spec, args.seed, args.weighted)
    out = Path(args.out_dir)
    (out / "instances").mkdir(parents=True, exist_ok=True)
    for inst, entry in zip(instances, manifest["instances"]):
        rel = f"instances/{inst.id}.json"
        save_instance(inst, out / rel)
        entry["file"] = rel
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"wrote {len(instances)} instances to {out}")
    return 0


def _solve(args, solver) -> int:
    instance = load_instance(args.instance)
    start = time.perf_counter()
    tree = solver(instance)
    ms = (time.perf_counter() - start) * 1000.0
    _emit(solution_to_dict(tree, ms), args.out)
    return 0


def cmd_solve_exact(args) -> int:
    return _solve(args, lambda inst: exact_solve(inst, args.limit))


def cmd_solve_2approx(args) -> int:
    return _solve(args, two_approximation)


def cmd_solve_mcts(args) -> int:
    instance = load_instance(args.instance)
    model = load_checkpoint(Path(args.checkpoint).read_bytes())
    start = time.perf_counter()
    result = GuidedSearch(instance, model, args.heuristic, args.simulations).run(trace=args.trace)
    ms = (time.perf_counter() - start) * 1000.0
    extra = {"heuristic": args.heuristic, "seed": args.seed, "search_cost": str(result.search_cost)}
    if args.trace:
        extra["moves"] = [{k: (str(v) if k == "value" and v is not None else v) for k, v in m.items()}
                          for m in result.moves]
    _emit(solution_to_dict(result.tree, ms, **extra), args.out)
    return 0


def cmd_label(args) -> int:
    instances = bench.load_manifest(args.manifest)
    samples = label_instances(instances, args.k, args.seed)
    write_samples(samples, args.out)
    print(f"wrote {len(samples)} samples from {len(instances)} instances to {args.out}")
    return 0


def cmd_train(args) -> int:
    dataset = Path(args.dataset)
    manifest = Path(args.manifest) if args.manifest else dataset.parent / "manifest.json"
    instances = bench.load_manifest(manifest)
    samples = read_samples(dataset)
    sizes = {inst.n for inst in instances}
    config = ModelConfig(seed=args.seed, lr=args.lr, batch_size=args.batch_size, patience=args.patience,
                         hidden=args.hidden, node_size=sizes.pop() if len(sizes) == 1 else None)
    model, history = train(SEGNN(config), samples, instances, max_epochs=args.epochs, seed=args.seed)
    Path(args.out_checkpoint).write_bytes(save_checkpoint(model))
    print(json.dumps({"epochs_run": history.epochs_run, "best_epoch": history.best_epoch,
                      "best_val_loss": history.best_val_loss,
                      "val_accuracy": history.val_accuracy[history.best_epoch]}))
    return 0


def cmd_bench(args) -> int:
    instances = bench.load_manifest(args.manifest)
    model = load_checkpoint(Path(args.checkpoint).read_bytes())
    config = bench.BenchConfig(profile=args.profile, simulations=args.simulations, heuristic=args.heuristic,
                               jobs=args.jobs, seed=args.seed, timing=not args.no_timing,
                               max_instances=args.max_instances)
    results = bench.run_experiment(instances, model, config)
    if not results:
        print("no instances in manifest")
        return 0
    summary = bench.emit_report(results, args.out_dir, timing=config.timing, svg=args.svg,
                                title=Path(args.manifest).parent.name)
    print(json.dumps(summary, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="steiner-mcts", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write random instances and a manifest")
    p.add_argument("--model", choices=MODELS, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--terminals", type=int, help="fixed terminal count")
    p.add_argument("--fractions", help="comma separated terminal fractions cycled across instances")
    p.add_argument("--weighted", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_generate)

    for name, func in (("solve-exact", cmd_solve_exact), ("solve-2approx", cmd_solve_2approx)):
        p = sub.add_parser(name)
        p.add_argument("--instance", required=True, help="instance .json or .stp")
        p.add_argument("--out")
        if name == "solve-exact":
            p.add_argument("--limit", type=int, default=DEFAULT_TERMINAL_LIMIT)
        p.set_defaults(func=func)

    p = sub.add_parser("solve-mcts")
    p.add_argument("--instance", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--heuristic", choices=HEURISTICS)
    p.add_argument("--simulations", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace", action="store_true", help="include per-move statistics")
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve_mcts)

    p = sub.add_parser("label", help="solve instances exactly and write training samples (JSON lines)")
    p.add_argument("--manifest", required=True)
    p.add_argument("--k", type=int, default=20, help="permutations per instance")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("train")
    p.add_argument("--dataset", required=True, help="samples JSON lines")
    p.add_argument("--manifest", help="instance manifest (default: manifest.json next to the dataset)")
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--patience", type=int, default=15)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--hidden", type=int, default=128)
    p.add_argument("--out-checkpoint", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("bench")
    p.add_argument("--manifest", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--profile", choices=sorted(bench.PROFILES), default="smoke")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--jobs", type=int, default=1, help=f"worker processes (env {bench.JOBS_ENV} overrides)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--simulations", type=int)
    p.add_argument("--heuristic", choices=HEURISTICS)
    p.add_argument("--max-instances", type=int)
    p.add_argument("--no-timing", action="store_true", help="leave runtime columns empty (byte-stable CSV)")
    p.add_argument("--svg", action="store_true")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
