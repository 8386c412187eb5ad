"""Benchmark driver: exact vs 2-approximation vs guided search on a dataset manifest."""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import logging
import os
import time
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .approx import two_approximation
from .exact import DEFAULT_TERMINAL_LIMIT, exact_solve
from .gnn import SEGNN, load_checkpoint, save_checkpoint
from .graph import SteinerInstance, Weight, validate_solution
from .heuristics import default_heuristic
from .io import load_instance
from .mcts import GuidedSearch, default_simulations

log = logging.getLogger(__name__)

JOBS_ENV = "STEINER_MCTS_JOBS"
CSV_COLUMNS = ("instance_id", "opt", "approx", "mcts", "t_opt_ms", "t_approx_ms", "t_mcts_ms")
PROFILES = {
    "smoke": {"instances": 10, "simulations": 50},
    "paper-mini": {"instances": 40, "simulations": 800},
    # every instance at full budgets (800 / 1200 by size); too slow for routine runs on I160
    "stretch": {"instances": None, "simulations": None},
}


class ResultInvariantError(AssertionError):
    pass


@dataclass
class BenchConfig:
    profile: str = "smoke"
    simulations: int | None = None
    heuristic: str | None = None
    max_instances: int | None = None
    exact_limit: int = DEFAULT_TERMINAL_LIMIT
    jobs: int = 1
    seed: int = 0
    timing: bool = True

    def __post_init__(self):
        if self.profile not in PROFILES:
            raise ValueError(f"unknown profile {self.profile!r}; choose from {sorted(PROFILES)}")

    def budget(self, n: int) -> int:
        if self.simulations is not None:
            return self.simulations
        return PROFILES[self.profile]["simulations"] or default_simulations(n)

    def instance_cap(self) -> int | None:
        if self.max_instances is not None:
            return self.max_instances
        return PROFILES[self.profile]["instances"]

    def fingerprint(self, checkpoint: bytes) -> str:
        h = hashlib.sha256(json.dumps(dataclasses.asdict(self), sort_keys=True).encode())
        h.update(checkpoint)
        return h.hexdigest()[:16]


@dataclass
class ExperimentResult:
    instance_id: str
    opt_cost: Weight | None
    approx_cost: Weight
    mcts_cost: Weight
    runtimes_ms: dict[str, float | None] = field(default_factory=dict)
    seed: int = 0
    fingerprint: str = ""

    def check(self) -> None:
        o, m, a = self.opt_cost, self.mcts_cost, self.approx_cost
        if not m <= a:
            raise ResultInvariantError(f"{self.instance_id}: mcts {m} > approx {a}")
        if o is not None and not (o <= m and a <= 2 * o):
            raise ResultInvariantError(f"{self.instance_id}: violates opt <= mcts <= approx <= 2 opt ({o}, {m}, {a})")


def load_manifest(path: str | Path) -> list[SteinerInstance]:
    """Instances listed in a manifest written by ``generate`` (``file`` paths are relative)."""
    path = Path(path)
    data = json.loads(path.read_text())
    return [load_instance(path.parent / entry["file"]) for entry in data["instances"]]


def _fresh(instance: SteinerInstance) -> SteinerInstance:
    # a copy without cached shortest paths so every solver pays for its own
    return dataclasses.replace(instance)


def _timed(fn: Callable, *args):
    start = time.perf_counter()
    out = fn(*args)
    return out, (time.perf_counter() - start) * 1000.0


def solve_instance(instance: SteinerInstance, model: SEGNN, config: BenchConfig, fingerprint: str = "") -> ExperimentResult:
    approx, t_approx = _timed(two_approximation, _fresh(instance))
    validate_solution(instance, approx)
    opt, t_opt = None, None
    if len(instance.terminals) <= config.exact_limit:
        tree, t_opt = _timed(exact_solve, _fresh(instance), config.exact_limit)
        opt = validate_solution(instance, tree)
    heuristic = config.heuristic or default_heuristic(instance)
    search = GuidedSearch(_fresh(instance), model, heuristic, config.budget(instance.n))
    found, t_mcts = _timed(lambda: search.run().tree)
    mcts = validate_solution(instance, found)
    result = ExperimentResult(
        instance.id, opt, approx.cost, mcts,
        {"opt": t_opt, "approx": t_approx, "mcts": t_mcts},
        config.seed, fingerprint,
    )
    result.check()
    return result


_worker_model: SEGNN | None = None


def _init_worker(payload: bytes) -> None:
    global _worker_model
    _worker_model = load_checkpoint(payload)


def _work(args):
    instance, config, fingerprint = args
    return solve_instance(instance, _worker_model, config, fingerprint)


def resolve_jobs(requested: int) -> int:
    env = os.environ.get(JOBS_ENV)
    return max(1, int(env) if env else requested)


def run_experiment(instances: Sequence[SteinerInstance], model: SEGNN, config: BenchConfig) -> list[ExperimentResult]:
    """Solve every instance with all three methods; rows come back in input order."""
    cap = config.instance_cap()
    instances = list(instances)[:cap] if cap is not None else list(instances)
    if not instances:
        return []
    trained_n = model.config.node_size
    sizes = {inst.n for inst in instances}
    if trained_n is not None and sizes != {trained_n}:
        log.warning("model trained on %d-node graphs used on sizes %s", trained_n, sorted(sizes))
    payload = save_checkpoint(model)
    fingerprint = config.fingerprint(payload)
    jobs = resolve_jobs(config.jobs)
    if jobs == 1:
        return [solve_instance(inst, model, config, fingerprint) for inst in instances]
    with ProcessPoolExecutor(jobs, initializer=_init_worker, initargs=(payload,)) as pool:
        return list(pool.map(_work, [(inst, config, fingerprint) for inst in instances]))


# -- reporting ---------------------------------------------------------------


def _fmt_cost(c) -> str:
    if c is None:
        return ""
    return str(c)


def _fmt_ms(t, timing: bool) -> str:
    return "" if t is None or not timing else f"{t:.3f}"


def results_csv(results: Sequence[ExperimentResult], timing: bool = True) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in results:
        rt = r.runtimes_ms
        writer.writerow([
            r.instance_id, _fmt_cost(r.opt_cost), _fmt_cost(r.approx_cost), _fmt_cost(r.mcts_cost),
            _fmt_ms(rt.get("opt"), timing), _fmt_ms(rt.get("approx"), timing), _fmt_ms(rt.get("mcts"), timing),
        ])
    return buf.getvalue()


def _mean(xs):
    xs = list(xs)
    return sum(xs) / len(xs) if xs else None


def summarize(results: Sequence[ExperimentResult]) -> dict:
    with_opt = [r for r in results if r.opt_cost is not None]
    suboptimal = [r for r in with_opt if r.approx_cost > r.opt_cost]

    def ratio(a, b):
        return float(Fraction(a) / Fraction(b))

    def mean_runtime(key):
        vals = [r.runtimes_ms.get(key) for r in results if r.runtimes_ms.get(key) is not None]
        m = _mean(vals)
        return None if m is None else m / 1000.0

    return {
        "instances": len(results),
        "instances_with_opt": len(with_opt),
        "mean_mcts_over_opt": _mean(ratio(r.mcts_cost, r.opt_cost) for r in with_opt),
        "mean_approx_over_opt": _mean(ratio(r.approx_cost, r.opt_cost) for r in with_opt),
        "mean_mcts_over_approx": _mean(ratio(r.mcts_cost, r.approx_cost) for r in results),
        "mcts_beats_approx": sum(r.mcts_cost < r.approx_cost for r in results),
        "mcts_optimal": sum(r.mcts_cost == r.opt_cost for r in with_opt),
        "approx_optimal": sum(r.approx_cost == r.opt_cost for r in with_opt),
        "approx_suboptimal": len(suboptimal),
        "mcts_beats_suboptimal_approx": sum(r.mcts_cost < r.approx_cost for r in suboptimal),
        "mean_runtime_s": {
            "2-apprx": mean_runtime("approx"),
            "MCTS": mean_runtime("mcts"),
            "OPT": mean_runtime("opt"),
        },
    }


def runtime_table(summaries: dict[str, dict]) -> str:
    """Average running time in seconds, one column per dataset, one row per algorithm."""
    names = list(summaries)
    lines = ["| Graphs/Algorithms | " + " | ".join(names) + " |", "|---" * (len(names) + 1) + "|"]
    for algo in ("2-apprx", "MCTS", "OPT"):
        cells = []
        for name in names:
            v = summaries[name]["mean_runtime_s"][algo]
            cells.append("n/a" if v is None else f"{v:.2f}")
        lines.append(f"| {algo} | " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def scatter_series(results: Sequence[ExperimentResult]) -> dict:
    return {
        "index": list(range(len(results))),
        "instance_id": [r.instance_id for r in results],
        "opt": [None if r.opt_cost is None else float(r.opt_cost) for r in results],
        "approx": [float(r.approx_cost) for r in results],
        "mcts": [float(r.mcts_cost) for r in results],
    }


def _write_svg(series: dict, path: Path, title: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "steiner-mcts"
    fig, ax = plt.subplots(figsize=(6, 4))
    x = series["index"]
    opt = [(i, c) for i, c in zip(x, series["opt"]) if c is not None]
    if opt:
        ax.scatter(*zip(*opt), marker="^", color="green", label="OPT")
    ax.scatter(x, series["mcts"], marker="s", color="gold", label="MCTS")
    ax.scatter(x, series["approx"], marker="o", facecolors="none", edgecolors="blue", label="2-approx")
    ax.set_xlabel("instance")
    ax.set_ylabel("cost")
    ax.set_title(title)
    ax.legend()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def emit_report(results: Sequence[ExperimentResult], out_dir: str | Path, timing: bool = True,
                svg: bool = False, title: str = "") -> dict:
    """Write results.csv, summary.json, scatter.json (and scatter.svg); return the summary."""
    if not results:
        raise ValueError("no results to report")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "results.csv").write_text(results_csv(results, timing))
    summary = summarize(results)
    if not timing:
        summary["mean_runtime_s"] = {k: None for k in summary["mean_runtime_s"]}
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    series = scatter_series(results)
    (out / "scatter.json").write_text(json.dumps(series) + "\n")
    if svg:
        _write_svg(series, out / "scatter.svg", title)
    return summary
