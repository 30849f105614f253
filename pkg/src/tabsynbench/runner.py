"""Benchmark orchestration: train generators per loss configuration, evaluate
statistical similarity / TSTR / augmentation, persist long-format results,
and turn them into significance reports.

Everything is resumable: completed run ids recorded in ``manifest.json`` are
skipped on restart, and all randomness derives from config seeds, so a full
run is reproducible byte for byte.
"""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .efficacy import Learner, default_learners, run_augmentation, run_tstr
from .exceptions import ConfigError, InsufficientData, NoCheckpoints
from .generators import GanGenerator, IndependentGenerator, VaeGenerator
from .rankstats import (
    HIGHER,
    LOWER,
    ScoreBlock,
    SignificanceTable,
    significance_table,
)
from .similarity import (
    chi_square_columns,
    correlation_diff_score,
    dwp,
    ks_columns,
    similarity_suite,
)
from .tabular import (
    CLASSIFICATION,
    Table,
    TableSchema,
    infer_schema,
    load_csv,
    split_indices,
)

RESULTS_HEADER = ["dataset", "model", "alpha", "beta", "seed", "checkpoint",
                  "evaluation", "metric", "column_or_pair", "value",
                  "orientation"]

LOWER_BETTER_METRICS = {"kl", "chi_square_stat", "ks_stat", "dwp",
                        "correlation_diff", "mae", "mse"}

MODELS = ("gan", "vae", "independent")
CHECKPOINT_TAGS = ("last", "optimal")


@dataclass(frozen=True)
class DatasetConfig:
    name: str
    csv_path: str
    schema_path: str | None = None
    infer_threshold: int = 20
    target: str | None = None
    task: str = "none"

    def load(self) -> Table:
        if self.schema_path:
            schema = TableSchema.load(self.schema_path)
        else:
            schema = infer_schema(self.csv_path, self.infer_threshold,
                                  target=self.target, task=self.task)
        return load_csv(self.csv_path, schema)


@dataclass(frozen=True)
class BenchConfig:
    datasets: tuple[DatasetConfig, ...]
    models: tuple[str, ...]
    loss_grid: tuple[tuple[int, int], ...]
    seeds: tuple[int, ...]
    output_dir: str
    train_fraction: float = 0.8
    synth_rows: int | None = None  # None -> |real_train|
    epochs: int = 300
    batch_size: int = 128
    hidden_dims: tuple[int, ...] = (64, 64)
    latent_dim: int = 32

    def __post_init__(self):
        if not self.datasets or not self.models or not self.seeds:
            raise ConfigError("datasets, models, and seeds must be non-empty")
        for m in self.models:
            if m not in MODELS:
                raise ConfigError(f"unknown model {m!r}")
        if len(set(self.loss_grid)) != len(self.loss_grid):
            raise ConfigError("loss_grid entries must be distinct")
        for a, b in self.loss_grid:
            if a not in (0, 1) or b not in (0, 1):
                raise ConfigError("loss_grid entries must be binary pairs")
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError("train_fraction must be in (0, 1)")

    @classmethod
    def from_json(cls, doc: dict, base_dir: Path | None = None) -> "BenchConfig":
        def resolve(p):
            if p is None:
                return None
            path = Path(p)
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            return str(path)

        try:
            datasets = tuple(
                DatasetConfig(
                    name=d["name"],
                    csv_path=resolve(d["csv"]),
                    schema_path=resolve(d.get("schema")),
                    infer_threshold=d.get("infer_threshold", 20),
                    target=d.get("target"),
                    task=d.get("task", "none"),
                )
                for d in doc["datasets"]
            )
            return cls(
                datasets=datasets,
                models=tuple(doc["models"]),
                loss_grid=tuple((int(a), int(b))
                                for a, b in doc.get("loss_grid",
                                                    [[0, 0], [0, 1],
                                                     [1, 0], [1, 1]])),
                seeds=tuple(int(s) for s in doc["seeds"]),
                output_dir=resolve(doc["output_dir"]),
                train_fraction=float(doc.get("train_fraction", 0.8)),
                synth_rows=doc.get("synth_rows"),
                epochs=int(doc.get("epochs", 300)),
                batch_size=int(doc.get("batch_size", 128)),
                hidden_dims=tuple(doc.get("hidden_dims", [64, 64])),
                latent_dim=int(doc.get("latent_dim", 32)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid benchmark config: {exc}") from exc

    @classmethod
    def load(cls, path) -> "BenchConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh), base_dir=Path(path).parent)


@dataclass
class RunRecord:
    run_id: str
    status: str  # pending | done | failed
    reason: str = ""
    wall_time: float = 0.0


def run_id_for(dataset: str, model: str, alpha, beta, seed: int) -> str:
    if model == "independent":
        return f"{dataset}|independent|s{seed}"
    return f"{dataset}|{model}|c{alpha}m{beta}|s{seed}"


def plan_runs(cfg: BenchConfig) -> list[dict]:
    """Deterministic job list; independent models ignore the loss grid."""
    jobs = []
    for ds in cfg.datasets:
        for model in cfg.models:
            if model == "independent":
                grid = [(None, None)]
            else:
                grid = list(cfg.loss_grid)
            for alpha, beta in grid:
                for seed in cfg.seeds:
                    jobs.append({
                        "run_id": run_id_for(ds.name, model, alpha, beta, seed),
                        "dataset": ds,
                        "model": model,
                        "alpha": alpha,
                        "beta": beta,
                        "seed": seed,
                    })
    return jobs


def _statistical_score(real_holdout: Table, synth: Table) -> float:
    """Unweighted mean of per-column KS/chi-square, DWP, correlation diff."""
    parts = []
    for i, spec in enumerate(real_holdout.schema.columns):
        if spec.is_categorical:
            stat, _ = chi_square_columns(real_holdout, synth, i)
        else:
            stat, _ = ks_columns(real_holdout, synth, i)
        parts.append(stat)
    parts.append(dwp(real_holdout, synth))
    parts.append(correlation_diff_score(real_holdout, synth))
    return float(np.mean(parts))


def select_checkpoint(generator, checkpoints, policy: str,
                      holdout: Table, seed: int):
    """Pick a generator snapshot: final epoch or best statistical score."""
    if not checkpoints:
        raise NoCheckpoints("training saved no checkpoints")
    if policy == "last":
        return checkpoints[-1]
    if policy != "best_statistical":
        raise ConfigError(f"unknown checkpoint policy {policy!r}")
    best = None
    best_score = None
    for cp in checkpoints:
        sampler = generator.sampler_from_snapshot(cp)
        synth = sampler.sample(max(len(holdout), 2), seed)
        score = _statistical_score(holdout, synth)
        if best_score is None or score < best_score:
            best, best_score = cp, score
    return best


def _orientation(metric: str) -> str:
    # efficacy metrics are namespaced as "<learner>.<name>"
    name = metric.rsplit(".", 1)[-1]
    return LOWER if name in LOWER_BETTER_METRICS else HIGHER


def _metric_rows(base: dict, evaluation: str,
                 metrics: dict[str, float]) -> list[list]:
    rows = []
    for key, value in metrics.items():
        if ":" in key:
            metric, pair = key.split(":", 1)
        else:
            metric, pair = key, ""
        rows.append([base["dataset"], base["model"],
                     "" if base["alpha"] is None else base["alpha"],
                     "" if base["beta"] is None else base["beta"],
                     base["seed"], base["checkpoint"], evaluation,
                     metric, pair, repr(float(value)), _orientation(metric)])
    return rows


def execute_run(job: dict, cfg: BenchConfig) -> tuple[RunRecord, list[list]]:
    start = time.monotonic()
    run_id = job["run_id"]
    try:
        rows = _execute_run_inner(job, cfg)
    except Exception as exc:  # isolate per-run failures
        return RunRecord(run_id, "failed", f"{type(exc).__name__}: {exc}",
                         time.monotonic() - start), []
    return RunRecord(run_id, "done", "", time.monotonic() - start), rows


def _execute_run_inner(job: dict, cfg: BenchConfig) -> list[list]:
    ds: DatasetConfig = job["dataset"]
    table = ds.load()
    seed = job["seed"]
    train_idx, test_idx = split_indices(table, cfg.train_fraction, seed)
    if set(train_idx) & set(test_idx):
        raise AssertionError("leakage: train/test index overlap")
    real_train = table.subset(train_idx)
    real_test = table.subset(test_idx)

    model = job["model"]
    alpha, beta = job["alpha"], job["beta"]
    checkpoint_every = max(1, cfg.epochs // 10)
    batch_size = min(cfg.batch_size, max(2, len(real_train) // 2))

    if model == "gan":
        gen = GanGenerator(latent_dim=cfg.latent_dim,
                           generator_dims=cfg.hidden_dims,
                           discriminator_dims=cfg.hidden_dims,
                           batch_size=batch_size, epochs=cfg.epochs,
                           alpha=alpha, beta=beta, seed=seed,
                           checkpoint_every=checkpoint_every)
    elif model == "vae":
        gen = VaeGenerator(latent_dim=min(cfg.latent_dim, 16),
                           encoder_dims=cfg.hidden_dims,
                           decoder_dims=cfg.hidden_dims,
                           batch_size=batch_size, epochs=cfg.epochs,
                           alpha=alpha, beta=beta, seed=seed,
                           checkpoint_every=checkpoint_every)
    else:
        gen = IndependentGenerator(seed=seed)
    gen.fit(real_train)

    n_synth = cfg.synth_rows or len(real_train)
    learners = default_learners(table.schema.task) \
        if table.schema.task in (CLASSIFICATION, "regression") else []

    # a 10% slice of training rows scores checkpoints, per the optimal policy
    n_holdout = max(2, len(real_train) // 10)
    holdout = real_train.subset(range(len(real_train) - n_holdout,
                                      len(real_train)))

    rows: list[list] = []
    base = {"dataset": ds.name, "model": model, "alpha": alpha, "beta": beta,
            "seed": seed}
    for tag in CHECKPOINT_TAGS:
        if model == "independent":
            sampler = gen._fitted
        else:
            policy = "last" if tag == "last" else "best_statistical"
            snapshot = select_checkpoint(gen, gen.checkpoints_, policy,
                                         holdout, seed)
            sampler = gen.sampler_from_snapshot(snapshot)
        synth = sampler.sample(n_synth, seed)
        base_tagged = dict(base, checkpoint=tag)

        rows.extend(_metric_rows(base_tagged, "stat",
                                 similarity_suite(real_train, synth)))
        for report in run_tstr(real_train, synth, real_test, learners, seed):
            rows.extend(_metric_rows(
                base_tagged, report.protocol,
                {f"{report.learner}.{k}": v
                 for k, v in report.scores.items()}))
        for report in run_augmentation(real_train, synth, real_test,
                                       learners, seed):
            if report.protocol == "trtr":
                continue  # already recorded by the TSTR pass
            rows.extend(_metric_rows(
                base_tagged, "aug",
                {f"{report.learner}.{k}": v
                 for k, v in report.scores.items()}))
    return rows


class _Manifest:
    def __init__(self, path: Path):
        self.path = path
        self.runs: dict[str, dict] = {}
        if path.exists():
            with open(path, encoding="utf-8") as fh:
                self.runs = json.load(fh).get("runs", {})

    def done(self, run_id: str) -> bool:
        return self.runs.get(run_id, {}).get("status") == "done"

    def record(self, record: RunRecord) -> None:
        self.runs[record.run_id] = {
            "status": record.status,
            "reason": record.reason,
            "wall_time": round(record.wall_time, 3),
        }
        with open(self.path, "w", encoding="utf-8") as fh:
            json.dump({"runs": self.runs}, fh, indent=2, sort_keys=True)


def run_benchmark(cfg: BenchConfig, resume: bool = False,
                  workers: int = 1) -> Path:
    """Execute all planned runs; returns the output directory."""
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    results_path = out / "results.csv"
    manifest = _Manifest(out / "manifest.json")
    if not resume and results_path.exists():
        results_path.unlink()
        manifest.runs = {}

    new_file = not results_path.exists()
    jobs = [j for j in plan_runs(cfg)
            if not (resume and manifest.done(j["run_id"]))]

    with open(results_path, "a", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if new_file:
            writer.writerow(RESULTS_HEADER)
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                outcomes = list(pool.map(_run_job, [(j, cfg) for j in jobs]))
        else:
            outcomes = [execute_run(j, cfg) for j in jobs]
        for record, rows in outcomes:
            for row in rows:
                writer.writerow(row)
            manifest.record(record)
    return out


def _run_job(args):
    return execute_run(*args)


# ---------------------------------------------------------------------------
# reporting


def load_results(store_dir) -> list[dict]:
    path = Path(store_dir) / "results.csv"
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def _config_label(row: dict) -> str:
    return f"c{row['alpha']}m{row['beta']}"


def build_score_block(rows: list[dict], evaluation: str,
                      checkpoint: str) -> ScoreBlock | None:
    """Algorithms = loss configurations; one measurement per metric cell."""
    if evaluation == "comp":
        wanted = {"stat", "tstr", "aug"}
    else:
        wanted = {evaluation}
    cells: dict[tuple, dict[str, tuple[float, str]]] = {}
    for row in rows:
        if row["checkpoint"] != checkpoint or row["evaluation"] not in wanted:
            continue
        if row["alpha"] == "" or row["beta"] == "":
            continue  # independent baseline has no loss configuration
        cell = (row["dataset"], row["model"], row["seed"],
                row["evaluation"], row["metric"], row["column_or_pair"])
        cells.setdefault(cell, {})[_config_label(row)] = (
            float(row["value"]), row["orientation"])

    algorithms = sorted({label for by in cells.values() for label in by})
    if len(algorithms) < 2:
        return None
    measurements, values, orientations = [], [], []
    for cell in sorted(cells):
        by = cells[cell]
        if set(by) != set(algorithms):
            continue  # incomplete cells cannot be ranked
        orient = {by[a][1] for a in algorithms}
        if len(orient) != 1:
            continue
        measurements.append("|".join(cell))
        values.append([by[a][0] for a in algorithms])
        orientations.append(orient.pop())
    if len(measurements) < 2:
        return None
    return ScoreBlock(tuple(algorithms), tuple(measurements),
                      np.array(values), tuple(orientations))


def _distribution_summary(rows: list[dict], checkpoint: str) -> list[str]:
    by_key: dict[tuple, list[float]] = {}
    for row in rows:
        if row["checkpoint"] != checkpoint or row["alpha"] == "":
            continue
        key = (row["evaluation"], row["metric"], _config_label(row))
        by_key.setdefault(key, []).append(float(row["value"]))
    lines = ["| evaluation | metric | config | min | q1 | median | q3 | max |",
             "|---|---|---|---|---|---|---|---|"]
    for key in sorted(by_key):
        v = np.array(by_key[key])
        q = np.percentile(v, [0, 25, 50, 75, 100])
        lines.append("| " + " | ".join(key) + " | "
                     + " | ".join(f"{x:.4f}" for x in q) + " |")
    return lines


def report(store_dir, grouping: str = "overall", checkpoint: str = "last",
           tie_correction: bool = False) -> Path:
    """Write significance tables + distribution summaries as markdown."""
    if grouping not in ("overall", "dataset", "model"):
        raise ConfigError(f"unknown grouping {grouping!r}")
    if checkpoint not in CHECKPOINT_TAGS:
        raise ConfigError(f"unknown checkpoint {checkpoint!r}")
    rows = load_results(store_dir)
    if not rows:
        raise InsufficientData("results store is empty")

    if grouping == "overall":
        groups = {"overall": rows}
    else:
        key = "dataset" if grouping == "dataset" else "model"
        groups = {}
        for row in rows:
            if key == "model" and row["alpha"] == "":
                continue
            groups.setdefault(row[key], []).append(row)

    lines = [f"# Significance report ({grouping}, {checkpoint} checkpoint)", ""]
    for group_name in sorted(groups):
        lines.append(f"## {group_name}")
        lines.append("")
        for evaluation in ("tstr", "aug", "stat", "comp"):
            lines.append(f"### {evaluation}")
            block = build_score_block(groups[group_name], evaluation, checkpoint)
            if block is None:
                lines.append("_InsufficientData: fewer than 2 complete "
                             "measurement rows._")
                lines.append("")
                continue
            table = significance_table(block, tie_correction)
            lines.append(table.to_markdown())
            lines.append("")
    lines.append("## Metric distributions")
    lines.append("")
    lines.extend(_distribution_summary(rows, checkpoint))
    lines.append("")

    out_path = Path(store_dir) / f"report_{grouping}_{checkpoint}.md"
    out_path.write_text("\n".join(lines), encoding="utf-8")
    return out_path
