import json
from pathlib import Path

import numpy as np
import pytest

from tabsynbench.exceptions import ConfigError, NoCheckpoints
from tabsynbench.runner import (
    BenchConfig,
    DatasetConfig,
    RESULTS_HEADER,
    build_score_block,
    load_results,
    plan_runs,
    report,
    run_benchmark,
    run_id_for,
    select_checkpoint,
)
from tabsynbench.tabular import Table, split_indices
from tabsynbench.toy import make_correlated_table

VERDICTS = {"", "++", "+", "0", "-", "--"}


def write_dataset(tmp_path: Path, n=120, seed=0) -> DatasetConfig:
    table = make_correlated_table(n, seed=seed)
    csv_path = tmp_path / "toy.csv"
    schema_path = tmp_path / "toy.schema.json"
    table.save_csv(csv_path)
    table.schema.save(schema_path)
    return DatasetConfig("toy", str(csv_path), str(schema_path))


def tiny_config(tmp_path: Path, **kw) -> BenchConfig:
    params = dict(
        datasets=(write_dataset(tmp_path),),
        models=("gan", "independent"),
        loss_grid=((0, 0), (1, 1)),
        seeds=(0,),
        output_dir=str(tmp_path / "out"),
        epochs=2,
        batch_size=16,
        hidden_dims=(8, 8),
        latent_dim=4,
    )
    params.update(kw)
    return BenchConfig(**params)


class TestConfig:
    def test_run_id_labels(self):
        assert run_id_for("ds", "gan", 1, 0, 3) == "ds|gan|c1m0|s3"
        assert run_id_for("ds", "vae", 0, 1, 2) == "ds|vae|c0m1|s2"
        assert run_id_for("ds", "independent", None, None, 3) \
            == "ds|independent|s3"

    def test_plan_counts_and_grid_skip(self, tmp_path):
        cfg = tiny_config(tmp_path, seeds=(0, 1),
                          loss_grid=((0, 0), (0, 1), (1, 0), (1, 1)))
        jobs = plan_runs(cfg)
        # gan: 4 configs x 2 seeds; independent ignores the grid: 2 seeds
        assert len(jobs) == 10
        independent = [j for j in jobs if j["model"] == "independent"]
        assert len(independent) == 2
        assert all(j["alpha"] is None and j["beta"] is None
                   for j in independent)

    def test_plan_is_deterministic(self, tmp_path):
        cfg = tiny_config(tmp_path, seeds=(0, 1))
        assert [j["run_id"] for j in plan_runs(cfg)] \
            == [j["run_id"] for j in plan_runs(cfg)]

    @pytest.mark.parametrize("override", [
        dict(models=("gan", "diffusion")),
        dict(loss_grid=((0, 2),)),
        dict(loss_grid=((0, 0), (0, 0))),
        dict(seeds=()),
        dict(train_fraction=1.0),
    ])
    def test_invalid_configs(self, tmp_path, override):
        with pytest.raises(ConfigError):
            tiny_config(tmp_path, **override)

    def test_from_json_defaults(self, tmp_path):
        ds = write_dataset(tmp_path)
        doc = {"datasets": [{"name": "toy", "csv": "toy.csv",
                             "schema": "toy.schema.json"}],
               "models": ["gan"], "seeds": [0], "output_dir": "out"}
        cfg = BenchConfig.from_json(doc, base_dir=tmp_path)
        assert cfg.loss_grid == ((0, 0), (0, 1), (1, 0), (1, 1))
        assert cfg.epochs == 300 and cfg.batch_size == 128
        assert cfg.datasets[0].csv_path == ds.csv_path

    def test_from_json_missing_key(self):
        with pytest.raises(ConfigError):
            BenchConfig.from_json({"models": ["gan"]})


class StubSampler:
    def __init__(self, table):
        self._table = table

    def sample(self, n, seed):
        return self._table


class StubGenerator:
    def __init__(self, tables):
        self._tables = tables

    def sampler_from_snapshot(self, cp):
        epoch, _ = cp
        return StubSampler(self._tables[epoch])


class TestCheckpointSelection:
    def make_fixture(self):
        holdout = make_correlated_table(60, seed=0)
        bad = make_correlated_table(60, seed=99)
        bad = Table(holdout.schema, bad.rows)
        gen = StubGenerator({0: bad, 5: holdout, 9: bad})
        checkpoints = [(0, None), (5, None), (9, None)]
        return gen, checkpoints, holdout

    def test_last_policy(self):
        gen, checkpoints, holdout = self.make_fixture()
        assert select_checkpoint(gen, checkpoints, "last", holdout, 0) \
            == checkpoints[-1]

    def test_best_statistical_argmin(self):
        gen, checkpoints, holdout = self.make_fixture()
        # the epoch-5 snapshot reproduces the holdout exactly (score 0)
        assert select_checkpoint(gen, checkpoints, "best_statistical",
                                 holdout, 0) == checkpoints[1]

    def test_no_checkpoints(self):
        _, _, holdout = self.make_fixture()
        with pytest.raises(NoCheckpoints):
            select_checkpoint(StubGenerator({}), [], "last", holdout, 0)

    def test_unknown_policy(self):
        gen, checkpoints, holdout = self.make_fixture()
        with pytest.raises(ConfigError):
            select_checkpoint(gen, checkpoints, "median", holdout, 0)


class TestSplitAudit:
    def test_disjoint_and_exhaustive(self):
        table = make_correlated_table(100, seed=0)
        for seed in range(5):
            train, test = split_indices(table, 0.8, seed)
            assert not set(train) & set(test)
            assert sorted(train + test) == list(range(100))


@pytest.fixture(scope="module")
def bench_out(tmp_path_factory):
    tmp_path = tmp_path_factory.mktemp("bench")
    cfg = tiny_config(tmp_path)
    out = run_benchmark(cfg)
    return cfg, out


class TestBenchmarkRun:
    def test_outputs_exist(self, bench_out):
        _, out = bench_out
        assert (out / "results.csv").exists()
        assert (out / "manifest.json").exists()

    def test_manifest_all_done(self, bench_out):
        cfg, out = bench_out
        manifest = json.loads((out / "manifest.json").read_text())
        statuses = {k: v["status"] for k, v in manifest["runs"].items()}
        assert set(statuses) == {j["run_id"] for j in plan_runs(cfg)}
        assert set(statuses.values()) == {"done"}

    def test_results_shape(self, bench_out):
        _, out = bench_out
        rows = load_results(out)
        assert list(rows[0].keys()) == RESULTS_HEADER
        assert {r["checkpoint"] for r in rows} == {"last", "optimal"}
        assert {r["evaluation"] for r in rows} \
            == {"stat", "trtr", "tstr", "aug"}
        gan_rows = [r for r in rows if r["model"] == "gan"]
        assert {(r["alpha"], r["beta"]) for r in gan_rows} \
            == {("0", "0"), ("1", "1")}
        ind_rows = [r for r in rows if r["model"] == "independent"]
        assert all(r["alpha"] == "" and r["beta"] == "" for r in ind_rows)

    def test_orientations(self, bench_out):
        _, out = bench_out
        for row in load_results(out):
            name = row["metric"].rsplit(".", 1)[-1]
            expected = "lower" if name in {"kl", "chi_square_stat", "ks_stat",
                                           "dwp", "correlation_diff",
                                           "mae", "mse"} else "higher"
            assert row["orientation"] == expected

    def test_values_parse_as_float(self, bench_out):
        _, out = bench_out
        for row in load_results(out):
            assert np.isfinite(float(row["value"])) or \
                np.isnan(float(row["value"]))

    def test_resume_skips_done_runs(self, bench_out):
        cfg, out = bench_out
        before = (out / "results.csv").read_bytes()
        run_benchmark(cfg, resume=True)
        assert (out / "results.csv").read_bytes() == before

    def test_fresh_rerun_byte_identical(self, bench_out, tmp_path):
        cfg, out = bench_out
        other = tiny_config(Path(cfg.datasets[0].csv_path).parent,
                            output_dir=str(tmp_path / "out2"))
        out2 = run_benchmark(other)
        assert (out / "results.csv").read_bytes() \
            == (out2 / "results.csv").read_bytes()


class TestReporting:
    def test_score_block_algorithms(self, bench_out):
        _, out = bench_out
        block = build_score_block(load_results(out), "stat", "last")
        assert block is not None
        assert block.algorithms == ("c0m0", "c1m1")

    def test_comp_unions_evaluations(self, bench_out):
        _, out = bench_out
        rows = load_results(out)
        comp = build_score_block(rows, "comp", "last")
        stat = build_score_block(rows, "stat", "last")
        assert len(comp.measurements) > len(stat.measurements)

    @pytest.mark.parametrize("grouping", ["overall", "dataset", "model"])
    def test_report_files(self, bench_out, grouping):
        _, out = bench_out
        path = report(out, grouping, "last")
        assert path.name == f"report_{grouping}_last.md"
        text = path.read_text()
        for section in ("### tstr", "### aug", "### stat", "### comp"):
            assert section in text

    def test_report_verdict_symbols(self, bench_out):
        _, out = bench_out
        text = report(out, "overall", "last").read_text()
        checked = 0
        for line in text.splitlines():
            cells = [c.strip() for c in line.split("|")[1:-1]]
            if len(cells) < 2 or cells[0] not in ("c0m0", "c1m1"):
                continue
            checked += 1
            assert all(c in VERDICTS for c in cells[1:]), line
        assert checked > 0

    def test_report_bad_arguments(self, bench_out):
        _, out = bench_out
        with pytest.raises(ConfigError):
            report(out, "by_seed", "last")
        with pytest.raises(ConfigError):
            report(out, "overall", "first")
