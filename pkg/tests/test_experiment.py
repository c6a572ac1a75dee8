"""End-to-end experiment runner behavior."""

import json

import numpy as np
import pytest

from truthval import (
    DvfSpec,
    GpHyper,
    build_char_table,
    take_rows,
)
from truthval.errors import ConfigurationError
from truthval.experiment import (
    ExperimentConfig,
    _conjugate_tables,
    _gp_tables,
    _materialize,
    emit_report,
    render_report,
    run_experiment,
)
from truthval.models import LinearRegressionModel


def bernoulli_config(**overrides):
    base = {
        "seed": 11,
        "repeats": 3,
        "model": {"family": "beta-bernoulli"},
        "sources": [
            {"generator": "bernoulli", "n_points": 10, "p": 0.7},
            {"generator": "bernoulli", "n_points": 6, "p": 0.4},
        ],
        "validation": {
            "generator": "bernoulli",
            "n_points": 16,
            "p": 0.7,
            "subset_fraction": 0.5,
        },
    }
    base.update(overrides)
    return ExperimentConfig.from_dict(base)


class TestConfigValidation:
    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigurationError, match="unknown config"):
            bernoulli_config(typo=1)

    def test_strategy_count_must_match_sources(self):
        with pytest.raises(ConfigurationError):
            bernoulli_config(strategies=["truthful"])

    def test_sweep_source_must_exist(self):
        with pytest.raises(ConfigurationError):
            bernoulli_config(
                sweep={"axis": "strategy-grid", "source": 5, "values": ["truthful"]}
            )

    def test_numeric_sweep_must_be_ordered(self):
        with pytest.raises(ConfigurationError, match="ascending"):
            bernoulli_config(
                sweep={"axis": "validation-noise", "values": [0.5, 0.1]}
            )

    def test_log_score_needs_validation_section(self):
        with pytest.raises(ConfigurationError, match="validation"):
            ExperimentConfig.from_dict(
                {
                    "model": {"family": "beta-bernoulli"},
                    "sources": [{"generator": "bernoulli", "n_points": 4}],
                }
            )

    def test_config_echo_round_trips_through_json(self):
        cfg = bernoulli_config()
        again = ExperimentConfig.from_dict(json.loads(json.dumps(cfg.resolved)))
        assert again.resolved == cfg.resolved


class TestFastPathsMatchGenericPath:
    """The runner's per-coalition shortcuts must agree with dvf_value tables."""

    def test_conjugate_tables(self):
        rng = np.random.default_rng(50)
        model = LinearRegressionModel(n_features=2, prior_var=0.8, noise_var=0.3)
        from truthval import Dataset

        submissions = [
            Dataset(rng.uniform(size=(5, 2)), rng.normal(size=5)) for _ in range(3)
        ]
        pool = Dataset(rng.uniform(size=(8, 2)), rng.normal(size=8))
        subsets = [np.array([0, 2, 5]), np.array([1, 3, 4, 6, 7])]
        fast = _conjugate_tables(model, submissions, pool, subsets, "log-score")
        for idx, values in zip(subsets, fast):
            spec = DvfSpec("log-score", model=model, validation=take_rows(pool, idx))
            slow = build_char_table(submissions, spec)
            np.testing.assert_allclose(values, slow.values, atol=1e-9)

    def test_gp_tables(self):
        rng = np.random.default_rng(51)
        model = GpHyper(lengthscales=0.8, signal_var=1.1, noise_var=0.2)
        from truthval import Dataset

        submissions = [
            Dataset(rng.uniform(size=(6, 2)), rng.normal(size=6)) for _ in range(2)
        ]
        pool = Dataset(rng.uniform(size=(7, 2)), rng.normal(size=7))
        subsets = [np.array([0, 1, 4]), np.array([2, 3, 5, 6])]
        fast = _gp_tables(model, submissions, pool, subsets, "log-score")
        for idx, values in zip(subsets, fast):
            spec = DvfSpec("log-score", model=model, validation=take_rows(pool, idx))
            slow = build_char_table(submissions, spec)
            np.testing.assert_allclose(values, slow.values, atol=1e-8)

    def test_gp_tables_mean_variant(self):
        rng = np.random.default_rng(52)
        model = GpHyper(noise_var=0.4)
        from truthval import Dataset

        submissions = [Dataset(rng.uniform(size=(4, 1)), rng.normal(size=4))]
        pool = Dataset(rng.uniform(size=(5, 1)), rng.normal(size=5))
        subsets = [np.array([0, 2, 3])]
        fast = _gp_tables(model, submissions, pool, subsets, "mean-log-score")
        spec = DvfSpec("mean-log-score", model=model, validation=take_rows(pool, subsets[0]))
        slow = build_char_table(submissions, spec)
        np.testing.assert_allclose(fast[0], slow.values, atol=1e-8)


class TestRunner:
    def test_single_source_reward_equals_value(self):
        cfg = ExperimentConfig.from_dict(
            {
                "seed": 2,
                "repeats": 2,
                "model": {"family": "beta-bernoulli"},
                "sources": [{"generator": "bernoulli", "n_points": 9, "p": 0.6}],
                "validation": {"generator": "bernoulli", "n_points": 10, "p": 0.6},
            }
        )
        report = run_experiment(cfg)
        for row in report.rows:
            assert row.reward == pytest.approx(row.value, abs=1e-12)

    def test_deterministic_across_runs_and_threads(self):
        base = bernoulli_config(repeats=4)
        threaded = bernoulli_config(repeats=4, threads=3)
        a, b, c = run_experiment(base), run_experiment(base), run_experiment(threaded)
        for other in (b, c):
            assert len(a.rows) == len(other.rows)
            for ra, rb in zip(a.rows, other.rows):
                assert (ra.value, ra.reward) == (rb.value, rb.reward)

    def test_report_bytes_identical_modulo_wall_time(self):
        cfg = bernoulli_config()
        a = json.loads(render_report(run_experiment(cfg), "json"))
        b = json.loads(render_report(run_experiment(cfg), "json"))
        a.pop("wall_time_s"), b.pop("wall_time_s")
        assert a == b

    def test_budget_post_processing_caps(self):
        report = run_experiment(
            bernoulli_config(post={"kind": "budget", "a": 1.0, "budget": 0.05})
        )
        assert all(row.reward <= 0.05 + 1e-12 for row in report.rows)

    def test_sampled_estimator_close_to_exact_here(self):
        exact = run_experiment(bernoulli_config(repeats=1))
        sampled = run_experiment(
            bernoulli_config(
                repeats=1, estimator={"kind": "sampled", "permutations": 4000}
            )
        )
        for ra, rb in zip(exact.rows, sampled.rows):
            assert ra.value == pytest.approx(rb.value, abs=1e-12)  # singleton values exact
            assert ra.reward == pytest.approx(rb.reward, abs=0.05)

    def test_strategy_sweep_reuses_validation_subsets(self):
        cfg = bernoulli_config(
            repeats=2,
            sweep={
                "axis": "strategy-grid",
                "source": 0,
                "values": ["truthful", {"tag": "duplicate", "copies": 2}],
            },
        )
        report = run_experiment(cfg)
        assert report.sweep_axis == "strategy-grid"
        # Source 1 submits the same data against the same validation subsets,
        # so its stand-alone value is identical across sweep points.
        by_sweep = {}
        for row in report.rows:
            if row.source == 1:
                by_sweep.setdefault(row.sweep, []).append(row.value)
        values = list(by_sweep.values())
        assert values[0] == values[1]

    def test_pipeline_errors_name_the_stage(self):
        cfg = bernoulli_config(
            sources=[
                {"csv": "/nonexistent/file.csv", "output_column": "y", "kind": "binary"},
                {"generator": "bernoulli", "n_points": 6},
            ]
        )
        with pytest.raises(Exception, match=r"\[sources\]"):
            run_experiment(cfg)

    def test_cross_validation_mode(self):
        cfg = ExperimentConfig.from_dict(
            {
                "seed": 8,
                "repeats": 2,
                "model": {"family": "beta-bernoulli"},
                "sources": [{"generator": "bernoulli", "n_points": 8, "p": 0.5}] * 3,
                "post": {"kind": "cross-validation", "variant": "grave",
                         "validation_frac": 0.25},
            }
        )
        report = run_experiment(cfg)
        assert len(report.rows) == 6

    def test_validation_noise_sweep(self):
        cfg = bernoulli_config()
        c2 = ExperimentConfig.from_dict(
            {
                **cfg.resolved,
                "model": {"family": "gaussian-known-var"},
                "sources": [
                    {"generator": "linear", "n_points": 10, "weights": [1.0], "noise_sd": 0.5}
                ],
                "validation": {
                    "generator": "linear", "n_points": 12, "weights": [1.0],
                    "noise_sd": 0.5, "subset_fraction": 1.0,
                },
                "strategies": ["truthful"],
                "standardize_outputs": False,
                "repeats": 1,
                "sweep": {"axis": "validation-noise", "values": [0.0, 2.0]},
            }
        )
        report = run_experiment(c2)
        by_sweep = {row.sweep: row.value for row in report.rows}
        # Heavier validation noise changes the scored outputs, hence the value.
        assert by_sweep["0"] != by_sweep["2"]

    def test_weight_family_sweep(self):
        cfg = bernoulli_config(
            sweep={"axis": "weight-family",
                   "values": ["shapley", {"family": "beta", "alpha": 4.0, "beta": 1.0}]},
            repeats=1,
        )
        report = run_experiment(cfg)
        sweeps = {row.sweep for row in report.rows}
        assert sweeps == {"shapley", "beta(4.0,1.0)"}

    def test_sorted_fraction_sweep(self):
        cfg = bernoulli_config()
        c2 = ExperimentConfig.from_dict(
            {
                **cfg.resolved,
                "model": {"family": "gp"},
                "sources": [{"generator": "friedman", "n_points": 15}],
                "strategies": ["truthful"],
                "validation": {"generator": "friedman", "n_points": 20,
                               "subset_fraction": 1.0},
                "repeats": 1,
                "sweep": {"axis": "sorted-fraction", "values": [0.25, 1.0]},
            }
        )
        report = run_experiment(c2)
        assert {row.sweep for row in report.rows} == {"0.25", "1"}

    def test_validation_free_baseline_needs_no_validation(self):
        cfg = ExperimentConfig.from_dict(
            {
                "seed": 4,
                "repeats": 1,
                "model": {"family": "beta-bernoulli"},
                "dvf": "cardinality",
                "sources": [
                    {"generator": "bernoulli", "n_points": 5},
                    {"generator": "bernoulli", "n_points": 3},
                ],
            }
        )
        report = run_experiment(cfg)
        values = {row.source: row.value for row in report.rows}
        assert values == {0: 5.0, 1: 3.0}


class TestReports:
    def test_csv_row_count_and_header(self, tmp_path):
        report = run_experiment(bernoulli_config(repeats=2))
        path = tmp_path / "out.csv"
        emit_report(report, "csv", path)
        lines = path.read_text().strip().split("\n")
        assert lines[0] == "repeat,source,strategy,value,reward"
        assert len(lines) == 1 + 2 * 2

    def test_csv_two_repeats_three_sources_has_six_rows(self, tmp_path):
        cfg = bernoulli_config(
            repeats=2,
            sources=[{"generator": "bernoulli", "n_points": 6, "p": 0.5}] * 3,
        )
        report = run_experiment(cfg)
        path = tmp_path / "out.csv"
        emit_report(report, "csv", path)
        assert len(path.read_text().strip().split("\n")) == 1 + 6

    def test_empty_report_is_header_only(self, tmp_path):
        from truthval.experiment import RunReport

        empty = RunReport(
            config={}, config_hash="0", seed=0, sweep_axis=None,
            rows=[], summary=[], wall_time_s=0.0,
        )
        path = tmp_path / "empty.csv"
        emit_report(empty, "csv", path)
        assert path.read_text() == "repeat,source,strategy,value,reward\n"

    def test_json_round_trips_numeric_fields(self, tmp_path):
        report = run_experiment(bernoulli_config())
        path = tmp_path / "out.json"
        emit_report(report, "json", path)
        loaded = json.loads(path.read_text())
        for parsed, row in zip(loaded["rows"], report.rows):
            assert parsed["value"] == row.value
            assert parsed["reward"] == row.reward

    def test_unwritable_path_errors_with_path(self):
        report = run_experiment(bernoulli_config(repeats=1))
        with pytest.raises(Exception, match="no/such/dir"):
            emit_report(report, "csv", "/no/such/dir/out.csv")

    def test_config_echo_embedded(self):
        report = run_experiment(bernoulli_config())
        assert report.config["model"] == {"family": "beta-bernoulli"}
        assert report.config_hash

    def test_confidence_interval_needs_two_repeats(self):
        single = run_experiment(bernoulli_config(repeats=1))
        assert all(entry["ci_reward"] is None for entry in single.summary)
        several = run_experiment(bernoulli_config(repeats=3))
        assert all(entry["ci_reward"] is not None for entry in several.summary)


class TestGenerators:
    def test_linear_generator_shapes(self):
        ds = _materialize(
            {"generator": "linear", "n_points": 12, "weights": [1.0, 2.0], "noise_sd": 0.5},
            seed=3,
        )
        assert ds.inputs.shape == (12, 2)

    def test_unknown_generator(self):
        with pytest.raises(ConfigurationError):
            _materialize({"generator": "cauchy", "n_points": 3}, seed=0)
