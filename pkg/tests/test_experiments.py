"""Tests for the figure runners, their file formats, and the CLI.

Determinism is the load-bearing property here: identical seeds must give
byte-identical CSVs regardless of thread count, and the frontier files must
not depend on the seed at all.
"""

import hashlib
import json

import numpy as np
import pytest

import irtr_lab as lab
from irtr_lab import cli
from irtr_lab.experiments import DEFAULT_PANELS, DEFAULT_SEPARATION_GRID, inclusive_grid


def read_table(path):
    """Parse one output CSV into (metadata dict, header list, row lists)."""
    metadata, header, rows = {}, None, []
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            metadata[key] = value
            continue
        if header is None:
            header = line.split(",")
            continue
        rows.append(line.split(","))
    return metadata, header, rows


class TestInclusiveGrid:
    def test_includes_both_endpoints(self):
        grid = inclusive_grid(0.05, 8.0, 0.05)
        assert len(grid) == 160
        assert grid[0] == 0.05
        np.testing.assert_allclose(grid[-1], 8.0, rtol=1e-12)

    def test_single_point(self):
        assert inclusive_grid(1.0, 1.0, 0.5) == (1.0,)

    def test_rejects_bad_steps(self):
        with pytest.raises(lab.ConfigError):
            inclusive_grid(0.0, 1.0, 0.0)
        with pytest.raises(lab.ConfigError):
            inclusive_grid(1.0, 0.0, 0.5)

    def test_default_grids(self):
        assert DEFAULT_SEPARATION_GRID[0] == 0.05
        assert DEFAULT_PANELS == (0.2, 0.5, 1.0, 2.0, 3.0, 4.0, 6.0, 8.0)


class TestExperimentConfig:
    def test_defaults_are_valid(self):
        config = lab.ExperimentConfig(figure_id="fig1")
        assert config.sigma == 1.0
        assert config.mode_cutoff is None
        assert config.measurements == ("direct", "spade", "random")

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"figure_id": "fig9"},
            {"figure_id": "fig1", "sigma": 0.0},
            {"figure_id": "fig1", "theta2_grid": (1.0, 0.5)},
            {"figure_id": "fig1", "theta2_grid": (0.0, 0.5)},
            {"figure_id": "fig1", "theta1_grid": ()},
            {"figure_id": "fig1", "panels": (2.0, float("nan"))},
            {"figure_id": "fig1", "n_random": 0},
            {"figure_id": "fig1", "seed": -1},
            {"figure_id": "fig1", "mode_cutoff": -3},
            {"figure_id": "fig1", "measurements": ("direct", "heterodyne")},
            {"figure_id": "fig1", "measurements": ()},
            {"figure_id": "fig1", "frontier_samples": 1},
            {"figure_id": "fig1", "theta2_over_sigma": 0.0},
        ],
    )
    def test_rejects_invalid_settings(self, kwargs):
        with pytest.raises(lab.ConfigError):
            lab.ExperimentConfig(**kwargs)

    def test_runner_checks_figure_id(self):
        config = lab.ExperimentConfig(figure_id="fig2")
        with pytest.raises(lab.ConfigError):
            lab.run_fig1(config)


class TestRunFig1:
    def test_routes_agree_and_round_trip(self, tmp_path):
        config = lab.ExperimentConfig(
            figure_id="fig1", theta2_grid=(0.5, 1.0, 2.0), output_dir=str(tmp_path)
        )
        paths = lab.run_fig1(config)
        assert [p.name for p in paths] == ["fig1.csv", "manifest.json"]
        metadata, header, rows = read_table(paths[0])
        assert metadata["figure"] == "fig1"
        assert header == ["theta2_over_sigma", "c_tilde_closed_form", "c_tilde_quadrature"]
        assert len(rows) == 3
        for row in rows:
            ratio, closed, quad = (float(cell) for cell in row)
            assert abs(closed - quad) <= 1e-8
            # 17 significant digits round-trip doubles exactly.
            assert closed == lab.gaussian_incompatibility(1.0, ratio)

    def test_manifest_checksums(self, tmp_path):
        config = lab.ExperimentConfig(
            figure_id="fig1", theta2_grid=(1.0,), output_dir=str(tmp_path)
        )
        csv_path, manifest_path = lab.run_fig1(config)
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        entry = manifest["files"]["fig1.csv"]
        data = csv_path.read_bytes()
        assert entry["sha256"] == hashlib.sha256(data).hexdigest()
        assert entry["bytes"] == len(data)
        assert manifest["figure"] == "fig1"
        assert manifest["version"] == lab.__version__
        assert manifest["config"]["mode_cutoff"] == "adaptive"
        assert manifest["config"]["sigma"] == 1.0


class TestRunFig2:
    def test_regret_regimes(self, tmp_path):
        config = lab.ExperimentConfig(
            figure_id="fig2", theta2_grid=(0.1, 8.0), output_dir=str(tmp_path)
        )
        csv_path, _ = lab.run_fig2(config)
        _, header, rows = read_table(csv_path)
        assert header == ["theta2_over_sigma", "delta1", "delta2"]
        close, far = rows
        assert float(close[2]) >= 0.9
        assert float(far[1]) <= 0.1 and float(far[2]) <= 0.1
        for row in rows:
            assert 0.0 <= float(row[1]) <= 1.0
            assert 0.0 <= float(row[2]) <= 1.0


class TestRunFig3:
    def test_panels_and_degenerate_marker(self, tmp_path):
        config = lab.ExperimentConfig(
            figure_id="fig3",
            panels=(0.5, 2.0),
            frontier_samples=32,
            output_dir=str(tmp_path),
        )
        paths = lab.run_fig3(config)
        assert [p.name for p in paths] == [
            "fig3_panel_1.csv",
            "fig3_panel_2.csv",
            "manifest.json",
        ]
        metadata1, header1, rows1 = read_table(paths[0])
        assert header1 == ["delta1", "delta2"]
        assert metadata1["no_constraint"] == "false"
        assert len(rows1) == 32
        np.testing.assert_allclose(
            float(metadata1["c_tilde"]),
            lab.gaussian_incompatibility(1.0, 0.5),
            atol=1e-9,
        )
        assert float(metadata1["irtr_residual"]) >= -1e-9
        assert 0.0 <= float(metadata1["di_delta1"]) <= 1.0

        # c_tilde vanishes identically at separation 2 sigma: no frontier.
        metadata2, _, rows2 = read_table(paths[1])
        assert metadata2["no_constraint"] == "true"
        assert rows2 == []


class TestRunFig4:
    def test_aligned_point_and_frontier(self, tmp_path):
        config = lab.ExperimentConfig(
            figure_id="fig4",
            theta1_grid=(0.0, 0.5, 1.0),
            theta2_over_sigma=0.1,
            frontier_samples=16,
            output_dir=str(tmp_path),
        )
        data_path, frontier_path, _ = lab.run_fig4(config)
        metadata, header, rows = read_table(data_path)
        assert header == ["theta1_over_sigma", "delta1", "delta2"]
        assert len(rows) == 3
        aligned = rows[0]
        assert float(aligned[0]) == 0.0
        assert float(aligned[1]) == 1.0  # no centroid information at all
        assert float(aligned[2]) < 1e-6  # essentially no separation regret
        assert float(rows[-1][2]) > float(aligned[2])

        frontier_metadata, _, frontier_rows = read_table(frontier_path)
        assert len(frontier_rows) == 16
        assert frontier_metadata["no_constraint"] == "false"
        np.testing.assert_allclose(
            float(frontier_metadata["c_tilde"]),
            lab.gaussian_incompatibility(1.0, 0.1),
            atol=1e-9,
        )


class TestRunFig5:
    def run(self, tmp_path, name, seed, threads=None, monkeypatch=None):
        if monkeypatch is not None:
            if threads is None:
                monkeypatch.delenv("IRTR_LAB_THREADS", raising=False)
            else:
                monkeypatch.setenv("IRTR_LAB_THREADS", str(threads))
        out = tmp_path / name
        config = lab.ExperimentConfig(
            figure_id="fig5",
            n_random=64,
            seed=seed,
            frontier_samples=16,
            output_dir=str(out),
        )
        return lab.run_fig5(config)

    def test_same_seed_is_byte_identical(self, tmp_path):
        first = self.run(tmp_path, "a", seed=7)
        second = self.run(tmp_path, "b", seed=7)
        assert first[0].read_bytes() == second[0].read_bytes()
        assert first[1].read_bytes() == second[1].read_bytes()

    def test_different_seed_changes_samples_not_frontier(self, tmp_path):
        first = self.run(tmp_path, "a", seed=7)
        second = self.run(tmp_path, "b", seed=8)
        assert first[0].read_bytes() != second[0].read_bytes()
        assert first[1].read_bytes() == second[1].read_bytes()

    def test_thread_count_does_not_change_output(self, tmp_path, monkeypatch):
        serial = self.run(tmp_path, "serial", seed=3, threads=1, monkeypatch=monkeypatch)
        threaded = self.run(
            tmp_path, "threaded", seed=3, threads=4, monkeypatch=monkeypatch
        )
        assert serial[0].read_bytes() == threaded[0].read_bytes()

    def test_sample_rows_and_extras(self, tmp_path):
        samples_path, _, manifest_path = self.run(tmp_path, "a", seed=11)
        metadata, header, rows = read_table(samples_path)
        assert header == ["sample_index", "delta1", "delta2", "irtr_residual"]
        assert [int(row[0]) for row in rows] == list(range(64))
        assert metadata["seed"] == "11"
        assert all(float(row[3]) >= -1e-9 for row in rows)

        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        extras = manifest["extras"]
        assert extras["min_irtr_residual"] >= -1e-9
        assert 0.0 <= extras["fraction_irtr_residual_below_0.1"] <= 1.0

    def test_invalid_thread_count_rejected(self, tmp_path, monkeypatch):
        monkeypatch.setenv("IRTR_LAB_THREADS", "many")
        with pytest.raises(lab.ConfigError):
            self.run(tmp_path, "a", seed=0)


class TestRunCustom:
    def test_grid_cross_product_with_deterministic_measurements(self, tmp_path):
        config = lab.ExperimentConfig(
            figure_id="custom",
            theta1_grid=(0.0, 1.0),
            theta2_grid=(0.5, 1.0),
            measurements=("direct", "spade"),
            output_dir=str(tmp_path),
        )
        csv_path, _ = lab.run_custom(config)
        metadata, header, rows = read_table(csv_path)
        assert header == [
            "theta1_over_sigma",
            "theta2_over_sigma",
            "measurement",
            "sample_index",
            "delta1",
            "delta2",
            "irtr_residual",
        ]
        assert metadata["measurements"] == "direct+spade"
        assert len(rows) == 8
        assert {row[2] for row in rows} == {"direct", "spade"}
        assert all(row[3] == "-1" for row in rows)
        assert all(float(row[6]) >= -1e-9 for row in rows)

    def test_random_measurements_reproducible(self, tmp_path):
        def run(name, seed):
            config = lab.ExperimentConfig(
                figure_id="custom",
                theta1_grid=(0.0,),
                theta2_grid=(0.2,),
                measurements=("random",),
                n_random=5,
                seed=seed,
                output_dir=str(tmp_path / name),
            )
            return lab.run_custom(config)[0].read_bytes()

        assert run("a", seed=4) == run("b", seed=4)
        assert run("c", seed=4) != run("d", seed=5)

    def test_requires_explicit_grids(self, tmp_path):
        config = lab.ExperimentConfig(
            figure_id="custom", theta1_grid=(0.0,), output_dir=str(tmp_path)
        )
        with pytest.raises(lab.ConfigError):
            lab.run_custom(config)


class TestCli:
    def test_successful_run_prints_paths(self, tmp_path, capsys):
        code = cli.main(
            ["fig1", "--out", str(tmp_path), "--grid", "0.5:1.0:0.25"]
        )
        assert code == 0
        printed = capsys.readouterr().out.strip().splitlines()
        assert printed == [str(tmp_path / "fig1.csv"), str(tmp_path / "manifest.json")]
        assert (tmp_path / "fig1.csv").is_file()

    def test_comma_grid_and_seed_flag(self, tmp_path):
        code = cli.main(
            ["fig5", "--out", str(tmp_path), "--seed", "9", "--n-random", "4"]
        )
        assert code == 0
        manifest = json.loads((tmp_path / "manifest.json").read_text(encoding="utf-8"))
        assert manifest["seed"] == 9
        assert manifest["config"]["n_random"] == 4

    def test_malformed_grid_is_config_error(self, tmp_path, capsys):
        code = cli.main(["fig1", "--out", str(tmp_path), "--grid", "a:b"])
        assert code == 2
        assert "config error" in capsys.readouterr().err

    def test_grid_rejected_for_fig5(self, tmp_path, capsys):
        code = cli.main(["fig5", "--out", str(tmp_path), "--grid", "0.5:1:0.5"])
        assert code == 2
        assert "--grid does not apply" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path, capsys):
        code = cli.main(
            ["fig1", "--config", str(tmp_path / "absent.ini"), "--out", str(tmp_path)]
        )
        assert code == 2
        assert "does not exist" in capsys.readouterr().err

    def test_unknown_config_key(self, tmp_path, capsys):
        path = tmp_path / "bad.ini"
        path.write_text("[fig1]\nbogus = 1\n", encoding="utf-8")
        code = cli.main(["fig1", "--config", str(path), "--out", str(tmp_path)])
        assert code == 2
        assert "unknown setting" in capsys.readouterr().err

    def test_unknown_config_section(self, tmp_path, capsys):
        path = tmp_path / "bad.ini"
        path.write_text("[fig7]\nseed = 1\n", encoding="utf-8")
        code = cli.main(["fig1", "--config", str(path), "--out", str(tmp_path)])
        assert code == 2
        assert "unknown section" in capsys.readouterr().err

    def test_numerical_failure_exits_three(self, tmp_path, capsys):
        path = tmp_path / "coarse.ini"
        path.write_text(
            "[common]\npanel_count = 1\nnodes_per_panel = 2\n", encoding="utf-8"
        )
        code = cli.main(
            ["fig1", "--config", str(path), "--out", str(tmp_path), "--grid", "1.0,"]
        )
        assert code == 3
        assert "error" in capsys.readouterr().err

    def test_config_precedence_flag_wins(self, tmp_path):
        path = tmp_path / "layered.ini"
        path.write_text("[common]\nseed = 1\n[fig1]\nseed = 2\n", encoding="utf-8")

        out_a = tmp_path / "a"
        assert cli.main(
            ["fig1", "--config", str(path), "--out", str(out_a), "--grid", "1.0,"]
        ) == 0
        manifest = json.loads((out_a / "manifest.json").read_text(encoding="utf-8"))
        assert manifest["seed"] == 2  # figure section beats [common]

        out_b = tmp_path / "b"
        assert cli.main(
            [
                "fig1",
                "--config",
                str(path),
                "--seed",
                "3",
                "--out",
                str(out_b),
                "--grid",
                "1.0,",
            ]
        ) == 0
        manifest = json.loads((out_b / "manifest.json").read_text(encoding="utf-8"))
        assert manifest["seed"] == 3  # flag beats the file

    def test_mode_cutoff_parsing(self, tmp_path, capsys):
        code = cli.main(
            [
                "fig4",
                "--out",
                str(tmp_path),
                "--grid",
                "0.0,0.5",
                "--mode-cutoff",
                "17",
            ]
        )
        assert code == 0
        manifest = json.loads((tmp_path / "manifest.json").read_text(encoding="utf-8"))
        assert manifest["config"]["mode_cutoff"] == 17

        code = cli.main(
            ["fig4", "--out", str(tmp_path), "--grid", "0.0,", "--mode-cutoff", "x"]
        )
        assert code == 2
        capsys.readouterr()

    def test_custom_flags(self, tmp_path):
        code = cli.main(
            [
                "custom",
                "--out",
                str(tmp_path),
                "--theta1-grid",
                "0,1",
                "--theta2-grid",
                "0.5,1",
                "--measurements",
                "direct",
            ]
        )
        assert code == 0
        _, _, rows = read_table(tmp_path / "custom.csv")
        assert len(rows) == 4
        assert {row[2] for row in rows} == {"direct"}
