"""End-to-end CLI runs: exit codes, file formats, determinism, overrides."""

import csv
import json
import os

import pytest

from diskflow.cli import main

FIG4 = {"a": [1.0, 0.0], "alpha": 1.0, "b": [0.0, 1.0], "beta": 0.5}
QUADRATIC = {"a": [1.0, 0.0], "alpha": 1.0}


def write_config(tmp_path, name, cfg):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def read_bytes_tree(root):
    out = {}
    for dirpath, _, files in os.walk(root):
        for f in files:
            p = os.path.join(dirpath, f)
            with open(p, "rb") as fh:
                out[os.path.relpath(p, root)] = fh.read()
    return out


class TestSimulate:
    def test_quadratic_oracle_row(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "c.json",
            {
                "generator": QUADRATIC,
                "points": [[0.0, 0.0]],
                "grid": {"times": [1.0, 10.0]},
                "out": str(tmp_path / "out"),
            },
        )
        assert main(["simulate", "--config", cfg]) == 0
        rows = list(csv.reader(open(tmp_path / "out" / "traj_g0_p0.csv")))
        assert rows[0] == ["t", "re", "im", "err"]
        last = rows[-1]
        assert abs(float(last[1]) - 10.0 / 11.0) < 1e-8

    def test_two_points_identical_time_columns(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "c.json",
            {
                "generator": QUADRATIC,
                "points": [[0.0, 0.0], [0.3, 0.2]],
                "grid": {"times": [1.0, 5.0, 25.0]},
                "out": str(tmp_path / "out"),
            },
        )
        assert main(["simulate", "--config", cfg, "--parallel", "2"]) == 0
        t0 = [r[0] for r in csv.reader(open(tmp_path / "out" / "traj_g0_p0.csv"))]
        t1 = [r[0] for r in csv.reader(open(tmp_path / "out" / "traj_g0_p1.csv"))]
        assert t0 == t1

    def test_invalid_generator_exits_2(self, tmp_path, capsys):
        cfg = write_config(
            tmp_path,
            "c.json",
            {
                "generator": {"a": [0.0, 0.0], "alpha": 1.0},
                "points": [[0.0, 0.0]],
                "grid": {"times": [1.0]},
                "out": str(tmp_path / "out"),
            },
        )
        assert main(["simulate", "--config", cfg]) == 2
        assert "nonzero" in capsys.readouterr().err

    def test_missing_config_exits_2(self, tmp_path):
        assert main(["simulate", "--config", str(tmp_path / "nope.json")]) == 2

    def test_numeric_failure_exits_3(self, tmp_path, monkeypatch):
        from diskflow.errors import IntegrationError
        import diskflow.cli as cli_mod

        def boom(*a, **k):
            raise IntegrationError("stepper stalled")

        monkeypatch.setattr(cli_mod, "integrate_trajectory", boom)
        cfg = write_config(
            tmp_path,
            "c.json",
            {
                "generator": QUADRATIC,
                "points": [[0.0, 0.0]],
                "grid": {"times": [1.0, 2.0]},
                "out": str(tmp_path / "out"),
            },
        )
        assert main(["simulate", "--config", cfg]) == 3


class TestReport:
    def test_omega_lists_regions(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "c.json",
            {
                "generators": [
                    {"a": [1.0, 0.0], "alpha": 1.5, "b": [0.25, 0.0], "beta": 2.0},
                    {"a": [0.25, 0.0], "alpha": 1.0, "b": [0.0, -0.0625], "beta": 2.0},
                    {"a": [1.0, 0.0], "alpha": 0.5, "b": [0.0, 0.1], "beta": 1.0},
                    {"a": [1.0, 0.0], "alpha": 1.5, "b": [0.0, 0.5], "beta": 1.0},
                    FIG4,
                ],
                "kind": "omega",
                "out": str(tmp_path / "out"),
            },
        )
        assert main(["report", "--config", cfg]) == 0
        doc = json.load(open(tmp_path / "out" / "report_omega.json"))
        assert [c["omega"] for c in doc["cells"]] == [
            "Omega1", "Omega2", "Omega3", "Omega4", "Omega5"
        ]

    def test_geometry_fig4(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "c.json",
            {
                "generator": FIG4,
                "points": [[0.85, -0.05]],
                "kind": "geometry",
                "out": str(tmp_path / "out"),
            },
        )
        assert main(["report", "--config", cfg]) == 0
        doc = json.load(open(tmp_path / "out" / "report_geometry.json"))
        cell = doc["cells"][0]
        assert cell["estimated_order"] == pytest.approx(0.5, abs=0.05)
        assert cell["limit_constant"]["value"][0] == pytest.approx(2.0, rel=0.05)
        rows = list(csv.reader(open(tmp_path / "out" / cell["curve_csv"])))
        assert rows[0] == ["t", "d", "gap", "kappa"]

    def test_appendix_within_error(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "c.json",
            {
                "generator": FIG4,
                "points": [[3.0, 0.0]],
                "kind": "appendix",
                "out": str(tmp_path / "out"),
            },
        )
        assert main(["report", "--config", cfg]) == 0
        cell = json.load(open(tmp_path / "out" / "report_appendix.json"))["cells"][0]
        assert cell["within_error"]

    def test_schema_fields(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "c.json",
            {
                "generator": {"a": [1.0, 0.0], "alpha": 1.0, "b": [0.25, 0.0], "beta": 1.2},
                "points": [[3.0, 0.0]],
                "grid": {"t_max": 1e4},
                "kind": "asymptotics",
                "out": str(tmp_path / "out"),
            },
        )
        assert main(["report", "--config", cfg]) == 0
        doc = json.load(open(tmp_path / "out" / "report_asymptotics.json"))
        cell = doc["cells"][0]
        assert set(cell) >= {"regime", "limit", "prediction_error_curve"}
        assert set(cell["limit"]) >= {"value", "error", "model"}
        assert isinstance(cell["limit"]["value"], list) and len(cell["limit"]["value"]) == 2
        assert all(len(pair) == 2 for pair in cell["prediction_error_curve"])
        assert set(doc["meta"]) == {"config_sha256", "version", "backend", "tolerances"}

    def test_missing_kind_exits_2(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "c.json",
            {"generator": FIG4, "points": [[0.0, 0.0]], "out": str(tmp_path / "out")},
        )
        assert main(["report", "--config", cfg]) == 2

    def test_rigidity_kind(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "c.json",
            {
                "generator": FIG4,
                "points": [[0.85, -0.05]],
                "kind": "rigidity",
                "c_values": [[0.0, 0.0], [0.1, 0.0]],
                "grid": {"t_max": 1e6},
                "out": str(tmp_path / "out"),
            },
        )
        assert main(["report", "--config", cfg]) == 0
        cells = json.load(open(tmp_path / "out" / "report_rigidity.json"))["cells"]
        by_c = {tuple(c["c"]): c for c in cells}
        assert by_c[(0.0, 0.0)]["above_all"]
        assert by_c[(0.1, 0.0)]["estimated_order"] == pytest.approx(0.5, abs=0.05)
        assert all(c["verdict"] == "RIGID-CONSISTENT" for c in cells)


class TestDeterminismAndOverrides:
    def test_byte_identical_rerun(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "c.json",
            {
                "generator": FIG4,
                "points": [[0.85, -0.05]],
                "kind": "geometry",
                "grid": {"t_max": 1e5},
                "out": str(tmp_path / "out"),
            },
        )
        assert main(["report", "--config", cfg]) == 0
        first = read_bytes_tree(tmp_path / "out")
        assert main(["report", "--config", cfg]) == 0
        assert read_bytes_tree(tmp_path / "out") == first

    def test_flag_overrides_change_hash(self, tmp_path):
        base = {
            "generator": FIG4,
            "points": [[0.85, -0.05]],
            "kind": "omega",
            "out": str(tmp_path / "out1"),
        }
        cfg = write_config(tmp_path, "c.json", base)
        assert main(["report", "--config", cfg]) == 0
        assert main(["report", "--config", cfg, "--out", str(tmp_path / "out2"), "--tol", "1e-8"]) == 0
        h1 = json.load(open(tmp_path / "out1" / "report_omega.json"))["meta"]["config_sha256"]
        h2 = json.load(open(tmp_path / "out2" / "report_omega.json"))["meta"]["config_sha256"]
        assert h1 != h2

    def test_unknown_config_key_rejected(self, tmp_path):
        cfg = write_config(
            tmp_path, "c.json", {"generator": FIG4, "bogus": 1, "out": "x"}
        )
        assert main(["report", "--config", cfg]) == 2


class TestField:
    def test_field_csv(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "c.json",
            {
                "generator": FIG4,
                "region": [0.75, 1.0, -0.12, 0.03],
                "nx": 8,
                "ny": 6,
                "out": str(tmp_path / "out"),
            },
        )
        assert main(["field", "--config", cfg]) == 0
        rows = list(csv.reader(open(tmp_path / "out" / "field.csv")))
        assert rows[0] == ["re", "im", "f_re", "f_im"]
        manifest = json.load(open(tmp_path / "out" / "field_manifest.json"))
        assert manifest["samples"] == len(rows) - 1

    def test_region_outside_disk_exits_2(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "c.json",
            {
                "generator": FIG4,
                "region": [2.0, 3.0, 0.0, 1.0],
                "out": str(tmp_path / "out"),
            },
        )
        assert main(["field", "--config", cfg]) == 2
