import subprocess
import sys

import pytest

from crmgraph.cli import cli_dispatch
from crmgraph.experiment import ExperimentConfig, save_config


def run_cli(capsys, *argv):
    code = cli_dispatch(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def measure_csv(tmp_path, capsys):
    path = tmp_path / "w.csv"
    code, _, _ = run_cli(capsys, "measure", "--rounds", "60", "--seed", "3",
                         "--out", str(path))
    assert code == 0
    return path


class TestUsageErrors:
    def test_no_arguments(self, capsys):
        code, _, err = run_cli(capsys)
        assert code == 1 and "usage" in err.lower()

    def test_unknown_subcommand(self, capsys):
        code, _, err = run_cli(capsys, "frobnicate")
        assert code == 1 and "usage" in err.lower()

    def test_unknown_flag(self, capsys):
        code, _, err = run_cli(capsys, "measure", "--bogus", "1")
        assert code == 1

    def test_missing_required(self, capsys):
        code, _, _ = run_cli(capsys, "graph", "--n", "5")
        assert code == 1

    def test_help_exits_zero(self, capsys):
        assert run_cli(capsys, "--help")[0] == 0
        assert run_cli(capsys, "sweep", "--help")[0] == 0


class TestMeasureCommand:
    def test_stdout_csv(self, capsys):
        code, out, _ = run_cli(capsys, "measure", "--rounds", "40", "--seed", "1")
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "atom_id,weight,label"
        assert len(lines) > 1

    def test_bad_parameter_exit_2(self, capsys):
        code, _, err = run_cli(capsys, "measure", "--alpha", "1.5")
        assert code == 2 and "error" in err


class TestGraphCommand:
    def test_deterministic_edge_lists(self, capsys, measure_csv):
        args = ("graph", "--weights", str(measure_csv), "--n", "100", "--seed", "7")
        code1, out1, _ = run_cli(capsys, *args)
        code2, out2, _ = run_cli(capsys, *args)
        assert code1 == code2 == 0
        assert out1 == out2
        assert out1.splitlines()[0] == "i,j,count"

    def test_binary_output(self, capsys, measure_csv):
        code, out, _ = run_cli(capsys, "graph", "--weights", str(measure_csv),
                               "--n", "50", "--seed", "2", "--binary")
        assert code == 0
        assert out.splitlines()[0] == "i,j"

    def test_exact_rounds_small(self, capsys, measure_csv):
        code, out, _ = run_cli(capsys, "graph", "--weights", str(measure_csv),
                               "--n", "20", "--seed", "2", "--exact-rounds")
        assert code == 0

    def test_missing_weights_file(self, capsys, tmp_path):
        code, _, _ = run_cli(capsys, "graph", "--weights", str(tmp_path / "no.csv"),
                             "--n", "5")
        assert code == 2


class TestStatsCommand:
    def test_wide_from_multigraph(self, capsys, tmp_path):
        edges = tmp_path / "edges.csv"
        edges.write_text("i,j,count\n0,1,3\n0,2,1\n1,2,2\n2,3,1\n")
        code, out, _ = run_cli(capsys, "stats", str(edges), "--n", "17")
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "N,V,E,D_1,D_2,D_3,T_0,T_1"
        assert lines[1] == "17,4,4,1,2,1,1,3"

    def test_long_from_binary(self, capsys, tmp_path):
        edges = tmp_path / "edges.csv"
        edges.write_text("i,j\n0,1\n0,2\n1,2\n")
        code, out, _ = run_cli(capsys, "stats", str(edges), "--n", "4", "--long")
        assert code == 0
        assert "4,degree,2,3" in out.splitlines()

    def test_bad_header(self, capsys, tmp_path):
        edges = tmp_path / "edges.csv"
        edges.write_text("x,y\n0,1\n")
        assert run_cli(capsys, "stats", str(edges))[0] == 2


class TestSweepCommand:
    def test_happy_path(self, capsys, tmp_path, monkeypatch):
        monkeypatch.setenv("CRMGG_THREADS", "1")
        cfg = ExperimentConfig(rounds=80, n_start=20, n_stop=100, n_step=20,
                               replicas=2, seed=5, out_dir=str(tmp_path / "out"))
        cfg_path = tmp_path / "cfg.json"
        save_config(cfg, cfg_path)
        code, out, _ = run_cli(capsys, "sweep", "--config", str(cfg_path))
        assert code == 0
        for name in ("config.json", "sweep.csv", "hist.csv", "fits.csv", "fits.json"):
            assert (tmp_path / "out" / name).exists()
        assert "sweep.csv" in out

    def test_out_override_and_svg(self, capsys, tmp_path, monkeypatch):
        monkeypatch.setenv("CRMGG_THREADS", "1")
        cfg = ExperimentConfig(rounds=80, n_start=20, n_stop=100, n_step=20,
                               replicas=1, seed=5, out_dir=str(tmp_path / "ignored"))
        cfg_path = tmp_path / "cfg.json"
        save_config(cfg, cfg_path)
        out_dir = tmp_path / "override"
        code, _, _ = run_cli(capsys, "sweep", "--config", str(cfg_path),
                             "--out", str(out_dir), "--svg")
        assert code == 0
        assert (out_dir / "sweep.csv").exists()
        assert (out_dir / "ve_scatter.svg").read_text().startswith("<svg")
        assert not (tmp_path / "ignored").exists()

    def test_missing_config(self, capsys, tmp_path):
        assert run_cli(capsys, "sweep", "--config", str(tmp_path / "no.json"))[0] == 2

    def test_config_and_profile_mutually_exclusive(self, capsys, tmp_path):
        code, _, _ = run_cli(capsys, "sweep", "--config", "a.json", "--profile", "desk")
        assert code == 1
        assert run_cli(capsys, "sweep")[0] == 1

    def test_desk_profile_runs(self, capsys, tmp_path, monkeypatch):
        monkeypatch.setenv("CRMGG_THREADS", "2")
        out_dir = tmp_path / "desk"
        code, _, _ = run_cli(capsys, "sweep", "--profile", "desk", "--seed", "2",
                             "--out", str(out_dir))
        assert code == 0
        assert (out_dir / "fits.json").exists()


class TestFitCommand:
    def test_fit_columns(self, capsys, tmp_path):
        table = tmp_path / "sweep.csv"
        rows = ["replica,N,V,E"]
        for v in range(10, 110, 10):
            rows.append(f"0,{v},{v},{4 * v * v}")
        table.write_text("\n".join(rows) + "\n")
        code, out, _ = run_cli(capsys, "fit", str(table), "--x", "V", "--y", "E",
                               "--lower-q", "0.0", "--upper-q", "1.0")
        assert code == 0
        header, row = out.splitlines()
        assert header == "type,slope,intercept,r2,n_points,lower_q,upper_q"
        fields = row.split(",")
        assert fields[0] == "E~V"
        assert float(fields[1]) == pytest.approx(2.0, abs=1e-9)

    def test_missing_column(self, capsys, tmp_path):
        table = tmp_path / "t.csv"
        table.write_text("a,b\n1,2\n")
        assert run_cli(capsys, "fit", str(table), "--x", "V", "--y", "E")[0] == 2


class TestCcdfCommand:
    def test_plain_integers(self, capsys, tmp_path):
        samples = tmp_path / "degrees.txt"
        samples.write_text("1\n2\n2\n3\n")
        code, out, _ = run_cli(capsys, "ccdf", str(samples))
        assert code == 0
        assert out.splitlines() == ["M,survival", "0,1.0", "1,0.75", "2,0.25"]

    def test_csv_column(self, capsys, tmp_path):
        table = tmp_path / "t.csv"
        table.write_text("v,degree\n9,1\n9,2\n9,2\n9,3\n")
        code, out, _ = run_cli(capsys, "ccdf", str(table), "--column", "degree")
        assert code == 0
        assert out.splitlines()[1] == "0,1.0"

    def test_all_zero_exit_2(self, capsys, tmp_path):
        samples = tmp_path / "z.txt"
        samples.write_text("0\n0\n")
        assert run_cli(capsys, "ccdf", str(samples))[0] == 2


class TestConsoleScript:
    def test_module_entry_point(self):
        proc = subprocess.run([sys.executable, "-m", "crmgraph.cli"],
                              capture_output=True, text=True)
        # bare module import has no __main__ hook; use the installed script
        script = subprocess.run(["crmgraph", "--help"], capture_output=True, text=True)
        assert script.returncode == 0
        assert "measure" in script.stdout
