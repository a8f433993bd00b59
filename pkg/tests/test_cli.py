"""labctl surface: exit codes, file outputs, determinism, config handling."""

import json

import pytest

from mulab.cli import main


def run(argv):
    try:
        return main(argv)
    except SystemExit as exc:  # argparse usage failures
        return exc.code


class TestSieveCommand:
    def test_builds_cache_with_summary(self, tmp_path, capsys):
        out = tmp_path / "mu.bin"
        assert run(["sieve", "--n", "10000", "--out", str(out)]) == 0
        blob = out.read_bytes()
        assert blob[:4] == b"MUSV" and blob[4] == 1
        text = capsys.readouterr().out
        assert "M(10000)=-23" in text

    def test_deterministic_rerun(self, tmp_path):
        a, b = tmp_path / "a.bin", tmp_path / "b.bin"
        run(["sieve", "--n", "5000", "--out", str(a)])
        run(["sieve", "--n", "5000", "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_zero_n_is_usage_error(self, tmp_path):
        assert run(["sieve", "--n", "0", "--out", str(tmp_path / "x")]) == 2

    def test_lambda_table(self, tmp_path):
        out = tmp_path / "lam.bin"
        assert run(["sieve", "--n", "1000", "--fn", "lambda",
                    "--out", str(out)]) == 0
        assert out.exists()


class TestSumCommand:
    def test_checkpoint_row_contract(self, tmp_path):
        csv_path = tmp_path / "trace.csv"
        code = run(["sum", "--weights", "mu:20000", "--phase", "poly:0,sqrt2",
                    "--n", "20000", "--checkpoints", "20",
                    "--out-csv", str(csv_path)])
        assert code == 0
        lines = csv_path.read_text().splitlines()
        assert len(lines) == 21  # header + 20 checkpoint rows

    def test_cache_weights_and_mask(self, tmp_path):
        cache = tmp_path / "mu.bin"
        run(["sieve", "--n", "3000", "--out", str(cache)])
        assert run(["sum", "--weights", f"{cache}%4,1", "--phase", "poly:0",
                    "--n", "3000"]) == 0

    def test_bad_phase_token_is_usage_error(self, capsys):
        assert run(["sum", "--weights", "one:100", "--phase", "poly:0,sqx",
                    "--n", "100"]) == 2
        assert "sqx" in capsys.readouterr().err

    def test_truncated_cache_is_io_error(self, tmp_path):
        cache = tmp_path / "mu.bin"
        run(["sieve", "--n", "3000", "--out", str(cache)])
        cache.write_bytes(cache.read_bytes()[:-6])
        assert run(["sum", "--weights", str(cache), "--phase", "poly:0",
                    "--n", "100"]) == 3


class TestEntropyCommand:
    def test_indicator_generation(self, tmp_path):
        csv_path = tmp_path / "rows.csv"
        code = run(["entropy", "--p1", "poly:0,sqrt2", "--p2", "poly:0,sqrt3",
                    "--length", "5000", "--jmax", "8",
                    "--out-csv", str(csv_path)])
        assert code == 0
        lines = csv_path.read_text().splitlines()
        assert lines[0].startswith("J,count_all")
        assert len(lines) == 9

    def test_sequence_file_input(self, tmp_path):
        import numpy as np

        from mulab.symbolic_blocks import SymbolSeq, save_symbols

        hdr = save_symbols(
            SymbolSeq(np.tile([0, 1], 100), 2), tmp_path / "seq.bin"
        )
        assert run(["entropy", "--seq", str(hdr), "--jmax", "4"]) == 0

    def test_missing_inputs_usage(self):
        assert run(["entropy", "--jmax", "4"]) == 2


class TestPiecesCommand:
    def test_crossing_lines_report(self, tmp_path, capsys):
        arr = tmp_path / "two_lines.csv"
        arr.write_text("1,1,0,1,0,1\n0,1,1,1,0,1\n")
        out = tmp_path / "report.json"
        assert run(["pieces", "--arrangement", str(arr),
                    "--out-json", str(out)]) == 0
        report = json.loads(out.read_text())
        assert report["count"] == 9 and report["bound"] == 9
        assert report["attained"] is True
        assert '"count": 9' in capsys.readouterr().out


class TestDirichletCommand:
    def test_witness_line(self, capsys):
        assert run(["dirichlet", "--theta", "1/3", "--q", "3"]) == 0
        assert "t=3" in capsys.readouterr().out

    def test_budget_exit_code(self):
        assert run(["dirichlet", "--theta", "sqrt2,sqrt3,sqrt5",
                    "--q", "8", "--budget", "10"]) == 4


class TestCorrelateCommand:
    def test_ap_mode(self, capsys):
        assert run(["correlate", "--mode", "ap", "--weights", "mu:2000",
                    "--phase", "poly:0", "--s", "1", "--h", "10",
                    "--n", "1000"]) == 0
        assert "value=" in capsys.readouterr().out

    def test_shift_mode(self, capsys):
        assert run(["correlate", "--mode", "shift", "--phase", "poly:0,1/2",
                    "--shift", "1", "--n", "64"]) == 0
        out = capsys.readouterr().out
        assert "4.0" in out


class TestExperimentCommand:
    def test_round_trips_preset(self, tmp_path):
        code = run(["experiment", "round-trips", "--n", "2000",
                    "--out-dir", str(tmp_path / "bundle")])
        assert code == 0
        manifest = json.loads((tmp_path / "bundle" / "manifest.json").read_text())
        assert manifest["results"]["passed"] is True
        assert manifest["parameters"]["n"] == 2000
        assert "versions" in manifest

    def test_unknown_preset_usage(self, capsys):
        assert run(["experiment", "no-such-thing"]) == 2

    def test_unknown_override_usage(self, capsys):
        assert run(["experiment", "round-trips", "--set", "bogus=1"]) == 2
        assert "bogus" in capsys.readouterr().err

    def test_example33_small(self, capsys):
        assert run(["experiment", "example33", "--n", "2000"]) == 0
        assert "PASS" in capsys.readouterr().out


class TestConfigFile:
    def test_config_supplies_defaults(self, tmp_path, capsys):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("q = 3\n")
        assert run(["dirichlet", "--theta", "1/3",
                    "--config", str(cfg)]) == 0
        assert "t=3" in capsys.readouterr().out

    def test_unknown_key_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("nonsense = 5\n")
        assert run(["dirichlet", "--theta", "1/3", "--q", "3",
                    "--config", str(cfg)]) == 2
        assert "nonsense" in capsys.readouterr().err

    def test_flags_override_config(self, tmp_path, capsys):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("q = 5\n")
        assert run(["dirichlet", "--theta", "1/2", "--q", "2",
                    "--config", str(cfg)]) == 0
        assert "t=2" in capsys.readouterr().out
