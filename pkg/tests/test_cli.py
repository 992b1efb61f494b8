import numpy as np
import pytest

from sketchsim.cli import main
from sketchsim.harness import CSV_HEADER, read_stream


class TestGenZipf:
    def test_writes_binary_stream(self, tmp_path, capsys):
        out = tmp_path / "stream.bin"
        rc = main(
            [
                "gen-zipf",
                "--n-items", "1000",
                "--n-distinct", "100",
                "--alpha", "0.8",
                "--seed", "5",
                "--out", str(out),
            ]
        )
        assert rc == 0
        stream = read_stream(str(out), "binary")
        assert len(stream) == 1000
        assert "wrote 1000 items" in capsys.readouterr().out

    def test_split_pair(self, tmp_path):
        out_a, out_b = tmp_path / "a.bin", tmp_path / "b.bin"
        rc = main(
            [
                "gen-zipf",
                "--n-items", "2000",
                "--n-distinct", "100",
                "--seed", "1",
                "--split-p", "0.5",
                "--out-a", str(out_a),
                "--out-b", str(out_b),
            ]
        )
        assert rc == 0
        a = read_stream(str(out_a), "binary")
        b = read_stream(str(out_b), "binary")
        assert len(a) + len(b) == 2000

    def test_split_without_paths_fails(self, tmp_path):
        rc = main(
            [
                "gen-zipf",
                "--n-items", "10",
                "--n-distinct", "5",
                "--split-p", "0.5",
            ]
        )
        assert rc == 2

    def test_deterministic(self, tmp_path):
        paths = [tmp_path / "s1.bin", tmp_path / "s2.bin"]
        for p in paths:
            main(
                [
                    "gen-zipf",
                    "--n-items", "500",
                    "--n-distinct", "50",
                    "--seed", "9",
                    "--out", str(p),
                ]
            )
        assert paths[0].read_bytes() == paths[1].read_bytes()


class TestEstimate:
    def test_synthetic_cell_prints_csv(self, capsys):
        rc = main(
            [
                "estimate",
                "--algo", "cm",
                "--memory-bytes", "4096",
                "--rows", "2",
                "--n-items", "5000",
                "--n-distinct", "500",
            ]
        )
        assert rc == 0
        lines = capsys.readouterr().out.strip().split("\n")
        assert lines[0] == CSV_HEADER
        cells = lines[1].split(",")
        assert cells[0] == "cm"
        assert 0.0 <= float(cells[8]) <= 1.0

    def test_file_cell(self, tmp_path, capsys):
        rng = np.random.default_rng(3)
        for name in ("a", "b"):
            stream = rng.integers(0, 40, size=1000, dtype="<u8")
            (tmp_path / f"{name}.bin").write_bytes(stream.tobytes())
        rc = main(
            [
                "estimate",
                "--algo", "weighted",
                "--memory-bytes", "8192",
                "--stream-a", str(tmp_path / "a.bin"),
                "--stream-b", str(tmp_path / "b.bin"),
                "--format", "binary",
            ]
        )
        assert rc == 0
        lines = capsys.readouterr().out.strip().split("\n")
        assert lines[1].split(",")[0] == "weighted"


class TestSweep:
    def test_config_sweep_with_csv(self, tmp_path, capsys):
        cfg = tmp_path / "sweep.cfg"
        cfg.write_text(
            "algos = cm, count\n"
            "memory_bytes = 2048, 4096\n"
            "rows = 1\n"
            "seeds = 0, 1\n"
            "n_items = 3000\n"
            "n_distinct = 300\n"
        )
        out = tmp_path / "out.csv"
        rc = main(["sweep", "--config", str(cfg), "--csv", str(out)])
        assert rc == 0
        printed = capsys.readouterr().out
        assert "algo=cm" in printed and "algo=count" in printed
        lines = out.read_text().strip().split("\n")
        assert lines[0] == CSV_HEADER
        assert len(lines) == 1 + 2 * 2 * 2


class TestSelftest:
    def test_all_checks_pass(self, capsys):
        rc = main(["selftest"])
        out = capsys.readouterr().out
        assert rc == 0
        assert "FAIL" not in out
        assert out.count("PASS") == 10
