import json
import subprocess
import sys

import numpy as np
import pytest

from interlaced.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_IO, EXIT_OK, main, run


def write_config(tmp_path, name, cfg):
    p = tmp_path / f"{name}.json"
    p.write_text(json.dumps(cfg))
    return str(p)


def read_csv(path):
    lines = open(path).read().splitlines()
    comments = [l for l in lines if l.startswith("#")]
    body = [l for l in lines if not l.startswith("#")]
    return comments, body[0].split(","), [list(map(float, l.split(","))) for l in body[1:]]


class TestSample:
    def test_deterministic_bytes(self, tmp_path):
        out = tmp_path / "a.csv"
        cfg = write_config(tmp_path, "s", {"class": "A", "n": 1, "sampleCount": 10, "seed": 4,
                                           "output": str(out)})
        assert run("sample", cfg) == EXIT_OK
        first = out.read_bytes()
        assert run("sample", cfg) == EXIT_OK
        assert out.read_bytes() == first
        comments, cols, rows = read_csv(out)
        assert cols == ["L1_1"] and len(rows) == 10
        assert any("config-sha256" in c for c in comments)
        assert any(c == "# seed 4" for c in comments)

    def test_seed_override_changes_output(self, tmp_path):
        out = tmp_path / "a.csv"
        cfg = write_config(tmp_path, "s", {"class": "A", "n": 1, "sampleCount": 5, "seed": 4,
                                           "output": str(out)})
        run("sample", cfg)
        a = out.read_bytes()
        run("sample", cfg, seed=5)
        assert out.read_bytes() != a

    def test_b2_columns(self, tmp_path):
        out = tmp_path / "b.csv"
        cfg = write_config(tmp_path, "s", {"class": "B", "n": 2, "sampleCount": 3, "seed": 1,
                                           "output": str(out)})
        assert run("sample", cfg) == EXIT_OK
        _, cols, rows = read_csv(out)
        assert len(cols) == 6 and all(len(r) == 6 for r in rows)
        assert all(v >= 0 for r in rows for v in r)

    def test_zero_samples(self, tmp_path):
        out = tmp_path / "z.csv"
        cfg = write_config(tmp_path, "s", {"class": "D", "n": 2, "sampleCount": 0, "seed": 1,
                                           "output": str(out)})
        assert run("sample", cfg) == EXIT_OK
        _, cols, rows = read_csv(out)
        assert cols == ["L1_1", "L2_1", "L3_1", "L3_2"] and rows == []

    @pytest.mark.parametrize("extra,ncols", [({"source": "gibbs", "lambda": [2, 1]}, 6),
                                             ({"source": "fixed-orbit", "lambda": [2, -1], "what": "minors"}, 4),
                                             ({"source": "sumC", "steps": 3}, 6)])
    def test_sources(self, tmp_path, extra, ncols):
        out = tmp_path / "x.csv"
        tag = {"gibbs": "B", "fixed-orbit": "D", "sumC": "C"}[extra["source"]]
        cfg = write_config(tmp_path, "s", {"class": tag, "n": 2, "sampleCount": 4, "seed": 1,
                                           "output": str(out), **extra})
        assert run("sample", cfg) == EXIT_OK
        _, cols, rows = read_csv(out)
        assert len(cols) == ncols and len(rows) == 4

    def test_invalid_config_leaves_no_file(self, tmp_path, capsys):
        out = tmp_path / "never.csv"
        cfg = write_config(tmp_path, "s", {"class": "Q", "n": 2, "sampleCount": 4, "seed": 1,
                                           "output": str(out)})
        assert run("sample", cfg) == EXIT_CONFIG
        assert not out.exists()
        assert "class" in capsys.readouterr().err
        assert list(tmp_path.iterdir()) == [tmp_path / "s.json"]

    def test_missing_seed(self, tmp_path):
        cfg = write_config(tmp_path, "s", {"class": "A", "n": 1, "sampleCount": 1,
                                           "output": str(tmp_path / "o.csv")})
        assert run("sample", cfg) == EXIT_CONFIG

    def test_unwritable(self, tmp_path):
        cfg = write_config(tmp_path, "s", {"class": "A", "n": 1, "sampleCount": 1, "seed": 0,
                                           "output": str(tmp_path / "missing" / "o.csv")})
        assert run("sample", cfg) == EXIT_IO


class TestKernelGrid:
    def test_a1(self, tmp_path):
        out = tmp_path / "k.csv"
        cfg = write_config(tmp_path, "k", {"class": "A", "n": 1, "seed": 0, "output": str(out),
                                           "grid": {"r": [1], "y": {"min": -1, "max": 1, "step": 1}}})
        assert run("kernel-grid", cfg) == EXIT_OK
        _, cols, rows = read_csv(out)
        assert cols == ["r", "y", "s", "z", "R"] and len(rows) == 3
        for r, y, s, z, R in rows:
            assert R == pytest.approx(np.exp(-y * y) / np.sqrt(np.pi), abs=1e-14)

    def test_lexicographic_order(self, tmp_path):
        out = tmp_path / "k.csv"
        cfg = write_config(tmp_path, "k", {"class": "B", "n": 1, "seed": 0, "output": str(out),
                                           "kernelMode": "generic",
                                           "grid": {"r": [1, 2], "s": [1, 2], "y": {"min": 0, "max": 1, "step": 0.5},
                                                    "z": {"min": 0, "max": 1, "step": 0.5}}})
        assert run("kernel-grid", cfg) == EXIT_OK
        _, _, rows = read_csv(out)
        keys = [tuple(r[:4]) for r in rows]
        assert len(keys) == 36
        assert keys == sorted(keys, key=lambda k: (k[0], k[1], k[2], k[3]))

    def test_empty_grid(self, tmp_path):
        out = tmp_path / "k.csv"
        cfg = write_config(tmp_path, "k", {"class": "A", "n": 1, "seed": 0, "output": str(out),
                                           "grid": {"r": [1], "y": {"min": 1, "max": 0, "step": 1}}})
        assert run("kernel-grid", cfg) == EXIT_OK
        _, cols, rows = read_csv(out)
        assert rows == [] and cols[-1] == "R"

    def test_corollary_note(self, tmp_path):
        out = tmp_path / "k.csv"
        cfg = write_config(tmp_path, "k", {"class": "A", "n": 7, "seed": 0, "output": str(out),
                                           "kernelMode": "corollary",
                                           "grid": {"r": [1, 3], "y": {"min": 0, "max": 1, "step": 0.5}}})
        assert run("kernel-grid", cfg) == EXIT_OK
        comments, _, rows = read_csv(out)
        assert any("class and rank fields are ignored" in c for c in comments)
        assert len(rows) == 6

    @pytest.mark.parametrize("mode,extra", [("deterministic", {"lambda": [1.0, 0.0]}), ("eynard-mehta", {})])
    def test_modes(self, tmp_path, mode, extra):
        out = tmp_path / "k.csv"
        tag = "A" if mode == "deterministic" else "B"
        cfg = write_config(tmp_path, "k", {"class": tag, "n": 2 if tag == "A" else 1, "seed": 0,
                                           "output": str(out), "kernelMode": mode, **extra,
                                           "grid": {"r": [1], "y": {"min": 0.1, "max": 0.9, "step": 0.4}}})
        assert run("kernel-grid", cfg) == EXIT_OK
        _, _, rows = read_csv(out)
        assert len(rows) == 3 and all(np.isfinite(r[-1]) for r in rows)

    def test_incompatible_mode(self, tmp_path):
        cfg = write_config(tmp_path, "k", {"class": "C", "n": 1, "seed": 0, "output": str(tmp_path / "k.csv"),
                                           "kernelMode": "eynard-mehta",
                                           "grid": {"r": [1], "y": {"min": 0, "max": 1, "step": 1}}})
        assert run("kernel-grid", cfg) == EXIT_CONFIG

    def test_bad_step(self, tmp_path):
        cfg = write_config(tmp_path, "k", {"class": "A", "n": 1, "seed": 0, "output": str(tmp_path / "k.csv"),
                                           "grid": {"r": [1], "y": {"min": 0, "max": 1, "step": 0}}})
        assert run("kernel-grid", cfg) == EXIT_CONFIG


class TestVerify:
    def test_a1_default(self, tmp_path):
        out = tmp_path / "v.json"
        tol = {"zLimit": 3, "acceptFraction": 0.95}
        cfg = write_config(tmp_path, "v", {"class": "A", "n": 1, "sampleCount": 100000, "seed": 21,
                                           "output": str(out), "tolerances": tol})
        assert run("verify", cfg) == EXIT_OK
        rep = json.loads(out.read_text())
        assert rep["seed"] == 21 and rep["tolerances"] == tol
        assert rep["schemaVersion"] == 1 and len(rep["configSha256"]) == 64
        assert len(rep["queries"]) == 20

    def test_overlapping_query(self, tmp_path):
        cfg = write_config(tmp_path, "v", {"class": "A", "n": 1, "sampleCount": 1000, "seed": 0,
                                           "output": str(tmp_path / "report.json"),
                                           "queries": [[[1, 0.0, 0.2], [1, 0.05, 0.2]]]})
        assert run("verify", cfg) == EXIT_CONFIG
        assert not (tmp_path / "report.json").exists()

    def test_failure_exit(self, tmp_path):
        # an impossible acceptance fraction must fail
        cfg = write_config(tmp_path, "v", {"class": "A", "n": 1, "sampleCount": 1000, "seed": 0,
                                           "output": str(tmp_path / "report.json"),
                                           "queries": [[[1, 0.0, 0.2]]], "tolerances": {"zLimit": 1e-9}})
        assert run("verify", cfg) == EXIT_FAIL


class TestHeckman:
    def test_u2_monotone(self, tmp_path):
        out = tmp_path / "h.csv"
        ns = [1, 2, 5, 10]
        cfg = write_config(tmp_path, "h", {"lambdaSequence": [[n, 0] for n in ns],
                                           "epsilonSequence": [1 / n for n in ns], "x": [1, 0],
                                           "samples": 50000, "seed": 2, "output": str(out)})
        assert run("heckman", cfg) == EXIT_OK
        _, cols, rows = read_csv(out)
        w1 = [r[cols.index("w1")] for r in rows]
        assert len(rows) == 4 and all(a >= b for a, b in zip(w1[:-1], w1[1:]))

    def test_single_and_zero(self, tmp_path):
        out = tmp_path / "h.csv"
        cfg = write_config(tmp_path, "h", {"lambdaSequence": [[0, 0, 0]], "epsilonSequence": [0.5],
                                           "x": [0, 0, 0], "samples": 100, "seed": 2, "output": str(out)})
        assert run("heckman", cfg) == EXIT_OK
        _, cols, rows = read_csv(out)
        assert len(rows) == 1 and rows[0][cols.index("w1")] == 0

    def test_mismatch(self, tmp_path):
        cfg = write_config(tmp_path, "h", {"lambdaSequence": [[1, 0]], "epsilonSequence": [1, 2],
                                           "x": [1, 0], "samples": 10, "seed": 0,
                                           "output": str(tmp_path / "h.csv")})
        assert run("heckman", cfg) == EXIT_CONFIG


def test_em_check(tmp_path):
    out = tmp_path / "e.json"
    cfg = write_config(tmp_path, "e", {"n": 1, "seed": 0, "output": str(out),
                                       "tolerances": {"kernel": 1e-5, "trace": 1e-4}})
    assert run("em-check", cfg) == EXIT_OK
    rep = json.loads(out.read_text())
    assert rep["accepted"] and rep["maxKernelDiff"] <= 1e-5


def test_main_and_module_entry(tmp_path):
    out = tmp_path / "m.csv"
    cfg = write_config(tmp_path, "m", {"class": "C", "n": 1, "sampleCount": 2, "seed": 0, "output": str(out)})
    assert main(["sample", cfg]) == EXIT_OK
    first = out.read_bytes()
    proc = subprocess.run([sys.executable, "-m", "interlaced", "sample", cfg], capture_output=True)
    assert proc.returncode == 0 and out.read_bytes() == first
    with pytest.raises(SystemExit):
        main(["frobnicate", cfg])
