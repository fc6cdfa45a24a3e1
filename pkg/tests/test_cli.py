"""End-to-end tests of the batch command-line interface."""

import json

import numpy as np
import pytest

from nlstw import read_field
from nlstw.cli import _workers, main


def run(args):
    return main([str(a) for a in args])


def read_jsonl(path):
    return [json.loads(line) for line in path.read_text().splitlines()]


@pytest.fixture(scope="module")
def solved(tmp_path_factory):
    """One small momentum solve shared by the solve/diagnose tests."""
    out = tmp_path_factory.mktemp("solve")
    code = run(["solve", "--q", 2.0, "--L", 16, "--n", 64, "--out", out])
    assert code == 0
    return out


class TestSolve:
    def test_outputs(self, solved):
        record = json.loads((solved / "wave.json").read_text())
        assert record["problem"] == "momentum"
        assert record["q_or_k"] == pytest.approx(2.0, abs=1e-9)
        assert record["converged"] is True
        psi = read_field(solved / "wave.nlstw1")
        assert psi.grid.n1 == 64 and psi.grid.L1 == 16.0
        diag = read_jsonl(solved / "diag.jsonl")
        names = [d["name"] for d in diag]
        assert names == [
            "pohozaev",
            "pohozaev-transverse",
            "phase-scaling-balance",
            "modulus-variation-balance",
            "density-multiplier",
        ]
        assert all(d.get("passed") for d in diag)

    def test_seed_file_restart(self, solved, tmp_path):
        code = run(
            ["solve", "--q", 2.0, "--L", 16, "--n", 64,
             "--seed", f"file:{solved / 'wave.nlstw1'}", "--out", tmp_path]
        )
        assert code == 0
        rec = json.loads((tmp_path / "wave.json").read_text())
        # restarting from the converged field needs almost no work
        assert rec["iterations"] < 20

    def test_bad_seed_spec(self, tmp_path, capsys):
        assert run(["solve", "--seed", "garbage", "--out", tmp_path]) == 1
        assert "seed" in capsys.readouterr().err

    def test_nonpositive_momentum_is_a_config_error(self, tmp_path, capsys):
        assert run(["solve", "--q", -1.0, "--out", tmp_path]) == 1
        assert "positive" in capsys.readouterr().err

    def test_sign_changing_potential_rejected_for_global_problem(
        self, tmp_path, capsys
    ):
        code = run(
            ["solve", "--nl", "cubic_quintic", "--q", 0.5,
             "--L", 16, "--n", 64, "--out", tmp_path]
        )
        assert code == 1
        assert "sharp" in capsys.readouterr().err


class TestDiagnose:
    def test_roundtrip_matches_solve(self, solved, tmp_path):
        code = run(
            ["diagnose", solved / "wave.nlstw1", "--out", tmp_path]
        )
        assert code == 0
        summary = json.loads((tmp_path / "diagnose.json").read_text())
        record = json.loads((solved / "wave.json").read_text())
        for key in ("c", "E", "Q", "kinetic", "potential"):
            assert summary[key] == pytest.approx(record[key], rel=1e-12)

    def test_wrong_speed_fails_checks(self, solved, tmp_path):
        code = run(
            ["diagnose", solved / "wave.nlstw1", "--c", 0.3, "--out", tmp_path]
        )
        assert code == 3

    def test_missing_file(self, tmp_path):
        assert run(["diagnose", tmp_path / "nope.nlstw1"]) == 1


class TestCurve:
    def test_short_curve(self, tmp_path):
        code = run(
            ["curve", "--qs", "1.5,3.0,4.5", "--L", 16, "--n", 64,
             "--out", tmp_path]
        )
        assert code == 0
        lines = (tmp_path / "curve.csv").read_text().splitlines()
        assert lines[0] == "abscissa,value,speed,converged"
        assert len(lines) == 4
        first = lines[1].split(",")
        assert float(first[0]) == 1.5
        assert first[3] == "true"
        meta = json.loads((tmp_path / "curve.json").read_text())
        assert meta["family"] == "momentum"
        checks = read_jsonl(tmp_path / "checks.jsonl")
        assert all(c["passed"] for c in checks)

    def test_missing_abscissae(self, tmp_path):
        assert run(["curve", "--out", tmp_path]) == 1


class TestKP:
    def test_lump_run(self, tmp_path):
        code = run(["kp", "--out", tmp_path])
        assert code == 0
        rec = json.loads((tmp_path / "kp.json").read_text())
        assert rec["action"] == pytest.approx(0.9939, abs=2e-3)
        assert max(rec["r1"], rec["r2"], rec["r3"]) < 1e-4
        lump = read_field(tmp_path / "lump.nlstw1")
        assert lump.grid.n1 == 256

    def test_underresolved_grid_fails_identities(self, tmp_path):
        # spacing 0.625 aliases the boundary corrections
        assert run(["kp", "--L", 40, "--n", 128, "--out", tmp_path]) == 3


class TestAnsatz:
    def test_transonic_table(self, tmp_path):
        code = run(
            ["ansatz", "transonic", "--L", 30, "--n", 128, "--eps", 0.1,
             "--out", tmp_path]
        )
        assert code == 0
        lines = (tmp_path / "expansion.csv").read_text().splitlines()
        assert lines[0].startswith("eps,energy,momentum,excess")
        rows = [list(map(float, ln.split(","))) for ln in lines[1:]]
        assert [r[0] for r in rows] == [0.1, 0.05, 0.025]
        # cubic excess coefficients agree across the ladder
        assert rows[0][4] == pytest.approx(rows[2][4], rel=0.1)
        # measured momentum tracks its predicted expansion
        for r in rows:
            assert r[2] == pytest.approx(r[5], rel=1e-2)

    def test_modulation_table(self, tmp_path):
        code = run(
            ["ansatz", "modulation", "--L", 16, "--n", 64, "--out", tmp_path]
        )
        assert code == 0
        assert (tmp_path / "ansatz.nlstw1").exists()


class TestConfigHandling:
    def test_toml_with_flag_override(self, tmp_path):
        cfg = tmp_path / "run.toml"
        cfg.write_text(
            "[grid]\nL = 16.0\nn = 64\n[problem]\nq = 1.5\n"
        )
        out = tmp_path / "out"
        code = run(["solve", cfg, "--q", 2.0, "--out", out])
        assert code == 0
        rec = json.loads((out / "wave.json").read_text())
        assert rec["q_or_k"] == pytest.approx(2.0, abs=1e-9)

    def test_unknown_key_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "run.toml"
        cfg.write_text("[grid]\nspacing = 0.5\n")
        assert run(["solve", cfg]) == 1
        assert "unknown key" in capsys.readouterr().err

    def test_unknown_section_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "run.toml"
        cfg.write_text("[mesh]\nn = 64\n")
        assert run(["solve", cfg]) == 1
        assert "unknown config section" in capsys.readouterr().err

    def test_malformed_toml_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "run.toml"
        cfg.write_text("[grid\nn = 64\n")
        assert run(["solve", cfg]) == 1
        assert "malformed" in capsys.readouterr().err

    def test_worker_count_from_environment(self, monkeypatch):
        monkeypatch.setenv("NLSTW_THREADS", "4")
        assert _workers() == 4
        monkeypatch.setenv("NLSTW_THREADS", "zero")
        assert _workers() == 1
        monkeypatch.delenv("NLSTW_THREADS")
        assert _workers() == 1
