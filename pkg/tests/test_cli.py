"""End-to-end command line behavior: flags, outputs, files, exit codes."""

import gzip
import hashlib
import os

import pytest

from instances import broken_adjoint_problem
from gapmin import ingestion
from gapmin.cli import (
    ALGO_IDS,
    EXIT_BUDGET,
    EXIT_CHECK,
    EXIT_OK,
    EXIT_USAGE,
    iterations_to_tol,
    main,
)
from gapmin.history import read_history
from gapmin.algorithms import ConvergenceRecord

CBF_TEXT = """VER
3

OBJSENSE
MIN

VAR
3 1
L+ 3

CON
3 1
L= 3

OBJACOORD
1
0 1.0

ACOORD
3
0 0 1.0
1 1 1.0
2 2 1.0

BCOORD
1
0 1.0
"""


def _line(out, prefix):
    hits = [ln for ln in out.splitlines() if ln.startswith(prefix)]
    assert hits, f"no line starting with {prefix!r} in:\n{out}"
    return hits[0]


class TestArgHandling:
    def test_no_command(self, capsys):
        assert main([]) == EXIT_USAGE
        assert "usage error:" in capsys.readouterr().err

    def test_unknown_algo(self, capsys):
        assert main(["solve", "--algo", "newton"]) == EXIT_USAGE
        assert "usage error:" in capsys.readouterr().err

    def test_unknown_flag(self, capsys):
        assert main(["solve", "--frobnicate"]) == EXIT_USAGE

    def test_missing_problem_file(self, capsys):
        assert main(["solve", "--problem", "no/such/file.txt"]) == EXIT_USAGE
        assert "error:" in capsys.readouterr().err

    def test_bad_stride(self, capsys):
        assert main(["solve", "--stride", "0", "--max-iters", "1"]) == EXIT_USAGE
        assert "error:" in capsys.readouterr().err


class TestSolve:
    def test_default_problem_runs(self, capsys):
        assert main(["solve", "--max-iters", "50"]) == EXIT_OK
        out = capsys.readouterr().out
        assert _line(out, "problem:") == "problem: n=4 m=3 nnz=12 sense=min"
        assert _line(out, "algo:") == "algo: rapg"
        assert _line(out, "iterations:") == "iterations: 50"
        assert _line(out, "converged:") == "converged: False"

    def test_tol_inf_converges_immediately(self, capsys):
        assert main(["solve", "--tol", "inf", "--max-iters", "50"]) == EXIT_OK
        out = capsys.readouterr().out
        assert _line(out, "iterations:") == "iterations: 0"
        assert _line(out, "converged:") == "converged: True"

    def test_budget_exhausted_exit(self, capsys):
        rc = main(["solve", "--tol", "1e-30", "--max-iters", "5"])
        assert rc == EXIT_BUDGET
        assert "converged: False" in capsys.readouterr().out

    def test_tight_tol_with_room_converges(self, capsys):
        rc = main(["solve", "--algo", "rapg", "--tol", "1e-9",
                   "--max-iters", "5000"])
        assert rc == EXIT_OK
        assert "converged: True" in capsys.readouterr().out

    @pytest.mark.parametrize("algo", ALGO_IDS)
    def test_every_algorithm_id(self, algo, capsys):
        assert main(["solve", "--algo", algo, "--max-iters", "10"]) == EXIT_OK
        assert f"algo: {algo}" in capsys.readouterr().out

    def test_history_file(self, tmp_path, capsys):
        path = str(tmp_path / "run.csv")
        assert main(["solve", "--algo", "pg", "--max-iters", "12",
                     "--history", path]) == EXIT_OK
        data = read_history(path)
        assert data["algo"] == ["pg"] * 13
        assert data["iter"] == list(range(13))
        assert f"history: {path}" in capsys.readouterr().out

    def test_stride_thins_history(self, tmp_path):
        path = str(tmp_path / "run.csv")
        main(["solve", "--max-iters", "10", "--stride", "4", "--history", path])
        assert read_history(path)["iter"] == [0, 4, 8, 10]

    def test_parse_warnings_go_to_stderr(self, tmp_path, capsys):
        problem = tmp_path / "dup.txt"
        problem.write_text("OBJ\nmin\n\nVARS\nnonneg 1\n\nROWS\n1\n\n"
                           "TRIPLETS\n0 0 1.0\n0 0 1.0\n\nCONES\nzero 1\n")
        assert main(["solve", "--problem", str(problem),
                     "--max-iters", "1"]) == EXIT_OK
        err = capsys.readouterr().err
        assert "warning: line 12: triplet (0, 0) repeated; values sum" in err

    def test_cbf_problem_accepted(self, tmp_path, capsys):
        problem = tmp_path / "tiny.cbf"
        problem.write_text(CBF_TEXT)
        assert main(["solve", "--problem", str(problem),
                     "--max-iters", "5"]) == EXIT_OK
        assert "problem: n=3 m=3 nnz=3" in capsys.readouterr().out


class TestBench:
    def test_zero_budget(self, tmp_path, capsys):
        hist = str(tmp_path / "hist")
        rc = main(["bench", "--max-iters", "0", "--history", hist])
        assert rc == EXIT_BUDGET
        out = capsys.readouterr().out
        for algo in ALGO_IDS:
            per_algo = os.path.join(hist, f"{algo}.csv")
            assert read_history(per_algo)["iter"] == [0]
            assert f"\n{algo:<8} {'-':>12}" in out
        merged = read_history(os.path.join(hist, "merged.csv"))
        assert merged["algo"] == list(ALGO_IDS)
        report = read_history(os.path.join(hist, "report.csv"))
        assert len(report["gap_report"]) == 5

    def test_full_bench_reaches_tol(self, tmp_path, capsys):
        hist = str(tmp_path / "hist")
        rc = main(["bench", "--max-iters", "400", "--history", hist,
                   "--report-tol", "1e-6"])
        assert rc == EXIT_OK
        out = capsys.readouterr().out
        assert "report_beta:" in out
        merged = read_history(os.path.join(hist, "merged.csv"))
        assert set(merged["algo"]) == set(ALGO_IDS)
        # every row in the table reports an iteration count, not "-"
        for algo in ALGO_IDS:
            row = _line(out, algo).split()
            assert row[1].isdigit(), row

    def test_report_beta_override(self, capsys):
        rc = main(["bench", "--max-iters", "0", "--report-beta", "0.125"])
        assert rc == EXIT_BUDGET
        assert _line(capsys.readouterr().out, "report_beta:") == "report_beta: 0.125"


class TestIterationsToTol:
    def _rec(self, k, gap, report=None):
        return ConvergenceRecord(iter=k, elapsed_s=0.0, gap_beta0=gap,
                                 gap_betak=gap, step_norm=0.0, restarted=False,
                                 epoch=0, gap_report=report)

    def test_uses_report_gap_when_present(self):
        records = [self._rec(0, 1.0, 1.0), self._rec(3, 1.0, 1e-8)]
        assert iterations_to_tol(records, 1e-6) == 3

    def test_falls_back_to_gap_beta0(self):
        records = [self._rec(0, 1.0), self._rec(2, 1e-7)]
        assert iterations_to_tol(records, 1e-6) == 2

    def test_none_when_unreached(self):
        assert iterations_to_tol([self._rec(0, 1.0)], 1e-6) is None


class TestCheck:
    def test_sound_problem_passes(self, capsys):
        assert main(["check"]) == EXIT_OK
        out = capsys.readouterr().out
        assert out.count("  ok  ") == 8
        assert "FAIL" not in out

    def test_broken_problem_fails(self, capsys, monkeypatch):
        monkeypatch.setattr(ingestion, "to_saddle",
                            lambda program: broken_adjoint_problem())
        assert main(["check"]) == EXIT_CHECK
        captured = capsys.readouterr()
        assert "FAIL" in captured.out
        assert "failed checks:" in captured.err
        assert "adjoint" in captured.err


class TestFetch:
    def _seed_cache(self, tmp_path, monkeypatch):
        cache = tmp_path / "cache"
        cache.mkdir()
        (cache / "qssp30.cbf").write_text(CBF_TEXT)
        monkeypatch.setenv("GAPMIN_CACHE_DIR", str(cache))
        return hashlib.sha256(CBF_TEXT.encode()).hexdigest()

    def test_reuses_existing_file(self, tmp_path, monkeypatch, capsys):
        digest = self._seed_cache(tmp_path, monkeypatch)
        # url is unreachable on purpose; the cached file short-circuits it
        rc = main(["fetch-qssp30", "--url", "file:///nonexistent.gz"])
        assert rc == EXIT_OK
        out = capsys.readouterr().out
        assert _line(out, "sha256:") == f"sha256: {digest}"
        assert "parsed: n=3 m=3 nnz=3" in out
        assert "note: pass --sha256" in out

    def test_pinned_digest_accepted(self, tmp_path, monkeypatch, capsys):
        digest = self._seed_cache(tmp_path, monkeypatch)
        rc = main(["fetch-qssp30", "--url", "file:///nonexistent.gz",
                   "--sha256", digest])
        assert rc == EXIT_OK
        assert "note:" not in capsys.readouterr().out

    def test_digest_mismatch(self, tmp_path, monkeypatch, capsys):
        self._seed_cache(tmp_path, monkeypatch)
        rc = main(["fetch-qssp30", "--url", "file:///nonexistent.gz",
                   "--sha256", "0" * 64])
        assert rc == EXIT_CHECK
        assert "sha256 mismatch" in capsys.readouterr().err

    def test_download_decompresses_gz(self, tmp_path, monkeypatch, capsys):
        source = tmp_path / "payload.cbf.gz"
        source.write_bytes(gzip.compress(CBF_TEXT.encode()))
        dest = tmp_path / "dest"
        rc = main(["fetch-qssp30", "--dest", str(dest),
                   "--url", f"file://{source}"])
        assert rc == EXIT_OK
        assert (dest / "qssp30.cbf").read_text() == CBF_TEXT
        assert "parsed: n=3 m=3 nnz=3" in capsys.readouterr().out

    def test_unreachable_url_is_reported(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("GAPMIN_CACHE_DIR", str(tmp_path / "empty"))
        rc = main(["fetch-qssp30", "--url", "file:///nonexistent.gz"])
        assert rc == EXIT_USAGE
        assert "download failed" in capsys.readouterr().err
