"""The command line driver and the kernel-table disk cache."""

import json
import os
import warnings

import pytest

from extsobolev import __version__, cache
from extsobolev.cli import EXPERIMENTS, main


ALL_EXPERIMENTS = ["counterexample-71", "counterexample-72",
                   "equivalence-sweep", "hardy-sweep", "heat-verify",
                   "lp-verify", "riesz-verify", "schur"]


class TestList:
    def test_lists_all_experiments(self, capsys):
        assert main(["list"]) == 0
        out = capsys.readouterr().out
        for name in ALL_EXPERIMENTS:
            assert name in out
        assert sorted(EXPERIMENTS) == ALL_EXPERIMENTS

    def test_statements_are_nonempty(self, capsys):
        main(["list"])
        lines = [l for l in capsys.readouterr().out.splitlines() if l.strip()]
        assert len(lines) == len(ALL_EXPERIMENTS)
        for line in lines:
            name, _, statement = line.partition("  ")
            assert statement.strip()


class TestConfigErrors:
    def test_unknown_experiment(self, capsys):
        assert main(["run", "no-such-thing"]) == 2
        assert "unknown experiment" in capsys.readouterr().err

    def test_bad_config_file_reports_line_numbers(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("# comment\nd = 3\n\nbogus = 1\np = fast\n")
        rc = main(["run", "equivalence-sweep", "--config", str(cfg),
                   "--out", str(tmp_path / "out")])
        assert rc == 2
        err = capsys.readouterr().err
        assert f"{cfg}:4" in err and "bogus" in err
        assert f"{cfg}:5" in err

    def test_bad_override(self, capsys):
        rc = main(["run", "equivalence-sweep", "not-a-pair"])
        assert rc == 2
        assert "expected key=value" in capsys.readouterr().err

    def test_precondition_violation(self, capsys):
        # the truncated-mode schedule needs p > d
        rc = main(["run", "counterexample-72", "p=3.0"])
        assert rc == 2
        assert "precondition" in capsys.readouterr().err

    def test_overrides_accepted_after_options(self, tmp_path, capsys):
        rc = main(["run", "counterexample-72", "--out",
                   str(tmp_path / "x"), "p=3.0"])
        assert rc == 2  # the override was parsed, then failed the check
        assert "precondition" in capsys.readouterr().err


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("eqrun") / "out"
    rc = main(["run", "equivalence-sweep", "--out", str(out), "n_family=2"])
    assert rc == 0
    return out


class TestRunOutputs:
    def test_report_shape(self, run_dir):
        report = json.loads((run_dir / "report.json").read_text())
        assert report["experiment"] == "equivalence-sweep"
        assert report["statement"]
        assert report["version"] == __version__
        assert report["config"]["n_family"] == 2
        assert report["all_passed"] is True
        assert report["invariants"]
        for inv in report["invariants"]:
            assert inv["passed"] is True

    def test_tables_plotdata_figures_manifest(self, run_dir):
        manifest = json.loads((run_dir / "manifest.json").read_text())
        assert manifest["files"] == sorted(manifest["files"])
        for rel in manifest["files"]:
            assert (run_dir / rel).is_file()
        assert any(f.startswith("tables/") and f.endswith(".csv")
                   for f in manifest["files"])
        assert any(f.startswith("plotdata/") and f.endswith(".dat")
                   for f in manifest["files"])
        assert any(f.startswith("figures/") and f.endswith(".png")
                   for f in manifest["files"])
        assert "timings_seconds" in manifest
        assert manifest["config_hash"]

    def test_report_has_no_timestamps(self, run_dir):
        # timings live in the manifest so the report stays deterministic
        text = (run_dir / "report.json").read_text()
        assert "time" not in text and "seconds" not in text

    def test_rerun_is_byte_identical(self, run_dir, tmp_path, capsys):
        out2 = tmp_path / "out2"
        assert main(["run", "equivalence-sweep", "--out", str(out2),
                     "n_family=2"]) == 0
        assert ((run_dir / "report.json").read_bytes()
                == (out2 / "report.json").read_bytes())


class TestInvariantFailure:
    def test_short_schedule_fails_named_invariant(self, tmp_path, capsys):
        rc = main(["run", "counterexample-72", "--out", str(tmp_path / "o"),
                   "n_lo=5", "n_hi=8", "tail_from_n=5"])
        assert rc == 1
        captured = capsys.readouterr()
        assert "invariant failed: B-decreases-tenfold" in captured.err
        assert "[FAIL] B-decreases-tenfold" in captured.out
        # outputs are still written so the failure can be inspected
        report = json.loads((tmp_path / "o" / "report.json").read_text())
        assert report["all_passed"] is False


class TestCache:
    def test_publish_fetch_roundtrip(self):
        key = cache.cache_key("demo", {"a": 1, "b": [0.1, 0.2]})
        assert cache.fetch(key) is None
        table = {"values": [1.0, 0.30000000000000004], "n": 3}
        cache.publish(key, table)
        assert cache.fetch(key) == table

    def test_key_depends_on_params_and_version(self):
        a = cache.cache_key("demo", {"a": 1})
        b = cache.cache_key("demo", {"a": 2})
        c = cache.cache_key("other", {"a": 1})
        assert len({a, b, c}) == 3
        payload = json.dumps({"version": __version__, "name": "demo",
                              "params": {"a": 1}},
                             sort_keys=True, separators=(",", ":"))
        import hashlib
        assert a == hashlib.sha256(payload.encode()).hexdigest()

    def test_cached_computes_once(self):
        calls = []

        def compute():
            calls.append(1)
            return {"x": 1.5}

        assert cache.cached("tab", {"k": 1}, compute) == {"x": 1.5}
        assert cache.cached("tab", {"k": 1}, compute) == {"x": 1.5}
        assert len(calls) == 1

    def test_corrupt_entry_warns_and_recomputes(self):
        key = cache.cache_key("tab", {"k": 2})
        cache.publish(key, {"x": 7})
        path = cache.cache_root() / f"{key}.json"
        path.write_text("{not json")
        with pytest.warns(UserWarning, match="corrupt cache entry"):
            out = cache.cached("tab", {"k": 2}, lambda: {"x": 8})
        assert out == {"x": 8}
        # the recomputed table was republished cleanly
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            assert cache.fetch(key) == {"x": 8}

    def test_key_header_mismatch_discarded(self):
        key = cache.cache_key("tab", {"k": 3})
        other = cache.cache_key("tab", {"k": 4})
        cache.publish(other, {"x": 9})
        path = cache.cache_root() / f"{key}.json"
        path.write_text((cache.cache_root() / f"{other}.json").read_text())
        with pytest.warns(UserWarning, match="key header mismatch"):
            assert cache.fetch(key) is None

    def test_env_override_and_no_temp_leftovers(self, tmp_path, monkeypatch):
        monkeypatch.setenv(cache.ENV_VAR, str(tmp_path / "alt"))
        assert cache.cache_root() == tmp_path / "alt"
        cache.publish(cache.cache_key("t", {}), {"v": 1})
        names = os.listdir(tmp_path / "alt")
        assert len(names) == 1 and names[0].endswith(".json")
