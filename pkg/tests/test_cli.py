"""Command-line interface tests: exit codes, artifacts, loopback transport."""

import json
import socket
import threading
import time

import pytest

from ndcsim import presets, tagio
from ndcsim.cli import main
from ndcsim.config import dump_config


@pytest.fixture(scope="module")
def sim_dir(tmp_path_factory):
    """One short jitter-floor simulation shared by the command tests."""
    d = tmp_path_factory.mktemp("cli")
    cfg_path = d / "run.cfg"
    cfg_path.write_text(dump_config(presets.fig2a_config(duration_s=1.0)))
    rc = main(["simulate", "--config", str(cfg_path), "--out", str(d / "run"), "--seed", "7"])
    assert rc == 0
    return d


class TestSimulate:
    def test_outputs_and_manifest(self, sim_dir):
        for suffix in ("a.tags", "b.tags", "manifest.json"):
            assert (sim_dir / f"run_{suffix}").exists()
        manifest = json.loads((sim_dir / "run_manifest.json").read_text())
        assert manifest["seed"] == 7
        assert manifest["config"]["run"]["duration_s"] == 1.0
        assert manifest["tags"]["a"] > 0

    def test_repeat_seed_identical_files(self, sim_dir, tmp_path):
        rc = main(["simulate", "--config", str(sim_dir / "run.cfg"),
                   "--out", str(tmp_path / "again"), "--seed", "7"])
        assert rc == 0
        for suffix in ("a", "b"):
            assert ((tmp_path / f"again_{suffix}.tags").read_bytes()
                    == (sim_dir / f"run_{suffix}.tags").read_bytes())

    def test_missing_key_exit_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.cfg"
        bad.write_text(dump_config(presets.fig2a_config()).replace("pair_rate_hz", "pare_rate_hz"))
        rc = main(["simulate", "--config", str(bad), "--out", str(tmp_path / "x")])
        assert rc == 2
        assert "pair_rate_hz" in capsys.readouterr().err

    def test_missing_config_exit_2(self, tmp_path):
        rc = main(["simulate", "--config", str(tmp_path / "absent.cfg"),
                   "--out", str(tmp_path / "x")])
        assert rc == 2


class TestCorrelateAnalyze:
    def test_correlate_writes_histogram(self, sim_dir, capsys):
        rc = main(["correlate", str(sim_dir / "run_a.tags"), str(sim_dir / "run_b.tags"),
                   "--out", str(sim_dir / "hist.csv")])
        assert rc == 0
        out = capsys.readouterr().out
        assert "recovered_offset_fs" in out
        assert "fwhm_ps" in out
        assert (sim_dir / "hist.csv").exists()

    def test_analyze_histogram_csv(self, sim_dir, capsys):
        rc = main(["analyze", str(sim_dir / "hist.csv")])
        assert rc == 0
        assert "sigma_ps" in capsys.readouterr().out

    def test_independent_streams_exit_3(self, sim_dir, tmp_path, capsys):
        rc = main(["simulate", "--config", str(sim_dir / "run.cfg"),
                   "--out", str(tmp_path / "other"), "--seed", "8"])
        assert rc == 0
        rc = main(["correlate", str(sim_dir / "run_a.tags"),
                   str(tmp_path / "other_b.tags")])
        assert rc == 3
        assert "no peak" in capsys.readouterr().err


class TestWasak:
    def test_verdict_printed(self, sim_dir, tmp_path, capsys):
        cfg_path = tmp_path / "disp.cfg"
        cfg_path.write_text(dump_config(presets.fig2d_config(duration_s=2.0)))
        rc = main(["simulate", "--config", str(cfg_path), "--out", str(tmp_path / "disp"),
                   "--seed", "7"])
        assert rc == 0
        capsys.readouterr()
        rc = main(["wasak",
                   str(sim_dir / "run_a.tags"), str(sim_dir / "run_b.tags"),
                   str(tmp_path / "disp_a.tags"), str(tmp_path / "disp_b.tags"),
                   "--window-ps", "4000"])
        assert rc == 0
        out = capsys.readouterr().out
        assert "W = " in out
        assert "violated = true" in out


class TestReproduce:
    def test_fig2a_smoke(self, capsys):
        rc = main(["reproduce", "fig2a", "--seed", "0"])
        assert rc == 0
        out = capsys.readouterr().out
        assert "PASS" in out

    def test_unknown_target_rejected(self, capsys):
        with pytest.raises(SystemExit):
            main(["reproduce", "fig9"])


class TestTransport:
    def test_site_terminal_loopback(self, sim_dir, tmp_path):
        with socket.socket() as probe:
            probe.bind(("127.0.0.1", 0))
            port = probe.getsockname()[1]
        result = {}

        def run_terminal():
            result["rc"] = main(["terminal", "--port", str(port),
                                 "--out", str(tmp_path / "term")])

        t = threading.Thread(target=run_terminal)
        t.start()
        # retry the first send until the terminal socket is listening
        rc = 5
        for _ in range(50):
            rc = main(["site", "--terminal", f"127.0.0.1:{port}",
                       "--tags", str(sim_dir / "run_a.tags")])
            if rc == 0:
                break
            time.sleep(0.1)
        assert rc == 0
        assert main(["site", "--terminal", f"127.0.0.1:{port}",
                     "--tags", str(sim_dir / "run_b.tags")]) == 0
        t.join(timeout=60)
        assert result["rc"] == 0
        assert (tmp_path / "term_hist.csv").exists()
        back = tagio.read_tags(tmp_path / "term_a.tags")
        assert back == tagio.read_tags(sim_dir / "run_a.tags")

    def test_no_terminal_exit_5(self, sim_dir, capsys):
        with socket.socket() as probe:
            probe.bind(("127.0.0.1", 0))
            free_port = probe.getsockname()[1]
        rc = main(["site", "--terminal", f"127.0.0.1:{free_port}",
                   "--tags", str(sim_dir / "run_a.tags")])
        assert rc == 5
        assert "transport error" in capsys.readouterr().err
