import json

import pytest
import yaml

from conftest import scenario_dict
from convoy_orbit.cli import main


@pytest.fixture
def scenario_file(tmp_path):
    p = tmp_path / "smoke.yaml"
    p.write_text(yaml.safe_dump(scenario_dict(duration=2.0)))
    return p


class TestSimulate:
    def test_file(self, scenario_file, tmp_path, capsys):
        out = tmp_path / "out"
        assert main(["simulate", "--scenario", str(scenario_file), "--out", str(out)]) == 0
        assert (out / "metrics.csv").exists() and (out / "summary.json").exists()
        assert "smoke: 100 ticks" in capsys.readouterr().out

    def test_overrides_and_extras(self, scenario_file, tmp_path):
        out = tmp_path / "out"
        rc = main(["simulate", "--scenario", str(scenario_file), "--out", str(out),
                   "--dt", "0.05", "--duration", "1", "--jsonl", "--plots"])
        assert rc == 0
        assert json.loads((out / "summary.json").read_text())["ticks"] == 20
        assert (out / "metrics.jsonl").exists()
        assert len(list((out / "plots").glob("*.svg"))) == 6

    def test_bundled_name(self, tmp_path):
        rc = main(["simulate", "--scenario", "matlab_sim_1", "--out", str(tmp_path), "--duration", "0.1"])
        assert rc == 0

    @pytest.mark.parametrize("extra,needle", [
        (["--dt", "-1"], "dt"),
        (["--duration", "-5"], "duration"),
    ])
    def test_bad_override(self, scenario_file, tmp_path, capsys, extra, needle):
        rc = main(["simulate", "--scenario", str(scenario_file), "--out", str(tmp_path)] + extra)
        err = capsys.readouterr().err
        assert rc != 0
        assert needle in err and err.count("\n") == 1

    def test_invalid_scenario(self, tmp_path, capsys):
        p = tmp_path / "bad.yaml"
        p.write_text(yaml.safe_dump(scenario_dict(d_c=0)))
        assert main(["simulate", "--scenario", str(p), "--out", str(tmp_path)]) == 1
        err = capsys.readouterr().err
        assert "d_c" in err and err.count("\n") == 1

    def test_output_dir_from_scenario(self, tmp_path):
        p = tmp_path / "s.yaml"
        p.write_text(yaml.safe_dump(scenario_dict(duration=0.1, output_dir=str(tmp_path / "here"))))
        assert main(["simulate", "--scenario", str(p)]) == 0
        assert (tmp_path / "here" / "metrics.csv").exists()

    def test_no_output_location(self, scenario_file, capsys):
        assert main(["simulate", "--scenario", str(scenario_file)]) == 1
        assert "output" in capsys.readouterr().err

    def test_missing_argument(self):
        with pytest.raises(SystemExit) as exc:
            main(["simulate", "--out", "x"])
        assert exc.value.code != 0


class TestOtherCommands:
    def test_plot(self, scenario_file, tmp_path, capsys):
        main(["simulate", "--scenario", str(scenario_file), "--out", str(tmp_path / "run")])
        rc = main(["plot", "--metrics", str(tmp_path / "run" / "metrics.csv"), "--out", str(tmp_path / "p")])
        assert rc == 0
        assert len(list((tmp_path / "p").glob("*.svg"))) == 6

    def test_plot_bad_csv(self, tmp_path, capsys):
        p = tmp_path / "m.csv"
        p.write_text("t\n0\nzz\n")
        assert main(["plot", "--metrics", str(p), "--out", str(tmp_path)]) == 1
        assert "row 3" in capsys.readouterr().err

    def test_compare_guidance(self, tmp_path, capsys):
        assert main(["compare-guidance", "--out", str(tmp_path)]) == 0
        r = json.loads((tmp_path / "comparison.json").read_text())
        assert r["kappa_min"] == pytest.approx(0.16)
        assert r["weighted"]["steady_hc_max"] < r["constant"]["steady_hc_max"]
        for name in ("comparison.csv", "comparison_gamma.svg", "comparison_trajectories.svg"):
            assert (tmp_path / name).stat().st_size > 0
