import csv
import json

import pytest

from lasernoise import __version__, cli
from lasernoise.cli import main
from lasernoise.model import derived_scales
from lasernoise.config import load_config

DEVICE = {"beta": 1e-2, "kappa_tau": 50.0, "n_t": 1.5}


def write(tmp_path, obj, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


def config(**extra):
    return {"schema_version": 1, "device": dict(DEVICE), **extra}


def read_csv(path):
    lines = open(path).read().splitlines()
    header = json.loads(lines[0][2:])
    rows = list(csv.reader(lines[1:]))
    return header, rows[0], rows[1:]


class TestSteady:
    def test_dark_laser(self, tmp_path, capsys):
        cfg = write(tmp_path, config(operating_point={"pump": 0}))
        assert main(["steady", "--config", cfg]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["result"]["n_bar"] == 0.0
        assert out["version"] == __version__
        assert out["config"]["device"] == DEVICE

    def test_table_on_stderr(self, tmp_path, capsys):
        cfg = write(tmp_path, config(operating_point={"pump_over_threshold": 3}))
        assert main(["steady", "--config", cfg]) == 0
        err = capsys.readouterr().err
        assert "n_bar" in err and "regime.regime" in err

    def test_preset_current(self, tmp_path, capsys):
        cfg = write(tmp_path, {"schema_version": 1, "device": {"preset_beta": 1e-4},
                               "operating_point": {"pump_over_threshold": 2}})
        assert main(["steady", "--config", cfg]) == 0
        rep = json.loads(capsys.readouterr().out)["result"]
        assert 2.5e-3 < rep["threshold_current_A"] < 1e-2
        assert "boundary" in rep["device"]["note"]

    @pytest.mark.parametrize("obj,path", [
        ({"schema_version": 1, "device": {"beta": "x", "kappa_tau": 50, "n_t": 1.5}}, "device.beta"),
        ({"schema_version": 1, "device": DEVICE, "operating_point": {"pump": -1}}, "operating_point.pump"),
        ({"schema_version": 2, "device": DEVICE}, "schema_version"),
        ({"schema_version": 1, "device": DEVICE, "colour": 1}, "colour"),
        ({"schema_version": 1, "device": DEVICE, "sigma": 3}, "sigma"),
    ])
    def test_malformed_config_names_field(self, tmp_path, capsys, obj, path):
        assert main(["steady", "--config", write(tmp_path, obj)]) == 2
        assert path in capsys.readouterr().err

    def test_invalid_json(self, tmp_path, capsys):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        assert main(["steady", "--config", str(p)]) == 2

    def test_numerical_failure_exit_code(self, tmp_path, monkeypatch):
        def boom(cfg, args):
            raise FloatingPointError("overflow")
        monkeypatch.setitem(cli.COMMANDS, "steady", boom)
        assert main(["steady", "--config", write(tmp_path, config())]) == 3

    def test_csv_format(self, tmp_path):
        cfg = write(tmp_path, config(operating_point={"n_bar": 100}))
        out = tmp_path / "s.csv"
        assert main(["steady", "--config", cfg, "--format", "csv", "--out", str(out)]) == 0
        header, cols, rows = read_csv(out)
        assert header["config"]["operating_point"] == {"n_bar": 100}
        assert len(rows) == 1 and float(rows[0][cols.index("n_bar")]) == pytest.approx(100)


class TestThresholds:
    def test_values(self, tmp_path, capsys):
        assert main(["thresholds", "--config", write(tmp_path, config())]) == 0
        rep = json.loads(capsys.readouterr().out)["result"]
        assert rep["n_th"] < rep["n_delta"]
        assert rep["n_sq"] > 0 and rep["n_sq_root"] > 0


class TestSweep:
    def sweep_cfg(self, **sweep):
        base = {"axes": [{"name": "beta", "lo": 1e-6, "hi": 1e-1, "points": 6}],
                "fixed": {"n_bar": 1000.0}, "sigmas": [1.0]}
        base.update(sweep)
        return config(sweep=base)

    def test_golden_columns(self, tmp_path):
        out = tmp_path / "sweep.csv"
        assert main(["sweep", "--config", write(tmp_path, self.sweep_cfg()), "--out", str(out)]) == 0
        _, cols, rows = read_csv(out)
        assert cols == ["beta", "sigma", "n_bar", "n_cap_bar", "gamma_cap_n", "gamma_n",
                        "omega_r", "r", "pnf_approx", "pnf_exact", "lfn_approx", "lfn_exact",
                        "j_th", "n_th", "n_delta", "n_sq", "regime", "device"]
        assert len(rows) == 6
        betas = [float(r[0]) for r in rows]
        assert betas == sorted(betas)

    def test_workers_do_not_change_output(self, tmp_path):
        cfg = write(tmp_path, self.sweep_cfg())
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["sweep", "--config", cfg, "--out", str(a)]) == 0
        assert main(["sweep", "--config", cfg, "--out", str(b), "--workers", "3"]) == 0
        assert a.read_text() == b.read_text()

    def test_rerun_from_embedded_config(self, tmp_path):
        a = tmp_path / "a.csv"
        assert main(["sweep", "--config", write(tmp_path, self.sweep_cfg()), "--out", str(a)]) == 0
        embedded = json.loads(a.read_text().splitlines()[0][2:])["config"]
        b = tmp_path / "b.csv"
        assert main(["sweep", "--config", write(tmp_path, embedded, "e.json"), "--out", str(b)]) == 0
        assert a.read_text() == b.read_text()

    def test_one_point_equals_steady(self, tmp_path, capsys):
        obj = config(sweep={"axes": [{"name": "n_bar", "lo": 250, "hi": 250, "points": 1}]},
                     operating_point={"n_bar": 250})
        cfg = write(tmp_path, obj)
        assert main(["sweep", "--config", cfg, "--format", "json"]) == 0
        row = json.loads(capsys.readouterr().out)["result"][0]
        assert main(["steady", "--config", cfg]) == 0
        rep = json.loads(capsys.readouterr().out)["result"]
        assert row["n_cap_bar"] == pytest.approx(rep["n_cap_bar"], rel=1e-12)
        assert row["lfn_exact"] == pytest.approx(rep["noise"]["lfn_exact_ratio"], rel=1e-12)
        assert row["pnf_exact"] == pytest.approx(rep["noise"]["pnf_exact_ratio"], rel=1e-12)
        assert row["regime"] == rep["regime"]["regime"]

    def test_duplicate_axis(self, tmp_path, capsys):
        axes = [{"name": "beta", "lo": 1e-3, "hi": 1e-2, "points": 2}] * 2
        assert main(["sweep", "--config", write(tmp_path, self.sweep_cfg(axes=axes))]) == 2
        assert "duplicate" in capsys.readouterr().err


class TestFigure:
    def test_unknown_id(self, tmp_path, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["figure", "--id", "7"])
        assert exc.value.code == 2
        assert main(["figure", "--config", write(tmp_path, config(figure={"id": 7}))]) == 2

    def test_rerun_is_byte_identical(self, tmp_path):
        cfg = write(tmp_path, {"schema_version": 1, "figure": {"id": 5, "resolution": 20}})
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["figure", "--config", cfg, "--out", str(a)]) == 0
        embedded = json.loads((a / "fig5.csv").read_text().splitlines()[0][2:])["config"]
        assert main(["figure", "--config", write(tmp_path, embedded, "e.json"), "--out", str(b)]) == 0
        assert (a / "fig5.csv").read_text() == (b / "fig5.csv").read_text()

    def test_figure_three_column_matches_sweep(self, tmp_path):
        res = 12
        assert main(["figure", "--id", "3", "--out", str(tmp_path / "f"),
                     "--config", write(tmp_path, {"schema_version": 1, "figure": {"resolution": res}})]) == 0
        _, cols, rows = read_csv(tmp_path / "f" / "fig3.csv")
        n_values = sorted({float(r[cols.index("n_bar")]) for r in rows})
        n_pick = n_values[res // 2]
        fig = {float(r[cols.index("beta")]): float(r[cols.index("pnf_ratio")])
               for r in rows if float(r[cols.index("n_bar")]) == n_pick}
        betas = sorted(fig)
        sweep = config(sweep={"axes": [{"name": "beta", "lo": betas[0], "hi": betas[-1], "points": res}],
                              "fixed": {"n_bar": n_pick}, "outputs": ["pnf"]})
        sweep["device"] = {"beta": 1e-3, "kappa_tau": 1e4 / 3, "n_t": 1.5}
        out = tmp_path / "s.csv"
        assert main(["sweep", "--config", write(tmp_path, sweep, "s.json"), "--out", str(out)]) == 0
        _, scols, srows = read_csv(out)
        for r in srows:
            beta = float(r[0])
            match = min(betas, key=lambda b: abs(b - beta))
            assert match == pytest.approx(beta, rel=1e-12)
            assert float(r[scols.index("pnf_approx")]) == pytest.approx(fig[match], rel=1e-10)

    def test_figure_four_sigma_zero_crosses_at_root(self, tmp_path):
        assert main(["figure", "--id", "4", "--out", str(tmp_path)]) == 0
        header, cols, rows = read_csv(tmp_path / "fig4.csv")
        n_col, db_col = cols.index("n_bar"), cols.index("lfn_db_sigma_0")
        pts = [(float(r[n_col]), float(r[db_col])) for r in rows]
        cross = [a for a, b in zip(pts, pts[1:]) if a[1] > 0 >= b[1]]
        assert len(cross) == 1
        root = header["meta"]["n_sq_root"]
        assert cross[0][0] <= root * 1.05 and cross[0][0] >= root / 1.1


class TestMultimode:
    def test_two_by_two(self, capsys):
        assert main(["multimode", "--modes", "2", "--photons", "2"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[1] == "n,p_exact,p_geometric"
        assert [float(l.split(",")[1]) for l in lines[2:]] == pytest.approx([1 / 3] * 3)

    def test_single_mode(self, capsys):
        assert main(["multimode", "--modes", "1", "--photons", "4"]) == 0
        lines = capsys.readouterr().out.splitlines()[2:]
        assert [l.split(",")[:2] for l in lines][-1] == ["4", "1.0"]
        assert all(float(l.split(",")[1]) == 0 for l in lines[:-1])

    def test_from_device_point(self, tmp_path, capsys):
        from lasernoise.figures import half_efficiency_device
        p, op = half_efficiency_device(5.0, 10.0, 1.5)
        obj = {"schema_version": 1, "device": {"beta": p.beta, "kappa_tau": p.kappa_tau, "n_t": 1.5},
               "operating_point": {"n_bar": op.n_bar}, "sigma": 0.0}
        assert main(["multimode", "--config", write(tmp_path, obj)]) == 0
        header = json.loads(capsys.readouterr().out.splitlines()[0][2:])
        assert header["config"]["multimode"]["modes"] == 5

    def test_half_arguments(self, capsys):
        assert main(["multimode", "--modes", "3"]) == 2


class TestSimulate:
    def sim_cfg(self, **sim):
        settings = {"method": "gillespie", "t_end": 400.0, "sample_dt": 0.5, "burn_in": 10.0}
        settings.update(sim)
        return {"schema_version": 1,
                "device": {"beta": 0.5, "tau": 2.0, "n_cap_t": 2.0},
                "operating_point": {"pump": 6.0}, "simulate": settings}

    def test_same_seed_byte_identical(self, tmp_path):
        cfg = write(tmp_path, self.sim_cfg(ensemble=2))
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["simulate", "--config", cfg, "--seed", "42", "--out", str(a)]) == 0
        assert main(["simulate", "--config", cfg, "--seed", "42", "--out", str(b), "--workers", "2"]) == 0
        for name in ("trajectory_0000.csv", "trajectory_0001.csv"):
            assert (a / name).read_bytes() == (b / name).read_bytes()
        rep = json.loads((a / "report.json").read_text())
        assert rep["config"]["seed"] == 42
        assert set(rep["result"]) >= {"moments", "fano", "two_time", "wall_clock_s", "events"}

    def test_seed_required(self, tmp_path, capsys):
        assert main(["simulate", "--config", write(tmp_path, self.sim_cfg())]) == 2
        assert "seed" in capsys.readouterr().err

    def test_intermediate_sigma_rejected_for_jumps(self, tmp_path):
        obj = self.sim_cfg()
        obj["sigma"] = 0.5
        assert main(["simulate", "--config", write(tmp_path, obj), "--seed", "1",
                     "--out", str(tmp_path / "o")]) == 2

    def test_too_short_is_a_power_failure(self, tmp_path):
        cfg = write(tmp_path, self.sim_cfg(t_end=5.0, sample_dt=0.5, burn_in=0.0))
        assert main(["simulate", "--config", cfg, "--seed", "1", "--out", str(tmp_path / "o")]) == 4

    def test_langevin_runs(self, tmp_path):
        obj = self.sim_cfg(method="langevin", dt=0.01, t_end=200.0)
        obj["device"] = DEVICE
        obj["operating_point"] = {"pump_over_threshold": 3}
        obj["sigma"] = 0.25
        out = tmp_path / "o"
        assert main(["simulate", "--config", write(tmp_path, obj), "--seed", "3", "--out", str(out)]) == 0
        rep = json.loads((out / "report.json").read_text())["result"]
        assert rep["valid"] == [True]


def test_loaded_config_resolves_pump(tmp_path):
    cfg = load_config(write(tmp_path, config(operating_point={"pump_over_threshold": 2})))
    params, _ = cfg.point()
    assert params.pump == pytest.approx(2 * derived_scales(params)[1])
