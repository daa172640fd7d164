import csv
import io
import json

import numpy as np
import pytest

from grandlab import cli
from grandlab import sim_harness as sh
from grandlab.gf2_codes import read_alist
from grandlab.metrics import SUMMARY_COLUMNS, summary_csv

_SMALL = dict(code="bch:127:113", t_max=400, chunk=7, eta_every=5)


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.mark.filterwarnings("ignore:using a poor position-count fit")
def test_high_snr_single_frame():
    cfg = sh.make_config(variants=("orb", "cdf", "sgrand", "ft-cdf", "ft-orb"), ebn0=(20.0,), frames=1, **_SMALL)
    rows = sh.run_sweep(cfg).rows()
    assert len(rows) == 5
    for r in rows:
        assert r["bler"] == 0.0 and r["mean_tests"] == 1.0 and r["frames"] == 1


def test_worker_count_does_not_change_output():
    cfg = sh.make_config(variants=("orb", "ft-cdf", "sgrand"), ebn0=(4.0, 5.0), frames=20, seed=3, **_SMALL)
    one = summary_csv(sh.run_sweep(cfg))
    cfg.workers = 3
    assert summary_csv(sh.run_sweep(cfg)) == one
    cfg.chunk = 20
    cfg.workers = 1
    assert summary_csv(sh.run_sweep(cfg)) == one


def test_seed_and_crn():
    a = sh.trial_seed(1, "orb", 5.0, 7).generate_state(4)
    assert np.array_equal(a, sh.trial_seed(1, "orb", 5.0, 7).generate_state(4))
    assert not np.array_equal(a, sh.trial_seed(1, "cdf", 5.0, 7).generate_state(4))
    assert not np.array_equal(a, sh.trial_seed(1, "orb", 5.001, 7).generate_state(4))
    assert np.array_equal(sh.trial_seed(1, "orb", 5.0, 7, crn=True).generate_state(4),
                          sh.trial_seed(1, "cdf", 5.0, 7, crn=True).generate_state(4))
    cfg = sh.make_config(variants=("orb", "sgrand"), ebn0=(4.0,), frames=30, crn=True, **_SMALL)
    orb = sh.run_trials(cfg, "orb", 4.0, 0, 30)
    sg = sh.run_trials(cfg, "sgrand", 4.0, 0, 30)
    # same noise: SGRAND never needs more tests than ORBGRAND to hit the ML word it finds first
    assert sum(r.tests_used for r in sg) <= sum(r.tests_used for r in orb)


def test_trial_records():
    cfg = sh.make_config(variants=("ft-cdf",), ebn0=(4.0,), frames=10, timing=True, **_SMALL)
    recs = sh.run_trials(cfg, "ft-cdf", 4.0, 0, 10)
    assert len(recs) == 10
    assert all(len(r.positions) == 1 and r.elapsed_us is not None for r in recs)
    assert [r.eta_sample is not None for r in recs] == [f % 5 == 0 for f in range(10)]
    assert all(r.adjust_iters >= 1 for r in recs)
    assert all(r.block_error for r in recs if r.status != "decoded")


def test_sgrand_eta_is_zero():
    cfg = sh.make_config(variants=("sgrand",), ebn0=(4.0,), frames=6, **{**_SMALL, "eta_every": 1})
    c = sh.run_sweep(cfg).cell("sgrand", 4.0)
    assert c.eta_samples == 6 and c.mean_eta == 0.0


@pytest.mark.parametrize("kw,field", [
    ({"frames": 0}, "frames"), ({"t_max": 0}, "t_max"), ({"d": 3}, "d"), ({"window": 1, "d": 2}, "window"),
    ({"variants": ("orb", "magic")}, "variants"), ({"format": "xml"}, "format"), ({"workers": 0}, "workers"),
    ({"code": "bch:100:50"}, "code"), ({"code": "alist:/nonexistent.alist"}, "code"), ({"bogus": 1}, "bogus"),
    ({"frames": "many"}, "frames"), ({"seed": -1}, "seed"), ({"eta_every": -1}, "eta_every"),
])
def test_config_errors_name_the_field(kw, field):
    with pytest.raises(sh.ConfigError) as exc:
        sh.make_config(**kw)
    assert exc.value.field == field
    assert str(exc.value).startswith(field)


def test_config_file_and_overrides(tmp_path):
    p = tmp_path / "run.ini"
    p.write_text("[common]\nseed = 9\n\n[simulate]\nvariants = orb, ft-cdf\nebn0 = 4, 5.5\nframes = 12\n"
                 "t-max = 300\ncrn = yes\nwindow = all\n\n[variant:ft-cdf]\nd = 2\nwindow = 8\n")
    opts = sh.read_config_file(str(p), "simulate")
    cfg = sh.make_config(opts, frames=5)
    assert cfg.seed == 9 and cfg.variants == ("orb", "ft-cdf") and cfg.ebn0 == (4.0, 5.5)
    assert cfg.frames == 5 and cfg.t_max == 300 and cfg.crn is True and cfg.window is None
    assert cfg.opts("ft-cdf") == (2, 8) and cfg.opts("orb") == (1, None)
    bad = tmp_path / "bad.ini"
    bad.write_text("[variant:orb]\nspeed = 3\n")
    with pytest.raises(sh.ConfigError):
        sh.read_config_file(str(bad), "simulate")
    with pytest.raises(sh.ConfigError):
        sh.read_config_file(str(tmp_path / "missing.ini"), "simulate")


def test_partition_validation_rows():
    rows = sh.run_partition_validation(200, "orb")
    assert [r["m"] for r in rows] == list(range(1, 201))
    assert rows[2]["o_exact"] == 5
    assert max(r["rel_error"] for r in rows if 20 <= r["m"] <= 127) < 0.05
    rows = sh.run_partition_validation(60, "cdf", 5.0, T=3000, points=40)
    assert rows and all(r["m"] <= 60 for r in rows)
    assert np.all(np.diff([r["o_exact"] for r in rows]) >= 0)
    with pytest.raises(ValueError):
        sh.run_partition_validation(10, "spline")


def test_inversion_validation_rows():
    ex, ap = sh.inversion_samples(5.0, 20, T=3000)
    assert ex.shape == ap.shape == (20,) and np.all(ex >= 0) and np.all(ap >= 0)
    rows = sh.run_inversion_validation([5.0], 20, T=3000)
    assert rows[0]["mean_I_exact"] == pytest.approx(ex.mean())
    assert rows[0]["rel_error"] == pytest.approx(abs(ap.mean() - ex.mean()) / ex.mean())


# command line

def test_cli_simulate(tmp_path, capsys):
    out = tmp_path / "s.csv"
    rc = cli.main(["simulate", "--variants", "orb,cdf", "--ebn0", "6", "--frames", "8", "--t-max", "300",
                   "--seed", "2", "--out", str(out), "--chunk", "3"])
    assert rc == 0
    text = out.read_text()
    assert text.splitlines()[0] == ",".join(SUMMARY_COLUMNS)
    assert [r["variant"] for r in _rows(text)] == ["cdf", "orb"]
    rc = cli.main(["simulate", "--variants", "orb", "--ebn0", "6", "--frames", "8", "--t-max", "300",
                   "--seed", "2", "--format", "jsonl", "--workers", "2"])
    js = json.loads(capsys.readouterr().out.splitlines()[0])
    assert js["variant"] == "orb" and js["frames"] == 8
    assert js["mean_tests"] == float(_rows(text)[1]["mean_tests"])


def test_cli_config_error(capsys):
    assert cli.main(["simulate", "--frames", "0"]) == 2
    assert "frames" in capsys.readouterr().err


def test_cli_gen_code(tmp_path):
    out = tmp_path / "bch.alist"
    assert cli.main(["gen-code", "--bch", "4", "2", "--out", str(out)]) == 0
    H = read_alist(str(out))
    G = read_alist(cli.companion_path(str(out)))
    assert H.shape == (8, 15) and G.shape == (7, 15)
    assert not np.any((G.astype(int) @ H.T.astype(int)) % 2)
    assert cli.companion_path("x/y.alist") == "x/y.G.alist"


def test_cli_patterns(tmp_path, capsys):
    out = tmp_path / "p.csv"
    assert cli.main(["patterns", "--gamma", "orb", "--n", "10", "--t", "6", "--out", str(out)]) == 0
    rows = _rows(out.read_text())
    assert [r["support"] for r in rows] == ["", "1", "2", "3", "1 2", "4"]
    assert [float(r["weight"]) for r in rows] == [0, 1, 2, 3, 3, 4]
    assert cli.main(["patterns", "--gamma", "cdf", "--n", "20", "--t", "50", "--ebn0", "5"]) == 0
    assert "50 patterns" in capsys.readouterr().out


def test_cli_validate_commands(tmp_path, capsys):
    assert cli.main(["validate-partition", "--n-max", "50", "--format", "jsonl"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 50 and json.loads(lines[2])["o_exact"] == 5
    p = tmp_path / "v.ini"
    p.write_text("[validate-inversions]\nsamples = 5\nebn0 = 6\nt-max = 2000\n")
    out = tmp_path / "inv.csv"
    assert cli.main(["validate-inversions", "--config", str(p), "--out", str(out)]) == 0
    rows = _rows(out.read_text())
    assert len(rows) == 1 and float(rows[0]["ebn0"]) == 6.0
