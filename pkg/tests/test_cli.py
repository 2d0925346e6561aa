import io
import json
import math
import subprocess
import sys

import pytest

from thermcas.cli import main
from thermcas.experiments import SweepResult
from thermcas.lifshitz import evaluate
from thermcas.units import C, HBAR


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def test_single_point_ideal_metal():
    code, out, _ = call("--scenario", "single-point", "--material", "ideal", "--d", "1e-6")
    assert code == 0
    expected = math.pi ** 2 * HBAR * C / (240 * 1e-6 ** 4)
    line = next(x for x in out.splitlines() if x.startswith("|F| ="))
    assert float(line.split()[2]) == pytest.approx(expected, rel=1e-4)
    assert "|F| = 1.3001e-03 N/m^2" in out
    assert "|F| / ideal zero-T = 1.000000" in out


def test_single_point_finite_temperature():
    code, out, _ = call("--scenario", "single-point", "--T", "295", "--evaluator", "matsubara")
    assert code == 0
    assert "evaluator = matsubara" in out


def test_g1_columns(tmp_path):
    path = tmp_path / "g1.csv"
    code, _, err = call("--scenario", "g1", "--points", "2", "--out", str(path))
    assert code == 0
    res = SweepResult.from_csv(path.read_text())
    assert res.columns == ("d_m", "zero-T", "D=0", "D=0.01", "D=0.1", "D=1")
    assert len(res.rows) == 2
    assert err.count("est. rel. error") == 2
    code, out, _ = call("--scenario", "g1", "--points", "2", "--D", "")
    assert SweepResult.from_csv(out).columns == ("d_m", "zero-T", "D=0")


@pytest.mark.parametrize("argv, key", [
    (("--scenario", "g1", "--T", "-3"), "T"),
    (("--scenario", "g1", "--material", "unobtainium"), "material"),
    (("--scenario", "g2", "--radius", "0"), "radius"),
    (("--scenario", "g1", "--D", "0.1,abc"), "D"),
    (("--scenario", "nope",), "argv"),
    (("--bogus",), "argv"),
])
def test_config_errors_exit_one(argv, key):
    code, out, err = call(*argv)
    assert code == 1 and out == ""
    payload = json.loads(err)
    assert payload["error"] == "config" and payload["key"] == key


def test_error_message_states_unit():
    _, _, err = call("--scenario", "g1", "--T", "-3")
    assert "(K)" in json.loads(err)["message"]


def test_convergence_failure_exits_two():
    code, _, err = call("--scenario", "single-point", "--rtol", "1e-16")
    assert code == 2
    assert json.loads(err)["error"] == "convergence"


def test_exit_code_from_process():
    proc = subprocess.run([sys.executable, "-m", "thermcas", "--scenario", "g1", "--T", "-1"],
                          capture_output=True, text=True)
    assert proc.returncode == 1
    assert json.loads(proc.stderr)["key"] == "T"


def test_config_file_overrides_flags(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[run]\nscenario = single-point\nd = 2e-6\nmaterial = softgold\n\n"
                   "[softgold]\nkind = plasma\nomega_p_ev = 5.0\n")
    code, out, _ = call("--config", str(cfg), "--d", "1e-6", "--material", "ideal")
    assert code == 0
    assert "material = softgold, d = 2.000000e-06 m" in out


def test_config_file_bad_key(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[run]\nscenario = single-point\nseparation = 1e-6\n")
    code, _, err = call("--config", str(cfg))
    assert code == 1 and json.loads(err)["key"] == "separation"


def test_custom_materials_file(tmp_path):
    mats = tmp_path / "m.ini"
    mats.write_text("[mirror]\nkind = ideal-metal\n")
    code, out, _ = call("--materials", str(mats), "--material", "mirror")
    assert code == 0 and "|F| = 1.3001e-03" in out
    code, _, err = call("--materials", str(mats), "--material", "gold")
    assert code == 1 and json.loads(err)["key"] == "material"


def test_replay_is_byte_identical(tmp_path):
    first = tmp_path / "a.csv"
    second = tmp_path / "b.csv"
    assert call("--scenario", "g2", "--points", "2", "--d-min", "0.2e-6", "--out", str(first))[0] == 0
    evaluate.cache_clear()
    assert call("--replay", str(first), "--out", str(second))[0] == 0
    assert first.read_bytes() == second.read_bytes()


def test_thread_count_from_environment(tmp_path, monkeypatch):
    argv = ("--scenario", "g3", "--points", "3", "--D", "1e-11")
    evaluate.cache_clear()
    monkeypatch.setenv("THERMCAS_THREADS", "1")
    one = call(*argv)[1]
    monkeypatch.setenv("THERMCAS_THREADS", "3")
    three = call(*argv)[1]
    assert one == three
    res = SweepResult.from_csv(one)
    assert res.columns == ("z_m", "included", "neglected", "D=1e-11")


def test_dispersion_scenario():
    code, out, _ = call("--scenario", "dispersion", "--points", "32")
    assert code == 0
    res = SweepResult.from_csv(out)
    assert res.columns == ("kd_over_pi", "omega_over_omega_s", "channel", "class", "branch")
    channels = {(r[2], r[3]) for r in res.rows}
    assert ("TM", "evanescent") in channels and ("TE", "evanescent") not in channels
