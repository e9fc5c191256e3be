import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from kerrswitch.cli import main
from kerrswitch.phases import total_switch_energy
from kerrswitch.scenario import STUDY_FIGURES, ScenarioError, bundled_names, load_scenario, resolve

from conftest import XI_PAR_1310, XI_PERP_1310, smf


def _doc(name="fig2_100m"):
    return json.loads(resolve(name).read_text())


def _write(tmp_path, doc, name="case.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def _read_csv(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def test_list_studies(capsys):
    assert main(["list-studies"]) == 0
    out = capsys.readouterr().out
    for kind, fig in STUDY_FIGURES.items():
        assert f"{kind}\tfigure {fig}" in out
    assert "fig4a" in out


def test_all_bundled_scenarios_validate(capsys):
    assert len(bundled_names()) == 7
    for name in bundled_names():
        assert main(["validate", name]) == 0, name
    assert "e_star" in capsys.readouterr().out


def test_fig2_sweep(tmp_path):
    out = tmp_path / "out"
    assert main(["simulate", "fig2_100m", "--out", str(out), "--json"]) == 0
    cols, rows = _read_csv(out / "fig2_100m.csv")
    assert cols == ["E_pJ", "T_peak", "R_peak"]
    e_star = total_switch_energy(smf(), XI_PAR_1310, XI_PERP_1310)
    first = rows[np.argmax(rows[:, 1] > 0.999), 0]
    assert abs(first - e_star) < 200.0
    meta = json.loads((out / "fig2_100m.meta.json").read_text())
    assert meta["figure"] == "2" and meta["study"] == "energy_sweep"
    assert len(meta["scenario_sha256"]) == 64 and meta["tool_version"]
    assert meta["e_star_pJ"] == pytest.approx(e_star, rel=1e-10)
    mirror = json.loads((out / "fig2_100m.json").read_text())
    np.testing.assert_allclose(np.array(mirror["rows"]), rows, rtol=1e-14)


def test_csv_precision(tmp_path):
    assert main(["simulate", "fig3_noise", "--out", str(tmp_path)]) == 0
    line = (tmp_path / "fig3_noise.csv").read_text().splitlines()[-1]
    n_r = line.split(",")[2]
    assert len(n_r.replace(".", "").replace("-", "").split("e")[0].lstrip("0")) >= 12


def test_byte_identical_outputs(tmp_path):
    for d in ("a", "b"):
        assert main(["simulate", "fig4b", "--out", str(tmp_path / d)]) == 0
    assert (tmp_path / "a" / "fig4b.csv").read_bytes() == (tmp_path / "b" / "fig4b.csv").read_bytes()


def test_parallel_sweep_matches_serial(tmp_path):
    doc = _doc()
    doc["study"]["mode"] = "numeric"
    doc["study"]["energy_range_pJ"] = {"start": 0.0, "stop": 4000.0, "count": 3}
    doc["grid"] = {"n_samples": 1024, "t_span_ps": 128.0}
    doc["fiber"]["beta2_ps2_per_m"] = 0.0
    path = _write(tmp_path, doc)
    assert main(["simulate", path, "--out", str(tmp_path / "s")]) == 0
    assert main(["simulate", path, "--out", str(tmp_path / "p"), "--jobs", "2"]) == 0
    assert (tmp_path / "s" / "fig2_100m.csv").read_bytes() == (tmp_path / "p" / "fig2_100m.csv").read_bytes()


def test_missing_length_exits_2_without_output(tmp_path, capsys):
    doc = _doc()
    del doc["fiber"]["length_m"]
    out = tmp_path / "out"
    assert main(["simulate", _write(tmp_path, doc), "--out", str(out)]) == 2
    assert "length_m" in capsys.readouterr().err
    assert not out.exists()


def test_unknown_key_rejected_with_path(tmp_path, capsys):
    doc = _doc()
    doc["fiber"]["length_km"] = 0.1
    assert main(["validate", _write(tmp_path, doc)]) == 2
    err = capsys.readouterr().err
    assert "fiber" in err and "length_km" in err
    doc = _doc()
    doc["study"]["delays_ps"] = [0.0]
    with pytest.raises(ScenarioError, match="study"):
        load_scenario(_write(tmp_path, doc))


def test_conflicting_energy_keys_rejected(tmp_path):
    doc = _doc()
    doc["pump"]["peak_power_per_pol_W"] = 100.0
    assert main(["validate", _write(tmp_path, doc)]) == 2


def test_grid_too_narrow_for_window(tmp_path, capsys):
    doc = _doc("fig4a")
    doc["grid"] = {"n_samples": 1024, "t_span_ps": 128.0}
    out = tmp_path / "out"
    assert main(["simulate", _write(tmp_path, doc), "--out", str(out)]) == 2
    assert not out.exists()
    assert "precondition" in capsys.readouterr().err


def test_solver_failure_exits_3(tmp_path, capsys):
    doc = _doc("fig5_smf28")
    del doc["pump"]["energy_pJ"]
    doc["pump"]["peak_power_per_pol_W"] = 1e8
    doc["grid"] = {"n_samples": 1024, "t_span_ps": 128.0}
    assert main(["simulate", _write(tmp_path, doc), "--out", str(tmp_path / "o")]) == 3
    assert "solver failure" in capsys.readouterr().err


def test_not_json_exits_2(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert main(["validate", str(p)]) == 2
    assert main(["validate", str(tmp_path / "missing.json")]) == 2


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "kerrswitch", "validate", "fig2_500m"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("OK")
