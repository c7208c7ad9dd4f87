import csv
import io
import json
import subprocess
import sys

import pytest

from neckwall.analysis import SWEEP_COLUMNS, SweepRow
from neckwall.cli import main
from neckwall.dumps import field_from_bytes, mask_from_text
from neckwall.energy import EnergyBreakdown
from neckwall.regimes import RegimeReport

NECK = ["--eps", "0.1", "--delta", "0.03", "--eta", "0.01"]
SMALL = ["--min-cells", "2", "--neck-cells-x", "4"]


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_classify_super_thin(capsys):
    code, out, err = run(capsys, "classify", "--delta-power", "2", "--eta-power", "3")
    assert code == 0
    d = json.loads(out)
    assert d["tag"] == "SuperThin"
    assert d["rate"] == "eps/(delta*eta)"
    assert d["kappa_total"] == "(beta-alpha)^2"
    assert err.strip().startswith("classify: SuperThin")
    assert RegimeReport.from_dict(d).kappa_total == 1.0


def test_classify_inf_ell_round_trip(capsys):
    code, out, _ = run(capsys, "classify", "--delta-power", "0.5", "--eta-power", "0.8")
    d = json.loads(out)
    assert d["tag"] == "WindowThick" and d["ell"] == "inf"
    assert RegimeReport.from_dict(d).ell == float("inf")


def test_competitor_affine_equal_values(capsys):
    code, out, _ = run(capsys, "competitor", *NECK, "--kind", "affine", "--A", "0.4", "--B", "0.4")
    assert code == 0 and json.loads(out)["energy"] == 0.0


def test_competitor_discrete_and_dump(capsys, tmp_path):
    dump = tmp_path / "f.bin"
    code, out, _ = run(capsys, "competitor", *NECK, "--kind", "affine", "--discrete", "--neck-only",
                       *SMALL, "--dump-field", str(dump))
    d = json.loads(out)
    assert d["discrete"]["total"] == pytest.approx(d["energy"], rel=1e-10)
    assert field_from_bytes(dump.read_bytes())["values"].size == d["n_cells"]


def test_competitor_mixed(capsys):
    code, out, _ = run(capsys, "competitor", *NECK, "--kind", "mixed")
    d = json.loads(out)
    assert 0 < d["A"] < d["B"] < 1
    assert d["energy"] == pytest.approx(d["neck_energy"] + d["left_shell_energy"] + d["right_shell_energy"])


def test_minimise_outputs(capsys, tmp_path):
    out_path, fdump, mdump = tmp_path / "m.json", tmp_path / "f.bin", tmp_path / "m.txt"
    code, out, err = run(capsys, "minimise", *NECK, *SMALL, "--preconditioner", "amg",
                         "--max-iters", "200", "-o", str(out_path),
                         "--dump-field", str(fdump), "--dump-mask", str(mdump))
    assert code == 0 and out == ""
    d = json.loads(out_path.read_text())
    b = EnergyBreakdown.from_dict(d["breakdown"])
    assert b.total > 0 and d["diagnostics"]["reason"] in ("grad_tol", "max_iters", "energy_tol", "stalled")
    mask, _ = mask_from_text(mdump.read_text())
    assert mask.sum() == d["n_cells"]
    assert "minimise:" in err


def test_sweep_csv_header(capsys, tmp_path):
    cfg = tmp_path / "sweep.cfg"
    cfg.write_text("# small sweep\ndelta-prefactor = 0.3\ndelta_power = 1\neta-prefactor=0.3\n"
                   "eta-power=2\nhalf-extent=2\nmin-cells=2\nneck-cells-x=4\nmax-iters=50\n"
                   "preconditioner=amg\neps-list=0.3,0.2\n")
    code, out, err = run(capsys, "sweep", "--config", str(cfg), "--eps-list", "0.2")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert tuple(rows[0].keys()) == SWEEP_COLUMNS
    assert len(rows) == 1 and float(rows[0]["eps"]) == 0.2  # flag beats config
    assert SweepRow.from_dict(rows[0]).status == "ok"


def test_sweep_json(capsys):
    code, out, _ = run(capsys, "sweep", "--delta-prefactor", "0.3", "--delta-power", "1",
                       "--eta-prefactor", "0.3", "--eta-power", "2", "--half-extent", "2", *SMALL,
                       "--max-iters", "20", "--eps-list", "0.2", "--format", "json")
    rows = [SweepRow.from_dict(r) for r in json.loads(out)]
    assert rows[0].n_cells > 0


def test_profile_csv(capsys):
    code, out, _ = run(capsys, "profile", *NECK, *SMALL, "--neck-only", "--source", "affine")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["s", "v"]
    vals = [(float(a), float(b)) for a, b in rows[1:]]
    assert all(abs(v - (0.5 * s + 0.5)) < 1e-12 for s, v in vals)


def test_usage_errors(capsys):
    assert main(["frobnicate"]) == 2
    assert main(["minimise", "--eps", "0.1"]) == 2
    assert main(["classify", "--delta-power", "abc"]) == 2


def test_bad_config_key(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("no-such-key = 3\n")
    assert main(["classify", "--config", str(cfg)]) == 2


def test_numerical_failure_is_json(capsys, tmp_path):
    out_path = tmp_path / "never.json"
    code, out, err = run(capsys, "competitor", "--eps", "0.1", "--delta", "0.01", "--eta", "0.03",
                         "-o", str(out_path))
    assert code == 1
    assert json.loads(out)["error"] == "RegimeViolationError"
    assert not out_path.exists()
    assert list(tmp_path.iterdir()) == []


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "neckwall", "classify"], capture_output=True, text=True)
    assert r.returncode == 0 and json.loads(r.stdout)["tag"] == "SuperThin"
