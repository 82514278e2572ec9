import csv
import json
import os
import subprocess
import sys
from importlib.resources import files

import jsonschema
import pytest

from podles import __version__
from podles.cli import REPORT_CSV_COLUMNS, main
from podles.qcore import parse_half

SCHEMA = json.loads(files("podles").joinpath("schema/report.schema.json").read_text())


def run_cli(*args, env=None, cwd=None):
    return subprocess.run([sys.executable, "-m", "podles", *args], capture_output=True, text=True, env=env, cwd=cwd)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_fast_suites_pass_and_validate(tmp_path):
    code = main(["--q", "0.5", "--lmax", "21/2", "--suite", "relations,equivariance", "--suite", "structure",
                 "--out", str(tmp_path)])
    assert code == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["equivariance_q0.5.json", "relations_q0.5.json", "structure_q0.5.json"]
    for p in tmp_path.iterdir():
        doc = json.loads(p.read_text())
        jsonschema.validate(doc, SCHEMA)
        assert doc["library_version"] == __version__
        assert doc["convention"] == "coproduct-A/e-lowers/twist+0"
        assert doc["run_config"]["l_max"] == "21/2"


def test_one_report_per_suite_and_q(tmp_path):
    assert main(["--q", "0.3", "--q", "0.8", "--lmax", "10.5", "--suite", "relations", "--out", str(tmp_path)]) == 0
    assert sorted(p.name for p in tmp_path.iterdir()) == ["relations_q0.3.json", "relations_q0.8.json"]


def test_literal_index_exits_one(tmp_path):
    proc = run_cli("--paper-literal-index", "--suite", "relations", "--out", str(tmp_path))
    assert proc.returncode == 1
    assert "FAIL" in proc.stdout
    doc = json.loads((tmp_path / "relations_q0.5.json").read_text())
    assert doc["verdict"] == "FAIL" and doc["run_config"]["paper_literal_index"] is True


def test_q_one_rejected_for_decay_suites(tmp_path):
    proc = run_cli("--q", "1.0", "--suite", "commutant-mod-kq", "--out", str(tmp_path))
    assert proc.returncode == 2
    assert "decay suites require q < 1" in proc.stderr
    assert not tmp_path.joinpath("commutant-mod-kq_q1.json").exists()


def test_q_one_allowed_for_spectrum_only(tmp_path):
    assert main(["--q", "1.0", "--suite", "spectrum", "--out", str(tmp_path)]) == 0
    assert [p.name for p in tmp_path.iterdir()] == ["spectrum.json"]


@pytest.mark.parametrize(
    "args",
    [
        ["--lmax", "3"],
        ["--lmax", "0.25"],
        ["--suite", "bogus"],
        ["--q", "0"],
        ["--q", "1.5"],
        ["--suite", "first-order-mod-kq", "--lmax", "5/2"],
        ["--d-profile", "nope", "--suite", "relations"],
        ["--margin", "0", "--suite", "relations"],
    ],
)
def test_config_errors_exit_two(tmp_path, args, capsys):
    assert main([*args, "--out", str(tmp_path)]) == 2
    assert "error" in capsys.readouterr().err


def test_empty_suite_selection(tmp_path):
    out = tmp_path / "reports"
    assert main(["--suite", "", "--out", str(out)]) == 0
    assert not out.exists()


def test_env_var_output_dir(tmp_path):
    env = {**os.environ, "PODLES_OUT": str(tmp_path / "from_env")}
    proc = run_cli("--suite", "spectrum", env=env, cwd=tmp_path)
    assert proc.returncode == 0
    assert (tmp_path / "from_env" / "spectrum.json").exists()


def test_csv_report(tmp_path):
    assert main(["--suite", "relations", "--lmax", "21/2", "--format", "csv", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "relations_q0.5.csv")
    assert tuple(rows[0]) == REPORT_CSV_COLUMNS
    assert len(rows) == 5
    assert all(r[0] == "relations" and r[1] == "0.5" and r[2] == "21/2" and r[6] == "1" for r in rows[1:])


def test_byte_identical_reports(tmp_path):
    args = ["--q", "0.5", "--lmax", "15/2", "--suite", "relations,structure,spectrum,commutant-mod-kq",
            "--random-pairs", "3", "--seed", "9"]
    assert main([*args, "--out", str(tmp_path / "one")]) in (0, 1)
    assert main([*args, "--out", str(tmp_path / "two")]) in (0, 1)
    for p in (tmp_path / "one").iterdir():
        assert p.read_bytes() == (tmp_path / "two" / p.name).read_bytes()


def test_dump_spectrum(tmp_path):
    assert main(["--dump", "spectrum", "--lmax", "3/2", "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "spectrum.csv")
    assert rows[0] == ["eigenvalue", "multiplicity"]
    assert [(float(v), int(m)) for v, m in rows[1:]] == [(-2.0, 4), (-1.0, 2), (1.0, 2), (2.0, 4)]


def test_dump_block_norms_Lq(tmp_path):
    assert main(["--dump", "block-norms", "--operator", "Lq", "--lmax", "9/2", "--q", "0.5",
                 "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "block_norms.csv")
    assert rows[0] == ["operator", "l_row", "l_col", "norm"]
    for op, lr, lc, norm in rows[1:]:
        assert op == "Lq"
        l = parse_half(lr).value
        expected = 0.5**l if lr == lc else 0.0
        assert float(norm) == pytest.approx(expected, abs=1e-15)


def test_dump_operator(tmp_path):
    assert main(["--dump", "operator", "--operator", "pi(b)", "--operator", "[D,pi(a)]", "--lmax", "3/2",
                 "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "operator_pi_b.csv")
    assert rows[0] == ["row", "col", "re", "im"]
    assert len(rows) == 1 + 12 * 12
    assert (tmp_path / "operator_D_pi_a.csv").exists()


def test_dump_unknown_operator(tmp_path):
    assert main(["--dump", "operator", "--operator", "pi(c)", "--out", str(tmp_path)]) == 2


@pytest.mark.slow
def test_all_suites_pass(tmp_path):
    proc = run_cli("--q", "0.5", "--lmax", "21/2", "--suite", "all", "--format", "json", "--out", str(tmp_path))
    assert proc.returncode == 0, proc.stdout + proc.stderr
    files_ = sorted(p.name for p in tmp_path.iterdir())
    assert len(files_) == 9 and "spectrum.json" in files_
    for p in tmp_path.iterdir():
        jsonschema.validate(json.loads(p.read_text()), SCHEMA)
