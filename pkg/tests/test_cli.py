import csv
import json
import random
import subprocess
import sys

from helpers import inflated_instance

from sosbits.certificate import SoSCertificate, verify
from sosbits.cli import main
from sosbits.systems import ConstraintSystem, max_bisection


def run(*argv):
    return main([str(a) for a in argv])


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "sosbits", "counterexample", "--n", "2", "--eps", "1/4"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "chain" in proc.stdout


def test_system_command_round_trip(tmp_path):
    out = tmp_path / "sys.json"
    assert run("system", "--system", "boolean_chain", "--n", 2, "--k", 1, "--eps", "1/4", "--out", out) == 0
    sys_ = ConstraintSystem.from_json(json.loads(out.read_text()))
    assert sys_.nvars == 4
    # a system file is accepted anywhere a registry name is
    assert run("moment", "--system", out, "--degree", 1) == 0


def test_counterexample_emits_verifying_certificate(tmp_path):
    cert_path, table, report = tmp_path / "c.json", tmp_path / "t.csv", tmp_path / "r.json"
    assert run("counterexample", "--n", 3, "--eps", "1/8", "--emit", cert_path,
               "--table", table, "--report", report) == 0
    assert run("verify-cert", "--system", "chain", "--n", 3, "--eps", "1/8", "--cert", cert_path) == 0
    rows = list(csv.DictReader(table.open()))
    assert int(rows[0]["upper_bits"]) >= int(rows[0]["lower_bits"])
    summary = json.loads(report.read_text())
    assert summary["dual_bound_holds"] and summary["phi_audit_ok"]


def test_counterexample_boolean(tmp_path):
    report = tmp_path / "r.json"
    assert run("counterexample", "--n", 2, "--k", 2, "--eps", "1/4", "--report", report) == 0
    assert json.loads(report.read_text())["variables"] == 8


def test_corrupted_certificate_exit_code(tmp_path):
    cert_path = tmp_path / "c.json"
    run("counterexample", "--n", 2, "--eps", "1/4", "--emit", cert_path)
    obj = json.loads(cert_path.read_text())
    obj["gram_C"][1][1] = {"num": "-1", "den": "1"}
    cert_path.write_text(json.dumps(obj))
    assert run("verify-cert", "--system", "chain", "--n", 2, "--eps", "1/4", "--cert", cert_path) == 2
    obj["gram_C"].pop()
    cert_path.write_text(json.dumps(obj))
    assert run("verify-cert", "--system", "chain", "--n", 2, "--eps", "1/4", "--cert", cert_path) == 2


def test_richness_exit_codes(tmp_path):
    rep = tmp_path / "rich.json"
    assert run("richness", "--system", "max_csp", "--n", 3, "--degree", 2, "--report", rep) == 0
    assert json.loads(rep.read_text())["rich_verdict"] is True
    assert run("richness", "--system", "chain", "--n", 3, "--eps", "1/4", "--degree", 2) == 3
    assert run("richness", "--system", "boolean_chain", "--n", 1, "--block-k", 1, "--eps", "1/4",
               "--degree", 2) == 3


def test_parameter_and_io_errors(tmp_path):
    assert run("counterexample", "--n", 2, "--eps", "3/4") == 4
    assert run("counterexample", "--n", 2, "--eps", "abc") == 4
    assert run("richness", "--system", "nope", "--n", 2, "--degree", 1) == 4
    assert run("growth-sweep", "--n", "0..2") == 4
    assert run("verify-cert", "--system", "max_csp", "--n", 2, "--cert", tmp_path / "missing.json") == 5
    assert run("moment", "--system", "max_csp", "--n", 30, "--degree", 1) == 4


def test_rewrite_cert_command(tmp_path):
    sys_ = max_bisection(2)
    _, big, _, _ = inflated_instance(sys_, 2, random.Random(5))
    cert_path, rep, out, csv_path = (tmp_path / n for n in ("in.json", "rich.json", "out.json", "p.csv"))
    cert_path.write_text(json.dumps(big.to_json()))
    assert run("richness", "--system", "max_bisection", "--n", 2, "--degree", 2, "--report", rep) == 0
    assert run("rewrite-cert", "--system", "max_bisection", "--n", 2, "--cert", cert_path,
               "--richness", rep, "--out", out, "--report", csv_path) == 0
    new = SoSCertificate.from_json(json.loads(out.read_text()))
    assert verify(new, sys_).ok and new.target == big.target
    rows = list(csv.DictReader(csv_path.open()))
    assert [r["phase"] for r in rows] == ["input", "absorbed", "output"]
    assert int(rows[-1]["max_coeff_num_bits"]) < int(rows[0]["max_coeff_num_bits"])


def test_rewrite_cert_refuses_non_rich(tmp_path):
    rep, cert_path = tmp_path / "rich.json", tmp_path / "c.json"
    run("richness", "--system", "chain", "--n", 3, "--eps", "1/4", "--degree", 2, "--report", rep)
    run("counterexample", "--n", 3, "--eps", "1/4", "--emit", cert_path)
    assert run("rewrite-cert", "--system", "chain", "--n", 3, "--eps", "1/4", "--cert", cert_path,
               "--richness", rep) == 3


def test_growth_sweep_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run("growth-sweep", "--n", "1..5", "--eps", "1/4", "--out", a) == 0
    assert run("growth-sweep", "--n", "1..5", "--eps", "1/4", "--out", b, "--jobs", 2) == 0
    assert a.read_text() == b.read_text()
    rows = list(csv.DictReader(a.open()))
    assert [int(r["upper_bits"]) for r in rows] == [1, 4, 12, 31, 72]


def test_moment_output_is_deterministic(tmp_path, capsys):
    assert run("moment", "--system", "max_bisection", "--n", 1, "--degree", 1) == 0
    first = capsys.readouterr().out
    assert run("moment", "--system", "max_bisection", "--n", 1, "--degree", 1) == 0
    assert capsys.readouterr().out == first
    assert json.loads(first)["kernel"] == [[-1, 1, 1]]
