import json

import pytest

from expprod import cli


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def chain_model(tmp_path):
    path = tmp_path / "chain6.json"
    path.write_text(json.dumps({
        "sites": 6,
        "bonds": [[i, i + 1, 1.0] for i in range(5)],
        "gamma": 1.0, "beta": 2.0,
    }))
    return str(path)


# ---------------------------------------------------------------------------
# bch
# ---------------------------------------------------------------------------

def test_bch_trotter_third_order(capsys):
    code, out, _ = run(capsys, "bch", "--stages", "A:x,B:x", "--order", "3")
    assert code == 0
    assert "degree 2: 1/2 [A,B]" in out
    assert "degree 3: 1/12 [A,[A,B]] + 1/12 [[A,B],B]" in out


def test_bch_strang_even_orders_vanish(capsys):
    code, out, _ = run(capsys, "bch", "--stages", "A:x/2,B:x,A:x/2", "--order", "4")
    assert code == 0
    assert "degree 2: 0" in out
    assert "degree 4: 0" in out


def test_bch_single_generator(capsys):
    code, out, _ = run(capsys, "bch", "--stages", "A:x", "--order", "5")
    assert code == 0
    assert out.splitlines()[0] == "degree 1: 1 A"
    assert all(line.endswith(": 0") for line in out.splitlines()[1:])


def test_bch_bad_stage_grammar(capsys):
    code, _, err = run(capsys, "bch", "--stages", "Ax", "--order", "3")
    assert code == cli.CONFIG_ERROR
    assert "config error" in err


# ---------------------------------------------------------------------------
# scheme
# ---------------------------------------------------------------------------

def test_scheme_list_names_everything(capsys):
    code, out, _ = run(capsys, "scheme", "list")
    assert code == 0
    for name in ("trotter", "strang", "suzuki8", "ruth", "hybrid_fourth",
                 "timeordered4"):
        assert name in out


def test_scheme_show_and_check(capsys):
    code, out, _ = run(capsys, "scheme", "show", "ruth")
    assert code == 0
    doc = json.loads(out)
    assert doc["stages"][0]["coeff"] == "7/24"
    code, out, _ = run(capsys, "scheme", "check", "suzuki4", "--order", "5")
    assert code == 0
    assert json.loads(out) == {"scheme": "suzuki4", "claimed": 4, "verified": 4}


def test_scheme_unknown_name(capsys):
    code, _, err = run(capsys, "scheme", "show", "nope")
    assert code == cli.CONFIG_ERROR


# ---------------------------------------------------------------------------
# solve / family
# ---------------------------------------------------------------------------

def test_solve_prints_exact_rationals(capsys):
    code, out, _ = run(capsys, "solve", "--pattern", "ABABAB", "--order", "3",
                       "--fix", "p6=1",
                       "--guess", "p1=0.33,p2=0.62,p3=0.7,p4=-0.62,p5=-0.05")
    assert code == 0
    doc = json.loads(out)
    assert doc["converged"] is True
    assert doc["solution_exact"] == {"p1": "7/24", "p2": "2/3", "p3": "3/4",
                                     "p4": "-2/3", "p5": "-1/24", "p6": "1"}


def test_solve_nonconvergence_exit_code(capsys):
    # order 3 on pattern ABA has no real solution reachable from this guess
    code, out, _ = run(capsys, "solve", "--pattern", "ABA", "--order", "3",
                       "--guess", "p1=0.5,p2=0.5,p3=0.5")
    assert code == cli.NONCONVERGENCE
    doc = json.loads(out)
    assert doc["converged"] is False


def test_family_csv_with_ruth_row(tmp_path, capsys):
    out_path = tmp_path / "family.csv"
    code, _, _ = run(capsys, "family", "--p6", "0.9:1.1:0.1", "--out", str(out_path))
    assert code == 0
    lines = out_path.read_text().splitlines()
    assert lines[0] == "p6,p1,p2,p3,p4,p5,max_residual,converged"
    ruth_row = [ln for ln in lines[1:] if ln.startswith("1,")]
    assert ruth_row and ruth_row[0].endswith("true")
    assert (tmp_path / "family.csv.manifest.json").exists()


# ---------------------------------------------------------------------------
# converge
# ---------------------------------------------------------------------------

def test_converge_strang_slope(tmp_path, capsys):
    out_path = tmp_path / "conv.csv"
    code, out, _ = run(capsys, "converge", "--scheme", "strang", "--out", str(out_path))
    assert code == 0
    doc = json.loads(out)
    assert abs(doc["slope"] - 2.0) < 0.2
    lines = out_path.read_text().splitlines()
    assert lines[0] == "dt,error"
    assert len(lines) == len(doc["dt"]) + 1


def test_converge_ruth_slope(capsys):
    code, out, _ = run(capsys, "converge", "--scheme", "ruth")
    assert code == 0
    assert abs(json.loads(out)["slope"] - 3.0) < 0.2


# ---------------------------------------------------------------------------
# demo runs
# ---------------------------------------------------------------------------

def test_precession_csv_and_determinism(tmp_path, capsys):
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    for path in (out1, out2):
        code, _, _ = run(capsys, "precession", "--scheme", "strang",
                         "--dt", "1e-3", "--steps", "2000",
                         "--sample-every", "500", "--out", str(path))
        assert code == 0
    assert out1.read_bytes() == out2.read_bytes()
    lines = out1.read_text().splitlines()
    assert lines[0] == "t,energy,norm"
    first = lines[1].split(",")
    assert float(first[1]) == 1.0
    manifest = json.loads((tmp_path / "a.csv.manifest.json").read_text())
    assert manifest["config"]["dt"] == 1e-3


def test_umeno_csv(tmp_path, capsys):
    out_path = tmp_path / "u.csv"
    code, _, _ = run(capsys, "umeno", "--scheme", "trotter", "--dt", "1e-3",
                     "--steps", "5000", "--sample-every", "1000",
                     "--out", str(out_path))
    assert code == 0
    lines = out_path.read_text().splitlines()
    assert lines[0] == "t,energy,q1,q2"
    assert float(lines[1].split(",")[1]) == pytest.approx(2.0, abs=1e-9)


def test_timedep_needs_t_slot(capsys):
    code, _, err = run(capsys, "timedep", "--scheme", "strang")
    assert code == cli.CONFIG_ERROR


def test_timedep_trajectory(tmp_path, capsys):
    out_path = tmp_path / "td.csv"
    code, _, _ = run(capsys, "timedep", "--scheme", "timeordered2",
                     "--dt", "0.05", "--steps", "20", "--out", str(out_path))
    assert code == 0
    lines = out_path.read_text().splitlines()
    assert lines[0] == "t,re0,im0,re1,im1,norm"
    final_norm = float(lines[-1].split(",")[-1])
    assert final_norm == pytest.approx(1.0, abs=1e-12)


# ---------------------------------------------------------------------------
# qmc subcommands
# ---------------------------------------------------------------------------

def test_qmc_run_repeatable(tmp_path, chain_model, capsys):
    args = ["qmc", "--model", chain_model, "--n", "4", "--sweeps", "500",
            "--therm", "100", "--seed", "42"]
    code, out1, _ = run(capsys, *args)
    assert code == 0
    code, out2, _ = run(capsys, *args)
    assert out1 == out2
    doc = json.loads(out1)
    assert doc["seed"] == 42 and doc["n"] == 4
    assert len(doc["bond_zz"]) == 5


def test_qmc_writes_traces_and_manifest(tmp_path, chain_model, capsys):
    base = tmp_path / "run"
    code, _, _ = run(capsys, "qmc", "--model", chain_model, "--n", "4",
                     "--sweeps", "300", "--therm", "50", "--seed", "1",
                     "--out", str(base))
    assert code == 0
    assert (tmp_path / "run.json").exists()
    traces = (tmp_path / "run.traces.csv").read_text().splitlines()
    assert traces[0] == "sweep,bond_zz,trotter_corr,diag_energy,sigma_x"
    assert len(traces) == 250 + 1
    assert (tmp_path / "run.manifest.json").exists()


def test_qmc_scientific_notation_sweeps(chain_model, capsys):
    code, out, _ = run(capsys, "qmc", "--model", chain_model, "--n", "2",
                       "--sweeps", "1e3", "--therm", "2e2", "--seed", "7")
    assert code == 0
    assert json.loads(out)["sweeps"] == 1000


def test_anneal_cli(tmp_path, capsys):
    model = tmp_path / "frus.json"
    from expprod.qmc import frustrated_square

    model.write_text(json.dumps(frustrated_square().to_json()))
    code, out, _ = run(capsys, "anneal", "--model", str(model), "--n", "8",
                       "--schedule", "2.5:1e-4:14", "--sweeps", "60", "--seed", "3")
    assert code == 0
    doc = json.loads(out)
    assert doc["energy"] <= -3.0
    assert len(doc["configuration"]) == 4


def test_extrapolate_cli(tmp_path, chain_model, capsys):
    pair = tmp_path / "pair.json"
    pair.write_text(json.dumps({"sites": 2, "bonds": [[0, 1, 1.0]],
                                "gamma": 1.0, "beta": 1.0}))
    code, out, _ = run(capsys, "extrapolate", "--model", str(pair),
                       "--n-list", "4,6,8", "--sweeps", "0")
    assert code == 0
    doc = json.loads(out)
    assert doc["dominant_power"] in (1, 2)
    assert abs(doc["c0"] - 0.5169083255250205) < 2e-3


# ---------------------------------------------------------------------------
# config files and error paths
# ---------------------------------------------------------------------------

def test_config_file_supplies_defaults(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"experiment": "precession", "scheme": "strang",
                               "gamma": 0.75, "dt": 1e-3, "steps": 1000,
                               "sample_every": 500}))
    out_path = tmp_path / "prec.csv"
    code, _, _ = run(capsys, "--config", str(cfg), "precession",
                     "--out", str(out_path))
    assert code == 0
    manifest = json.loads((tmp_path / "prec.csv.manifest.json").read_text())
    assert manifest["config"]["steps"] == 1000


def test_config_file_rejects_unknown_keys(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"scheme": "strang", "bogus_key": 1}))
    code, _, err = run(capsys, "--config", str(cfg), "precession")
    assert code == cli.CONFIG_ERROR
    assert "bogus_key" in err


def test_missing_model_file(capsys):
    code, _, err = run(capsys, "qmc", "--model", "/nonexistent.json",
                       "--n", "2", "--sweeps", "100")
    assert code == cli.CONFIG_ERROR


def test_csv_floats_have_17_significant_digits(tmp_path, capsys):
    out_path = tmp_path / "c.csv"
    run(capsys, "converge", "--scheme", "strang", "--out", str(out_path))
    body = out_path.read_text()
    assert "\r" not in body
    first_dt = body.splitlines()[1].split(",")[0]
    assert len(first_dt.replace(".", "").replace("-", "").lstrip("0")) >= 16
