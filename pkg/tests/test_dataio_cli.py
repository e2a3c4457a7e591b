import io
import json
import math
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest

from opcombine import cli
from opcombine.dataio import (
    SCENARIO_SCHEMA,
    ExceedanceStatement,
    LossRecord,
    exceedance_quantile_level,
    exceedance_rate,
    file_digest,
    ingest_losses,
    lognormal_from_exceedances,
    load_scenario,
    parse_scenario,
)
from opcombine.distributions import LognormalParams
from opcombine.errors import DomainError, EmptyDataError
from opcombine.evidence import parse_ds, parse_pbox
from opcombine.lda import CapitalReport

HEADER = "date,cell,gross_loss,recovery\n"


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


# ---------------------------------------------------------------- ingestion

def test_single_loss_above_threshold(tmp_path):
    p = _write(tmp_path, "l.csv", HEADER + "2004-03-01,retail,50000,\n")
    res = ingest_losses(p, 10_000)
    assert len(res.records) == 1
    assert res.counts_by_year("retail") == {2004: 1}
    assert res.truncated == 0


def test_threshold_truncation_and_counts(tmp_path):
    rows = [
        "2001-01-05,a,20000,1000",
        "2001-06-01,a,5000,",
        "2003-02-02,a,12000,",
        "2003-02-03,b,90000,",
        "2003-12-31,b,9999.99,",
    ]
    res = ingest_losses(_write(tmp_path, "l.csv", HEADER + "\n".join(rows) + "\n"), 10_000)
    assert res.years == (2001, 2002, 2003)
    assert res.annual_counts == {"a": (1, 0, 1), "b": (0, 0, 1)}
    assert res.truncated == 2 and res.truncated_by_cell == {"a": 1, "b": 1}
    assert res.records[0].net_loss == 19_000
    assert "truncated" in res.summary() or "below" in res.summary()


def test_bad_rows_are_reported_with_line_numbers(tmp_path):
    rows = ["2001-01-05,a,20000,", "not-a-date,a,1,", "2001-02-01,a,-5,", "2001-03-01,a,100,200", "2002-01-01,a,15000,"]
    res = ingest_losses(_write(tmp_path, "l.csv", HEADER + "\n".join(rows) + "\n"), 10_000)
    assert [ln for ln, _ in res.errors] == [3, 4, 5]
    assert len(res.records) == 2
    assert "line 3" in res.summary()


def test_empty_file(tmp_path):
    with pytest.raises(EmptyDataError):
        ingest_losses(_write(tmp_path, "e.csv", ""), 0)


def test_everything_below_threshold(tmp_path):
    p = _write(tmp_path, "l.csv", HEADER + "2001-01-05,a,200,\n2001-01-06,a,300,\n")
    with pytest.raises(EmptyDataError, match="below|truncated"):
        ingest_losses(p, 1000)


def test_threshold_required(tmp_path):
    p = _write(tmp_path, "l.csv", HEADER + "2001-01-05,a,200,\n")
    with pytest.raises(DomainError):
        ingest_losses(p, None)


def test_header_checked(tmp_path):
    with pytest.raises(DomainError):
        ingest_losses(_write(tmp_path, "l.csv", "when,where,amount\n2001-01-01,a,5\n"), 0)


def test_loss_record_validation():
    import datetime as dt
    with pytest.raises(DomainError):
        LossRecord(dt.date(2001, 1, 1), "a", 0.0)
    with pytest.raises(DomainError):
        LossRecord(dt.date(2001, 1, 1), "a", 10.0, 11.0)


def test_file_digest_depends_on_content(tmp_path):
    a = _write(tmp_path, "a", "x")
    b = _write(tmp_path, "b", "y")
    assert file_digest(a) != file_digest(b)
    assert file_digest(a, b) == file_digest(a, b)
    assert len(file_digest(a)) == 64


# ---------------------------------------------------------------- exceedances and scenarios

def test_exceedance_conventions():
    s = ExceedanceStatement(1e6, 10)
    assert exceedance_rate(s) == 0.1
    assert exceedance_rate(s, "median") == pytest.approx(math.log(2) / 10)
    assert exceedance_rate(ExceedanceStatement(1e6, 10, "median")) == pytest.approx(math.log(2) / 10)
    assert exceedance_quantile_level(s, 20) == pytest.approx(0.995)
    with pytest.raises(DomainError):
        exceedance_rate(s, "mode")
    with pytest.raises(DomainError):
        exceedance_quantile_level(s, 0.05)


def test_lognormal_from_two_exceedances_is_exact():
    truth = LognormalParams(10.0, 1.7)
    lam = 15.0
    stmts = [ExceedanceStatement(float(truth.quantile(1 - 1 / (lam * d))), d) for d in (5, 40)]
    fit = lognormal_from_exceedances(stmts, lam)
    assert fit.mu == pytest.approx(10.0, rel=1e-10)
    assert fit.sigma == pytest.approx(1.7, rel=1e-10)


def test_lognormal_from_inconsistent_exceedances():
    with pytest.raises(DomainError):
        lognormal_from_exceedances([ExceedanceStatement(5e6, 10), ExceedanceStatement(1e6, 50)], 20)
    with pytest.raises(DomainError):
        lognormal_from_exceedances([ExceedanceStatement(5e6, 10)], 20)


SCENARIO = {
    "elicited_intervals": [{"name": "fraud", "mean": 0.5, "lower": 0.25, "upper": 0.75, "coverage": 0.6667}],
    "exceedances": [{"name": "ten", "amount": 1e6, "every_years": 10},
                    {"name": "fifty", "amount": 5e6, "every_years": 50, "recurrence": "median"}],
    "expert_opinions": [{"name": "panel", "values": [0.6, 0.7, 0.9], "xi": 4}],
    "dirichlet": [{"name": "sev", "knots": [0, 10, 30, 50, 120, 600],
                   "values": [0, 0.1, 0.5, 0.75, 0.9, 1], "concentration": 10}],
    "ds_structures": [{"name": "A", "elements": [[5, 20, "1/3"], [10, 25, "1/3"], [15, 30, "1/3"]]}],
}


def test_scenario_parses_into_typed_objects():
    cfg = parse_scenario(SCENARIO)
    assert cfg.elicited_intervals["fraud"].coverage == 0.6667
    assert cfg.exceedances["fifty"].recurrence == "median"
    assert cfg.exceedances["ten"].recurrence == "mean"
    assert cfg.expert_opinions["panel"] == ((0.6, 0.7, 0.9), 4)
    assert cfg.dirichlet["sev"].base(50.0) == 0.75
    assert cfg.ds_structures["A"].masses == (Fraction(1, 3),) * 3


@pytest.mark.parametrize("bad", [
    {"elicited_intervals": [{"mean": 0.5, "lower": 0.25, "upper": 0.75, "coverage": 1.5}]},
    {"exceedances": [{"amount": 1, "every_years": 10, "recurrence": "mode"}]},
    {"dirichlet": [{"knots": [0], "values": [1], "concentration": 0}]},
    {"ds_structures": [{"elements": [[0, 1]]}]},
    {"unknown": 1},
])
def test_scenario_schema_rejects(bad):
    with pytest.raises(DomainError, match="scenario config invalid"):
        parse_scenario(bad)


def test_scenario_file(tmp_path):
    p = _write(tmp_path, "s.json", json.dumps(SCENARIO))
    assert "sev" in load_scenario(p).dirichlet
    with pytest.raises(DomainError):
        load_scenario(_write(tmp_path, "bad.json", "{"))


def test_schema_is_valid_draft():
    import jsonschema
    jsonschema.Draft202012Validator.check_schema(SCENARIO_SCHEMA)


# ---------------------------------------------------------------- CLI

def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.main(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def kv(text):
    d = {}
    for line in text.splitlines():
        if " = " in line and not line.startswith("#"):
            k, v = line.split(" = ", 1)
            d[k] = v
    return d


def assert_audit(text):
    for key in ("# audit", "# command:", "# input_sha256:", "# seed:", "# method:"):
        assert key in text


def test_cli_sufficiency():
    code, out, _ = run("sufficiency", "--family", "lognormal", "--mu", "0", "--sigma", "2", "--q", "0.999", "--eps", "0.1")
    assert code == 0
    assert kv(out)["n_required"] == "140986"
    assert_audit(out)
    code, out, _ = run("sufficiency", "--family", "lognormal", "--mu", "0", "--sigma", "2", "--q", "0.999",
                       "--n", "1000", "--expected-n", "10")
    assert float(kv(out)["epsilon"]) == pytest.approx(1.18, abs=0.01)
    assert float(kv(out)["single_loss_level"]) == 0.9999


def test_cli_fit_prior():
    code, out, _ = run("fit-prior", "--mean", "0.5", "--a", "0.25", "--b", "0.75", "--p", "0.6667")
    assert code == 0
    d = kv(out)
    assert float(d["alpha"]) == pytest.approx(3.407, abs=0.01)
    assert float(d["beta"]) == pytest.approx(0.147, abs=0.001)
    assert_audit(out)


def test_cli_fit_prior_unattainable_is_data_error():
    code, _, err = run("fit-prior", "--mean", "0.5", "--a", "0.25", "--b", "0.75", "--p", "0.000001")
    assert code == 2 and "attainable" in err


def test_cli_fit_prior_from_scenario_and_exceedances(tmp_path):
    p = _write(tmp_path, "s.json", json.dumps(SCENARIO))
    code, out, _ = run("fit-prior", "--scenario", str(p), "--name", "fraud")
    assert code == 0 and float(kv(out)["alpha"]) == pytest.approx(3.407, abs=0.01)
    code, out, _ = run("fit-prior", "--scenario", str(p), "--exceedances", "--intensity", "20")
    d = kv(out)
    assert code == 0 and d["recurrence[fifty]"] == "median" and float(d["sigma"]) > 0
    code, out, _ = run("fit-prior", "--scenario", str(p), "--exceedances", "--intensity", "20", "--recurrence", "mean")
    assert kv(out)["recurrence[fifty]"] == "mean"
    code, _, err = run("fit-prior", "--scenario", str(p), "--exceedances")
    assert code == 1 and "--intensity" in err


def test_cli_fit_prior_empirical_bayes(tmp_path):
    rng = np.random.default_rng(0)
    rows = []
    for c in range(30):
        lam = rng.gamma(4, 0.25)
        for year in range(2000, 2010):
            rows += [f"{year}-06-01,c{c},50000,"] * int(rng.poisson(lam))
    p = _write(tmp_path, "l.csv", HEADER + "\n".join(rows) + "\n")
    code, out, _ = run("fit-prior", "--losses", str(p), "--threshold", "1000")
    assert code == 0 and float(kv(out)["alpha"]) > 0
    code, _, err = run("fit-prior", "--losses", str(p))
    assert code == 1 and "--threshold" in err


def test_cli_update_poisson(tmp_path):
    traj = tmp_path / "traj.txt"
    prior = kv(run("fit-prior", "--mean", "0.5", "--a", "0.25", "--b", "0.75", "--p", "0.6667")[1])
    code, out, _ = run("update", "--family", "poisson", "--alpha", prior["alpha"], "--beta", prior["beta"],
                       "--counts", "0,0", "--trajectory", str(traj))
    assert code == 0
    assert float(kv(out)["posterior_mean"]) == pytest.approx(0.385, abs=0.002)
    cols = np.loadtxt(traj)
    assert cols.shape == (2, 7)
    assert cols[0, 4] == pytest.approx(0.436, abs=0.002)
    code, out, _ = run("update", "--family", "poisson", "--improper", "--counts", "2,4")
    assert float(kv(out)["alpha_T"]) == 7.0


def test_cli_update_from_losses(tmp_path):
    p = _write(tmp_path, "l.csv", HEADER + "2001-01-05,a,20000,\n2003-01-05,a,30000,\n2003-02-05,b,30000,\n")
    code, out, _ = run("update", "--family", "poisson", "--alpha", "2", "--beta", "0.5",
                       "--losses", str(p), "--threshold", "10000", "--cell", "a")
    assert code == 0 and kv(out)["years"] == "2001-2003"
    assert float(kv(out)["alpha_T"]) == 4.0
    code, out, _ = run("update", "--family", "lognormal", "--mu0", "9", "--sigma0", "1", "--sigma", "1",
                       "--losses", str(p), "--threshold", "10000", "--cell", "a")
    assert code == 0 and kv(out)["n"] == "2"
    code, _, err = run("update", "--family", "poisson", "--alpha", "2", "--beta", "0.5", "--losses", str(p))
    assert code == 1 and "--threshold" in err


def test_cli_update_lognormal():
    code, out, _ = run("update", "--family", "lognormal", "--mu0", "0", "--sigma0", "1", "--sigma", "1",
                       "--log-losses", "2")
    d = kv(out)
    assert float(d["mu_posterior_mean"]) == pytest.approx(1.0)
    assert float(d["mu_posterior_sd"]) == pytest.approx(math.sqrt(0.5))


def test_cli_three_source():
    code, out, _ = run("three-source", "--family", "frequency", "--alpha0", "3.407", "--beta0", "0.147",
                       "--scale", "1", "--experts", "0.7", "--xi", "4")
    d = kv(out)
    assert code == 0
    assert float(d["nu"]) == pytest.approx(-1.593)
    assert float(d["phi"]) == pytest.approx(2.8)
    assert d["xi_source"] == "supplied"
    code, _, err = run("three-source", "--family", "frequency", "--alpha0", "3.4", "--beta0", "0.15",
                       "--scale", "1", "--experts", "0.7")
    assert code == 1 and "--xi" in err
    code, out, _ = run("three-source", "--family", "frequency", "--alpha0", "3.4", "--beta0", "0.15",
                       "--scale", "1", "--experts", "1,1,3", "--estimate-xi", "--counts", "0,1")
    assert float(kv(out)["xi"]) == pytest.approx(25 / 12)
    code, out, _ = run("three-source", "--family", "severity", "--mu0", "0", "--sigma0", "1", "--sigma", "1",
                       "--log-losses", "2", "--expert-mus", "1", "--xi", "1")
    d = kv(out)
    assert float(d["mu_posterior_mean"]) == pytest.approx(1.0)
    assert sum(float(d[k]) for k in ("weight_prior", "weight_internal", "weight_expert")) == pytest.approx(1.0)


def test_cli_dirichlet(tmp_path):
    out_path = tmp_path / "band.txt"
    code, out, _ = run("dirichlet", "--knots", "0,10,30,50,120,600", "--values", "0,0.1,0.5,0.75,0.9,1",
                       "--concentration", "10", "--samples", "20,30,50,80,120,170,220,280",
                       "--grid", "50,100", "--lower-q", "0.1", "--upper-q", "0.9", "--out", str(out_path))
    assert code == 0 and kv(out)["posterior_concentration"] == "18.0"
    cols = np.loadtxt(out_path)
    assert cols[0, 2] == pytest.approx(10.5 / 18, abs=1e-12)
    code, _, err = run("dirichlet", "--knots", "0,1", "--values", "0,1", "--concentration", "1", "--grid", "0.5")
    assert code == 1 and "--lower-q" in err


def test_cli_ds_combine(tmp_path):
    a = _write(tmp_path, "a.dss", "5 20 1/3\n10 25 1/3\n15 30 1/3\n")
    b = _write(tmp_path, "b.dss", "10 25 1/3\n15 30 1/3\n22 35 1/3\n")
    c = tmp_path / "c.dss"
    code, out, _ = run("ds-combine", str(a), str(b), "--out", str(c), "--pbox-out", str(tmp_path / "c.pbox"))
    d = kv(out)
    assert code == 0
    assert d["conflict"] == "1/9" and float(d["conflict_float"]) == pytest.approx(0.1111, abs=1e-4)
    assert d["n_focal_elements"] == "7"
    combined = parse_ds(c.read_text())
    assert dict(combined.elements())[(15.0, 25.0)] == Fraction(1, 4)
    parse_pbox((tmp_path / "c.pbox").read_text())
    assert_audit(out)


def test_cli_ds_combine_errors(tmp_path):
    a = _write(tmp_path, "a.dss", "0 1 1\n")
    b = _write(tmp_path, "b.dss", "2 3 1\n")
    code, _, err = run("ds-combine", str(a), str(b))
    assert code == 2 and "conflict" in err
    s = _write(tmp_path, "s.dss", "# kind: statistical\n0 5 1\n")
    code, _, err = run("ds-combine", str(a), str(s))
    assert code == 2 and "allow_mixed" in err
    code, _, _ = run("ds-combine", str(a), str(s), "--allow-mixed")
    assert code == 0


def test_cli_ks_bounds(tmp_path):
    code, out, _ = run("ks-bounds", "--samples", "3.5,4,6,8.1,9.2,12.3,14.8,16.9,18,20", "--alpha", "0.2",
                       "--support", "0", "30")
    assert code == 0
    assert float(kv(out)["D"]) == pytest.approx(0.3226, abs=1e-4)
    assert kv(out)["kind"] == "statistical"
    box = parse_pbox(out.split("# audit")[0].split("kind = statistical\n", 1)[1])
    assert box.grid[0] == 0 and box.grid[-1] == 30
    code, _, err = run("ks-bounds", "--samples", "1,2,3")
    assert code == 1 and "--alpha" in err


def test_cli_var_and_determinism(tmp_path):
    argv = ["var", "--cell", "retail:10:0:2", "--n-sims", "20000", "--seed", "3", "--q", "0.999"]
    code1, out1, _ = run(*argv)
    code2, out2, _ = run(*argv, "--workers", "4")
    assert code1 == code2 == 0
    assert out1.split("# audit")[0] == out2.split("# audit")[0]
    rep = CapitalReport.from_text(out1.split("# audit")[0])
    assert rep.seed == 3 and rep.n_sims == 20000
    assert "# seed: 3" in out1
    code, _, err = run("var", "--cell", "retail:10:0:2", "--n-sims", "1000", "--q", "0.999")
    assert code == 1 and "--seed" in err


def test_cli_var_model_file(tmp_path):
    model = {"cells": [
        {"label": "a", "frequency": {"gamma": [3.4, 0.13]}, "severity": {"lognormal_posterior": [1, 0.2, 1.0]}},
        {"label": "b", "frequency": {"negbin": [2, 0.3]}, "severity": {"lognormal": [0, 1]}},
    ]}
    p = _write(tmp_path, "m.json", json.dumps(model))
    hist = tmp_path / "h.txt"
    code, out, _ = run("var", "--model", str(p), "--n-sims", "5000", "--seed", "1", "--q", "0.99",
                       "--aggregation", "sum-of-vars", "--mode", "predictive", "--histogram", str(hist), "--bins", "20")
    assert code == 0
    rep = CapitalReport.from_text(out.split("# audit")[0])
    assert rep.var == sum(rep.cell_vars) and rep.mode == "predictive"
    assert np.loadtxt(hist).shape == (20, 3)
    bad = _write(tmp_path, "bad.json", json.dumps({"cells": [{"frequency": {"weibull": 1}, "severity": {"lognormal": [0, 1]}}]}))
    code, _, _ = run("var", "--model", str(bad), "--n-sims", "10", "--seed", "1", "--q", "0.9")
    assert code == 2


def test_cli_min_var():
    code, out, _ = run("min-var", "--estimate", "1:1", "--estimate", "2:3:expert")
    d = kv(out)
    assert code == 0
    assert float(d["weight[0]"]) == 0.75 and float(d["variance"]) == 0.75
    code, _, _ = run("min-var", "--estimate", "1:1")
    assert code == 1
    code, _, _ = run("min-var", "--estimate", "1:1", "--estimate", "2:3:gossip")
    assert code == 2


def test_cli_usage_errors():
    assert run()[0] == 1
    assert run("bogus")[0] == 1
    assert run("sufficiency", "--family", "lognormal", "--mu", "0", "--sigma", "2")[0] == 1
    code, _, err = run("var", "--n-sims", "10", "--seed", "1", "--q", "0.9")
    assert code == 1 and "--cell" in err


def test_cli_missing_file_is_data_error(tmp_path):
    code, _, _ = run("ds-combine", str(tmp_path / "nope"), str(tmp_path / "nope2"))
    assert code == 2


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "opcombine.cli", "min-var", "--estimate", "1:1", "--estimate", "3:1"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "value = 2.0" in r.stdout
    r = subprocess.run([sys.executable, "-m", "opcombine.cli", "var"], capture_output=True, text=True)
    assert r.returncode == 1
