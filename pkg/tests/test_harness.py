import csv
import io
import json

import pytest

from scdg import DomainError, GameParams, PayoffMode
from scdg.harness import (
    SWEEP_COLUMNS,
    SweepSpec,
    main,
    run_compare,
    run_oracle_check,
    run_sweep,
    trial_draw,
    worker_count,
)

GAME = ["--c1", "1200", "--c2", "150", "--tau", "1000", "--theta1", "200", "--theta2", "200"]
FIG7 = GameParams(c1=800.0, c2=400.0, tau=200.0, v1=1.0, v2=1.0, theta1=100, theta2=100)


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


# -- solve ---------------------------------------------------------------------

def test_solve_csv(capsys):
    code, out, _ = run_cli(capsys, "solve", *GAME)
    assert code == 0
    assert "\r" not in out
    header, line = out.splitlines()
    assert header == "regime,r12,r21,tau1,tau2,psi1,psi2,psiT,sc_sum,provenance"
    rec = rows(out)[0]
    assert rec["regime"] == "T5" and rec["provenance"] == "ClosedForm"
    assert rec["r12"] == f"{396.75 / 1.455625:.12g}"


def test_solve_json(capsys):
    code, out, _ = run_cli(capsys, "solve", *GAME, "--format", "json")
    assert code == 0
    rec = json.loads(out)
    assert rec["regime"] == "T5"
    assert rec["r12"] == pytest.approx(272.56, abs=0.005)
    assert rec["sc_sum"] == pytest.approx(rec["psi1"] + rec["psi2"])


def test_solve_zero_attack(capsys):
    code, out, _ = run_cli(capsys, "solve", "--c1", "800", "--c2", "400", "--tau", "0",
                           "--theta1", "50", "--theta2", "100")
    assert code == 0
    assert float(rows(out)[0]["psiT"]) == 0.0


def test_solve_unclassified_is_numeric(capsys):
    code, out, _ = run_cli(capsys, "solve", "--c1", "90", "--c2", "30", "--tau", "100",
                           "--theta1", "3", "--theta2", "4", "--v1", "2")
    assert code == 0
    assert rows(out)[0]["provenance"] == "Numeric"


def test_solve_bad_input_exits_2(capsys):
    code, out, err = run_cli(capsys, "solve", "--c1", "1", "--c2", "1", "--tau", "1",
                             "--theta1", "2", "--theta2", "5")
    assert code == 2
    assert "theta1" in err and out == ""


def test_solve_writes_file(tmp_path, capsys):
    target = tmp_path / "out.csv"
    assert main(["solve", *GAME, "--out", str(target)]) == 0
    assert capsys.readouterr().out == ""
    assert target.read_bytes().startswith(b"regime,")


# -- sweep ---------------------------------------------------------------------

def test_sweep_direction_follows_sign_logic():
    base = GameParams(c1=800.0, c2=100.0, tau=200.0, v1=1.0, v2=1.0, theta1=50, theta2=100)
    out = run_sweep(SweepSpec(base, "c2", 100.0, 1000.0, 10), workers=1)
    assert [r["swept_value"] for r in out] == sorted(r["swept_value"] for r in out)
    t3 = [r for r in out if r["regime"].startswith("T3")]
    assert len(t3) >= 7
    # phi2*c1 - phi1*c2 > 0 on the whole range, so layer 1 donates
    for r in t3:
        assert r["r12"] > 0 and r["r21"] == 0
    amounts = [r["r12"] for r in t3]
    assert all(b < a for a, b in zip(amounts, amounts[1:]))


def test_sweep_theta1_transfer_grows():
    base = GameParams(c1=150.0, c2=1200.0, tau=1000.0, v1=1.0, v2=1.0, theta1=10, theta2=200)
    out = run_sweep(SweepSpec(base, "theta1", 40, 400, 13), workers=1)
    r21 = [r["r21"] for r in out if r["provenance"] == "ClosedForm"]
    assert len(r21) == 13
    assert all(b >= a for a, b in zip(r21, r21[1:]))
    assert r21[-1] > r21[0]


def test_sweep_two_steps(capsys):
    code, out, _ = run_cli(capsys, "sweep", *GAME, "--param", "tau", "--from", "900",
                           "--to", "1000", "--steps", "2")
    assert code == 0
    assert len(rows(out)) == 2
    assert out.splitlines()[0] == ",".join(SWEEP_COLUMNS)


def test_sweep_flags_invalid_points():
    base = GameParams(c1=800.0, c2=400.0, tau=200.0, v1=1.0, v2=1.0, theta1=50, theta2=100)
    out = run_sweep(SweepSpec(base, "c1", -400.0, 800.0, 4), workers=1)
    assert "c1" in out[0]["error"]
    assert all(r["error"] == "" for r in out[1:])


@pytest.mark.parametrize("kw", [dict(swept="d1"), dict(start=5.0, stop=1.0), dict(steps=1)])
def test_sweep_spec_validation(kw):
    args = dict(base=FIG7, swept="c2", start=100.0, stop=1000.0, steps=3)
    args.update(kw)
    with pytest.raises(DomainError):
        SweepSpec(**args)


def test_sweep_workers_do_not_change_output():
    spec = SweepSpec(FIG7, "c2", 300.0, 1000.0, 8)
    assert run_sweep(spec, workers=1) == run_sweep(spec, workers=4)


# -- compare -------------------------------------------------------------------

def test_trial_draws_are_keyed_by_index():
    assert trial_draw(42, 7) == trial_draw(42, 7)
    assert trial_draw(42, 7) != trial_draw(42, 8)
    assert trial_draw(42, 7) != trial_draw(43, 7)


def test_compare_dominance_fig7():
    for c2 in (300.0, 500.0, 700.0):
        p = GameParams(c1=800.0, c2=c2, tau=200.0, v1=1.0, v2=1.0, theta1=100, theta2=100)
        rep = run_compare(p, 2000, seed=1)
        tol = 1e-6 * p.total_value
        assert rep.spne.sc_sum >= rep.no_transfer.sc_sum - tol
        assert rep.spne.sc_sum >= rep.random_transfer.sc_sum - tol


def test_compare_single_trial_reproducible():
    a = run_compare(FIG7, 1, seed=9)
    b = run_compare(FIG7, 1, seed=9)
    assert a == b


def test_compare_independent_of_scheduling(monkeypatch):
    base = run_compare(FIG7, 3000, seed=5, workers=1)
    assert run_compare(FIG7, 3000, seed=5, workers=3, chunk=7) == base
    monkeypatch.setenv("SCDG_THREADS", "2")
    assert run_compare(FIG7, 3000, seed=5) == base


def test_compare_csv_bytes_repeat(capsys, monkeypatch):
    args = ["compare", "--c1", "800", "--c2", "400", "--tau", "200", "--theta1", "100",
            "--theta2", "100", "--trials", "500", "--seed", "42"]
    first = run_cli(capsys, *args)
    monkeypatch.setenv("SCDG_THREADS", "1")
    second = run_cli(capsys, *args)
    assert first[0] == 0 and first[1] == second[1]
    table = rows(first[1])
    assert [r["strategy"] for r in table] == ["NoTransfer", "RandomTransfer", "Spne"]
    assert table[1]["n_trials"] == "500" and table[1]["seed"] == "42"
    assert table[1]["amount_dist"] == "uniform[0,c_donor)"


def test_monte_carlo_convergence():
    small = run_compare(FIG7, 10_000, seed=3).random_transfer
    large = run_compare(FIG7, 100_000, seed=3).random_transfer
    assert abs(small.sc_sum - large.sc_sum) <= 3 * small.sc_sum_stderr


def test_fig9_asymmetry():
    # somewhere along the theta1 sweep random transfers favour layer 2 while
    # the equilibrium favours layer 1
    found = False
    for theta1 in (20, 50, 100):
        p = GameParams(c1=500.0, c2=150.0, tau=1000.0, v1=1.0, v2=1.0, theta1=theta1, theta2=200)
        rep = run_compare(p, 10_000, seed=42)
        if (rep.random_transfer.psi2 > rep.spne.psi2
                and rep.random_transfer.psi1 < rep.spne.psi1):
            found = True
            break
    assert found


def test_compare_validation():
    with pytest.raises(DomainError):
        run_compare(FIG7, 0, seed=1)
    with pytest.raises(DomainError):
        run_compare(FIG7, 10, seed=-1)


@pytest.mark.parametrize("value", ["0", "abc", "-2"])
def test_bad_thread_setting(monkeypatch, capsys, value):
    monkeypatch.setenv("SCDG_THREADS", value)
    with pytest.raises(DomainError):
        worker_count()
    code, _, err = run_cli(capsys, "compare", "--c1", "800", "--c2", "400", "--tau", "200",
                           "--theta1", "100", "--theta2", "100", "--trials", "10")
    assert code == 2 and "SCDG_THREADS" in err


# -- oracle-check --------------------------------------------------------------

def test_oracle_check_passes(capsys):
    code, out, _ = run_cli(capsys, "oracle-check", *GAME)
    assert code == 0
    table = rows(out)
    assert {r["check"] for r in table} >= {"stage2_tau1", "stage2_psiT", "stage1_r_1->2",
                                          "stage1_deviation", "stage2_deviation"}
    assert all(r["passed"] == "true" for r in table)


def test_oracle_check_disagreement_exits_3(capsys):
    code, _, err = run_cli(capsys, "oracle-check", *GAME, "--tol", "1e-15")
    assert code == 3
    assert "stage2_psiT" in err


def test_oracle_check_bad_grid_exits_2(capsys):
    code, _, err = run_cli(capsys, "oracle-check", *GAME, "--grid-points", "1000")
    assert code == 2 and "grid_points" in err


def test_oracle_check_numeric_instance():
    p = GameParams(c1=90.0, c2=30.0, tau=100.0, v1=2.0, v2=1.0, theta1=3, theta2=4)
    from scdg.oracle import OracleConfig

    table = run_oracle_check(p, OracleConfig(grid_points=301))
    assert {r["provenance"] for r in table} == {"Numeric"}
    assert all(r["passed"] for r in table)


def test_mode_flag(capsys):
    # closed-form regimes keep every ratio in the band where both payoff
    # modes coincide, so the record is unchanged
    code, out, _ = run_cli(capsys, "solve", *GAME, "--mode", "full")
    assert code == 0
    _, same, _ = run_cli(capsys, "solve", *GAME)
    assert out == same
    with pytest.raises(SystemExit) as exc:
        main(["solve", *GAME, "--mode", "exact"])
    assert exc.value.code == 2
    assert PayoffMode("large-n") is PayoffMode.LARGE_N
