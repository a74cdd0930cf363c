import math

import numpy as np
import pytest

from linimp.bench import (
    CSV_HEADER,
    ExperimentConfig,
    RunRecord,
    build_problem,
    convergence_study,
    emit_csv,
    emit_invariants_csv,
    fit_slope,
    invariant_study,
    parse_csv,
    reference_solution,
    resonant_steps,
    run_one,
)
from linimp.bench import harness
from linimp.bench.cli import main, parse_int_range, parse_steps, read_config
from linimp.errors import ConfigError


def test_fit_slope_exact_power_law():
    hs = np.array([0.1, 0.05, 0.025, 0.0125])
    fit = fit_slope(hs, 3.0 * hs**2.5)
    assert fit.slope == pytest.approx(2.5, abs=1e-12)
    assert fit.intercept == pytest.approx(np.log10(3.0), abs=1e-12)
    assert (fit.used, fit.excluded) == (4, 0)


def test_fit_slope_excludes_failures():
    hs = [0.1, 0.05, 0.025, 0.0125]
    fit = fit_slope(hs, [1e-2, math.inf, 2.5e-3 / 4, math.nan])
    assert (fit.used, fit.excluded) == (2, 2)
    assert fit.slope == pytest.approx(2.0)
    assert math.isnan(fit_slope([0.1], [1.0]).slope)


def test_resonant_steps():
    alpha = 3 * np.sqrt(7) / 56
    h = resonant_steps(alpha, [8, 10])
    assert h[0] * alpha * 64 == pytest.approx(1.0)
    with pytest.raises(ConfigError):
        resonant_steps(0.0, [1])


def test_record_status_follows_errors():
    assert RunRecord("m", 0.1, math.inf, math.inf, 0.0, 10).status == "diverged"
    assert RunRecord("m", 0.1, 1e-3, 2e-3, 0.0, 10).status == "completed"


def test_config_validation():
    ok = ExperimentConfig("nonlocal", ["cn"], [0.1], 1.0)
    assert ok.validate() is ok
    for bad in (
        ExperimentConfig("nonlocal", [], [0.1], 1.0),
        ExperimentConfig("nonlocal", ["cn"], [], 1.0),
        ExperimentConfig("nonlocal", ["cn"], [2.0], 1.0),
        ExperimentConfig("nonlocal", ["cn"], [0.1], -1.0),
        ExperimentConfig("nonlocal", ["cn"], [0.1], 1.0, norm="l1"),
        ExperimentConfig("nonlocal", ["cn"], [0.1], 1.0, reference="magic"),
    ):
        with pytest.raises(ConfigError):
            bad.validate()


def test_build_problem():
    p = build_problem("soliton1d", {"q": 8, "alpha": 4, "c": 0.5, "left": -62.5, "right": 62.5, "M": 128})
    assert p.params["q"] == 8.0 and p.grid.left == -62.5
    with pytest.raises(ConfigError):
        build_problem("soliton1d", {"K": 3})
    with pytest.raises(ConfigError):
        build_problem("heat")


def test_divergence_is_contained():
    # resonant steps fail in the solver; the sweep still completes the regular step
    alpha = 3 * np.sqrt(7) / 56
    hs = resonant_steps(alpha, [10, 12]) + [0.125]
    cfg = ExperimentConfig("nonlocal", ["li:fiveStageNotASI:eig=1/6,2/6,3/6,4/6,5/6"], hs, 1.0)
    records, slopes = convergence_study(cfg)
    status = {r.h: r.status for r in records}
    assert status[0.125] == "completed"
    assert [status[h] for h in hs[:2]] == ["solver-failure", "solver-failure"]
    assert all(r.mode is not None for r in records if r.status == "solver-failure")
    fit = next(iter(slopes.values()))
    assert fit.used == 1 and fit.excluded == 2


def test_blow_up_recorded_as_diverged():
    p = build_problem("soliton1d", {"M": 256, "left": -20, "right": 20})
    rec = run_one("li:nonAstable2:eig=0.5,-0.5", p, 0.01, 20.0)
    assert rec.status in ("diverged", "solver-failure")
    assert math.isinf(rec.final_error)


def test_determinism():
    cfg = ExperimentConfig("nonlocal", ["li:gauss2", "cn"], [0.25, 0.125], 1.0, problem_params={"K": 10})
    a, _ = convergence_study(cfg)
    b, _ = convergence_study(cfg)
    assert [(r.final_error, r.max_error) for r in a] == [(r.final_error, r.max_error) for r in b]


def test_max_norm_option():
    cfg = ExperimentConfig("nonlocal", ["li:gauss2"], [0.25], 1.0, norm="max", problem_params={"K": 10})
    (rec,), _ = convergence_study(cfg)
    assert rec.max_error >= rec.final_error


def test_reference_cache(tmp_path, monkeypatch):
    monkeypatch.setenv(harness.CACHE_ENV, str(tmp_path))
    harness._memory_cache.clear()
    p = build_problem("nlh1d", {"M": 32})
    u = reference_solution(p, 0.1, 0.01)
    files = list(tmp_path.glob("ref_*.npy"))
    assert len(files) == 1
    harness._memory_cache.clear()
    np.testing.assert_array_equal(reference_solution(p, 0.1, 0.01), u)
    # a different step size is a different key
    reference_solution(p, 0.1, 0.02)
    assert len(list(tmp_path.glob("ref_*.npy"))) == 2


def test_reference_used_without_exact_solution(monkeypatch):
    monkeypatch.delenv(harness.CACHE_ENV, raising=False)
    cfg = ExperimentConfig("nlh1d", ["cn", "li:gauss2"], [0.0125, 0.00625], 0.5, problem_params={"M": 64})
    records, slopes = convergence_study(cfg)
    assert all(r.status == "completed" for r in records)
    for fit in slopes.values():
        assert fit.slope == pytest.approx(2.0, abs=0.3)
    with pytest.raises(ConfigError):
        convergence_study(ExperimentConfig("nlh1d", ["cn"], [0.1], 0.5, reference="exact", problem_params={"M": 16}))


def test_csv_roundtrip(tmp_path):
    recs = [
        RunRecord("b", 0.1, 1e-3, 2e-3, 0.5, 10),
        RunRecord("a", 0.05, math.inf, math.inf, math.nan, 20, "solver-failure"),
        RunRecord("a", 0.1, 1e-2, 1e-2, 0.1, 10),
    ]
    path = tmp_path / "out.csv"
    emit_csv(recs, path)
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert lines[1].startswith("a,0.1,") and lines[2].startswith("a,0.05,inf,inf,nan")
    back = parse_csv(path)
    assert [r.method for r in back] == ["a", "a", "b"]
    assert back[1].status == "solver-failure" and math.isinf(back[1].final_error)
    bad = tmp_path / "bad.csv"
    bad.write_text("x,y\n")
    with pytest.raises(ConfigError):
        parse_csv(bad)


def test_invariant_study(tmp_path):
    cfg = ExperimentConfig("soliton1d", ["li:gauss2:eig=0.5,-0.5", "cn"], [0.05], 0.5,
                           problem_params={"M": 256, "left": -20, "right": 20})
    series = invariant_study(cfg)
    assert [s.method for s in series] == cfg.methods
    assert all(len(s.t) == 11 and s.mass_deviation[0] == 0 for s in series)
    out = tmp_path / "inv.csv"
    emit_invariants_csv(series, out)
    assert out.read_text().splitlines()[0] == "method,t,mass_deviation,energy_deviation,status"


# --- command line -----------------------------------------------------------

def test_step_and_range_parsing():
    assert parse_steps("0.1,0.05") == [0.1, 0.05]
    np.testing.assert_allclose(parse_steps("1e-1..1e-2/3"), [0.1, 0.1 / np.sqrt(10), 0.01])
    np.testing.assert_allclose(parse_steps("2^-3..2^-5/3"), [0.125, 0.0625, 0.03125])
    assert parse_int_range("1..4") == [1, 2, 3, 4]
    assert parse_int_range("3,5") == [3, 5]


def test_cli_tableau(capsys):
    assert main(["tableau", "lobatto4uniform"]) == 0
    out = capsys.readouterr().out
    assert "i,j,a_ij" in out and "cooper_defect," in out
    assert main(["tableau", "--nodes", "1/3,1"]) == 0
    assert "2,1,0.75" in capsys.readouterr().out


def test_cli_stability_and_aux(capsys):
    assert main(["stability", "fiveStageNotASI"]) == 0
    out = capsys.readouterr().out
    assert "ASI: False" in out and "witness ASI" in out
    assert main(["stability", "gauss2", "--json"]) == 0
    assert '"A_hat": true' in capsys.readouterr().out
    assert main(["aux", "--nodes", "0,1", "--eigs", "0.5,-0.5"]) == 0
    assert "rho(D) = 0.5" in capsys.readouterr().out


def test_cli_mesh(tmp_path, capsys):
    out = tmp_path / "star.mesh"
    assert main(["mesh", "--R", "1.0", "--refine", "1", "--out", str(out)]) == 0
    assert out.read_text().startswith("vertices 37")


def test_cli_converge_and_config(tmp_path, capsys):
    csv_path = tmp_path / "conv.csv"
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "# nonlocal sweep\n"
        "problem = nonlocal\n"
        "methods = li:gauss2:eig=0.5,-0.5 cn\n"
        "T = 1\n"
        "hs = 2^-2..2^-4/3\n"
        "K = 8\n"
        f"out = {csv_path}\n"
    )
    assert main(["--config", str(cfg), "converge"]) == 0
    out = capsys.readouterr().out
    assert "slope cn" in out
    rows = parse_csv(csv_path)
    assert len(rows) == 6 and all(r.status == "completed" for r in rows)
    # flags override file values
    assert main(["--config", str(cfg), "converge", "--methods", "strang", "--out", str(csv_path)]) == 0
    assert {r.method for r in parse_csv(csv_path)} == {"strang"}


def test_cli_resonance(capsys):
    assert main(["resonance", "--modes", "1,2,10", "--out", "-"]) == 0
    out = capsys.readouterr()
    assert "k=10" in out.out and "solver-failure" in out.out
    assert ",".join(CSV_HEADER) in out.out
    assert "skip k=1" in out.err


def test_cli_invariants(tmp_path, capsys):
    out = tmp_path / "inv.csv"
    argv = ["invariants", "--problem", "soliton1d", "--M", "128", "--left", "-20", "--right", "20",
            "--h", "0.1", "--T", "0.5", "--out", str(out)]
    assert main(argv) == 0
    assert "max mass deviation" in capsys.readouterr().out
    assert out.exists()


def test_cli_errors(tmp_path, capsys):
    assert main(["stability", "nosuch"]) == 2
    assert "error" in capsys.readouterr().err
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("bogus = 1\n")
    assert main(["--config", str(cfg), "converge"]) == 2
    assert main(["--config", str(tmp_path / "missing.cfg"), "converge"]) == 2
    with pytest.raises(SystemExit):
        main(["converge", "--problem", "soliton1d"])


def test_read_config(tmp_path):
    f = tmp_path / "c.cfg"
    f.write_text("a = 1\n\n# comment\ncheck-residuals = yes\n")
    assert read_config(f) == {"a": "1", "check_residuals": "yes"}
    f.write_text("novalue\n")
    with pytest.raises(ConfigError):
        read_config(f)
