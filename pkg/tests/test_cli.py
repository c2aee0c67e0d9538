import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from treestop.cli import benchmark_grid, main, run_experiment
from treestop.config import (
    ConfigError,
    ExperimentConfig,
    load_config,
    parse_config_text,
)
from treestop.reward import reward


SMALL = dict(kind="put", dim=1, x0=95.0, sigma=0.3, maturity=1.0, steps=6,
             k_train=400, k_test=400, bags=4, max_depth=4, min_node_size=5)


def small_config(out, **extra):
    return ExperimentConfig(**{**SMALL, **extra, "out": str(out)})


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------

def test_round_trip_handcrafted():
    cfg = small_config("x", with_ls=True, reference=6.068)
    assert parse_config_text(cfg.serialize()) == cfg


config_values = st.fixed_dictionaries({
    "kind": st.sampled_from(["put", "max_call"]),
    "dim": st.integers(1, 6),
    "x0": st.floats(10.0, 200.0),
    "mu": st.floats(-0.5, 0.5),
    "rate": st.floats(0.0, 0.5),
    "sigma": st.floats(0.01, 0.8),
    "steps": st.integers(1, 60),
    "k_train": st.integers(10, 10**6),
    "seed_train": st.integers(0, 2**62),
    "with_ls": st.booleans(),
    "feature_mode": st.sampled_from(["raw", "raw_plus_reward", "four_features"]),
    "out": st.sampled_from(["out", "results/run one", "a_b"]),
})


@settings(max_examples=100, deadline=None)
@given(config_values)
def test_round_trip_is_identity(values):
    cfg = ExperimentConfig(**values)
    assert parse_config_text(cfg.serialize()) == cfg


def test_parse_reports_line_and_field():
    with pytest.raises(ConfigError, match="line 2"):
        parse_config_text("steps = 10\nnot a pair\n")
    with pytest.raises(ConfigError, match="steps"):
        parse_config_text("steps = soon")
    with pytest.raises(ConfigError, match="unknown field"):
        parse_config_text("stepz = 10")


def test_cli_overrides_beat_file(tmp_path):
    path = tmp_path / "cfg"
    path.write_text("x0 = 80\nsteps = 12\n")
    cfg = load_config(path, ["x0=85"])
    assert cfg.x0 == 85.0 and cfg.steps == 12


def test_comments_and_blanks_ignored():
    cfg = parse_config_text("# a comment\n\nx0 = 70  # trailing\n")
    assert cfg.x0 == 70.0


def test_explicit_vols_config():
    cfg = parse_config_text("dim = 3\nvol_mode = explicit\nvols = 0.1,0.2,0.3\n")
    np.testing.assert_allclose(cfg.gbm_spec().vols, [0.1, 0.2, 0.3])
    assert parse_config_text(cfg.serialize()) == cfg
    with pytest.raises(ConfigError, match="vols"):
        parse_config_text("vol_mode = explicit\nvols = abc\n").gbm_spec()


# ---------------------------------------------------------------------------
# run_experiment
# ---------------------------------------------------------------------------

def test_experiment_writes_all_artifacts(tmp_path):
    cfg = small_config(tmp_path / "run", with_ls=True, with_boundary=True)
    reports = run_experiment(cfg)
    for name in ("valuation.csv", "stopper.txt", "config_resolved.cfg",
                 "boundary.csv", "boundary_summary.csv"):
        assert (tmp_path / "run" / name).exists()
    assert {"v_train", "v_test", "v_max", "ls_train", "ls_test"} <= set(reports)
    text = (tmp_path / "run" / "valuation.csv").read_text()
    assert text.startswith(f"# config_hash={cfg.config_hash()}")
    assert "kind,value,se,ensemble_seed,stopper_hash,reference_delta" in text


def test_experiment_deterministic_output(tmp_path):
    cfg = small_config(tmp_path / "a", with_ls=True, with_boundary=True)
    names = ("valuation.csv", "stopper.txt", "boundary.csv", "boundary_summary.csv")
    run_experiment(cfg)
    first = {n: (tmp_path / "a" / n).read_bytes() for n in names}
    run_experiment(cfg)
    for n in names:
        assert (tmp_path / "a" / n).read_bytes() == first[n], n


def test_zero_vol_experiment_matches_backward_induction(tmp_path):
    from oracles import deterministic_best_stop

    cfg = small_config(tmp_path / "det", x0=105.0, mu=-1.0, rate=1.0, sigma=0.0,
                       steps=20, k_train=50, k_test=50)
    reports = run_experiment(cfg)
    paths = cfg.make_ensemble("test")
    spec = cfg.reward_spec()
    rewards = [float(reward(spec, n, paths.state_at(n)[0])) for n in range(21)]
    _, value = deterministic_best_stop(rewards)
    assert reports["v_test"].value == pytest.approx(value, rel=1e-12)


def test_ls_unsupported_for_multidim(tmp_path):
    cfg = ExperimentConfig(kind="max_call", dim=2, mu=-0.05, maturity=3.0,
                           steps=5, k_train=200, k_test=200, bags=2,
                           with_ls=True, out=str(tmp_path / "x"))
    with pytest.raises(ValueError, match="one-dimensional put"):
        run_experiment(cfg)


def test_reference_delta_column(tmp_path):
    cfg = small_config(tmp_path / "ref", reference=5.0)
    reports = run_experiment(cfg)
    line = next(ln for ln in (tmp_path / "ref" / "valuation.csv").read_text().splitlines()
                if ln.startswith("v_test,"))
    delta = float(line.split(",")[-1])
    assert delta == pytest.approx(reports["v_test"].value - 5.0, abs=1e-9)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def test_simulate_subcommand(tmp_path):
    rc = main(["simulate", "--set", "k_train=5", "--set", "steps=3",
               "--out", str(tmp_path)])
    assert rc == 0
    dump = (tmp_path / "ensemble_training.csv").read_text().splitlines()
    assert dump[0].startswith("# K=5 N=3 D=1")


def test_train_then_evaluate_subcommands(tmp_path):
    common = ["--set", "k_train=300", "--set", "k_test=300", "--set", "steps=5",
              "--set", "bags=3", "--set", "x0=95", "--out", str(tmp_path)]
    assert main(["train", *common]) == 0
    assert main(["evaluate", "--stopper", str(tmp_path / "stopper.txt"), *common]) == 0
    text = (tmp_path / "valuation.csv").read_text()
    assert "v_test," in text and "v_max," in text


def test_boundary_subcommand_with_theoretical_file(tmp_path):
    theo = tmp_path / "theo.csv"
    theo.write_text("n,b\n" + "\n".join(f"{n},86.0" for n in range(7)))
    rc = main(["boundary", "--set", "k_train=400", "--set", "k_test=400",
               "--set", "steps=6", "--set", "bags=4", "--set", "x0=90",
               "--theoretical", str(theo), "--out", str(tmp_path)])
    assert rc == 0
    header = (tmp_path / "boundary.csv").read_text().splitlines()[1]
    assert header == "n,x,path_id,residual"


def test_invalid_config_exits_nonzero(tmp_path, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("steps = not_a_number\n")
    rc = main(["train", "--config", str(bad)])
    assert rc == 2
    assert "steps" in capsys.readouterr().err


def test_missing_stopper_file_exits_nonzero(tmp_path):
    rc = main(["evaluate", "--stopper", str(tmp_path / "missing.txt"),
               "--out", str(tmp_path)])
    assert rc == 2


def test_oracle_subcommand_all_equal(tmp_path):
    out = tmp_path / "oracle.csv"
    assert main(["oracle", "--seed", "5", "--instances", "8", "--out", str(out)]) == 0
    rows = out.read_text().splitlines()[1:]
    assert len(rows) == 8
    assert all(row.endswith("True") for row in rows)


# ---------------------------------------------------------------------------
# benchmark suites
# ---------------------------------------------------------------------------

def test_put_grid_matches_published_table():
    rows = benchmark_grid("put")
    assert len(rows) == 20
    combos = {(c.sigma, c.x0, c.maturity, c.steps) for c in rows}
    assert (0.2, 100.0, 1.0, 50) in combos
    assert (0.4, 110.0, 2.0, 50) in combos
    assert (0.2, 85.0, 1.0, 100) in combos
    assert all(c.k_train == 200000 and c.with_ls for c in rows)


def test_maxcall_grids_use_four_features():
    for suite in ("maxcall_sym", "maxcall_asym"):
        rows = benchmark_grid(suite)
        assert len(rows) == 30
        assert all(c.feature_mode == "four_features" and c.steps == 9 for c in rows)
    sym = benchmark_grid("maxcall_sym")
    row = next(c for c in sym if c.dim == 2 and c.x0 == 90.0)
    assert row.reference == 8.054


def test_barrier_grid():
    rows = benchmark_grid("barrier")
    assert len(rows) == 9
    assert all(c.barrier == 170.0 and c.steps == 53 for c in rows)


def test_benchmark_run_tiny_scale(tmp_path):
    out = tmp_path / "bench.csv"
    rc = main(["benchmark", "barrier", "--scale", "0.002", "--out", str(out)])
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[1].startswith("dim,x0,sigma")
    assert len(lines) == 2 + 9
    first = lines[2].split(",")
    assert first[0] == "4" and float(first[10]) == 34.744  # reference column
