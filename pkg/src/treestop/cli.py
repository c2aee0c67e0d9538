"""Command-line front end.

Subcommands:

  simulate   write the debug CSV dump of one ensemble
  train      fit the bagged stopper, write the stopper dump
  evaluate   load a stopper dump, value it on fresh ensembles
  boundary   stopping-boundary scatter + summary for the 1-D put
  benchmark  iterate a published benchmark grid, report deltas
  oracle     exact discrete-instance cross-check (induction vs enumeration)

All outputs are CSV with documented headers; floats print with %.12g.  Every
output embeds the resolved config hash and the seeds, so reruns with the same
config are byte-identical (benchmark wall-time columns excepted).
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from dataclasses import replace

import numpy as np

from treestop import references
from treestop.config import ConfigError, ExperimentConfig, load_config
from treestop.ensemble import TRAIN_LABEL, TEST_LABEL, dump_csv
from treestop.reward import MAX_CALL_BARRIER, PUT
from treestop.stopper import BaggedStopper, apply, train
from treestop.valuation import (
    extract_boundary,
    ls_value,
    make_markov_instance,
    oracle_bruteforce,
    oracle_enumerate,
    v_max,
    value_of_rule,
)


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _provenance(cfg: ExperimentConfig) -> str:
    return (f"# config_hash={cfg.config_hash()} seed_train={cfg.seed_train} "
            f"seed_test={cfg.seed_test} seed_bagging={cfg.seed_bagging}\n")


def _write_valuation_csv(path, cfg: ExperimentConfig, reports) -> None:
    with open(path, "w") as fh:
        fh.write(_provenance(cfg))
        fh.write("kind,value,se,ensemble_seed,stopper_hash,reference_delta\n")
        for rep in reports:
            delta = ""
            if cfg.reference and rep.kind == "v_test":
                delta = _fmt(rep.value - cfg.reference)
            fh.write(f"{rep.kind},{_fmt(rep.value)},{_fmt(rep.se)},"
                     f"{rep.ensemble_seed if rep.ensemble_seed is not None else ''},"
                     f"{rep.stopper_hash or ''},{delta}\n")


def _write_boundary_csv(out_dir, cfg, scatter) -> None:
    with open(os.path.join(out_dir, "boundary.csv"), "w") as fh:
        fh.write(_provenance(cfg))
        if scatter.residuals is None:
            fh.write("n,x,path_id\n")
            for n, x, k in zip(scatter.steps, scatter.values, scatter.path_ids):
                fh.write(f"{n},{_fmt(x)},{k}\n")
        else:
            fh.write("n,x,path_id,residual\n")
            for n, x, k, r in zip(scatter.steps, scatter.values, scatter.path_ids,
                                  scatter.residuals):
                fh.write(f"{n},{_fmt(x)},{k},{_fmt(r)}\n")
    with open(os.path.join(out_dir, "boundary_summary.csv"), "w") as fh:
        fh.write(_provenance(cfg))
        fh.write("n,mean,count\n")
        for n in range(scatter.counts.shape[0]):
            mean = scatter.mean_by_step[n] if n < scatter.mean_by_step.shape[0] else float("nan")
            mean_s = "" if np.isnan(mean) else _fmt(mean)
            fh.write(f"{n},{mean_s},{scatter.counts[n]}\n")


def _load_theoretical(path) -> np.ndarray:
    rows = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#") or line.startswith("n,"):
                continue
            n_s, b_s = line.split(",")[:2]
            rows[int(n_s)] = float(b_s)
    out = np.full(max(rows) + 1, np.nan)
    for n, b in rows.items():
        out[n] = b
    return out


def run_experiment(cfg: ExperimentConfig, threads: int = 1,
                   boundary_file: str | None = None) -> dict:
    """Simulate, fit, evaluate, and write all artifacts for one config.

    Returns the in-memory reports keyed by kind, for callers that want them.
    """
    os.makedirs(cfg.out, exist_ok=True)
    with open(os.path.join(cfg.out, "config_resolved.cfg"), "w") as fh:
        fh.write(cfg.serialize())

    reward_spec = cfg.reward_spec()
    paths_train = cfg.make_ensemble(TRAIN_LABEL)
    paths_test = cfg.make_ensemble(TEST_LABEL)
    stopper = train(paths_train, reward_spec, cfg.train_config(), threads=threads)
    with open(os.path.join(cfg.out, "stopper.txt"), "w") as fh:
        fh.write(_provenance(cfg))
        fh.write(stopper.serialize())

    res_train = apply(stopper, paths_train)
    res_test = apply(stopper, paths_test)
    reports = [value_of_rule(res_train), value_of_rule(res_test),
               v_max(paths_test, reward_spec)]
    if cfg.with_ls:
        reports.extend(ls_value(paths_train, paths_test, reward_spec))
    _write_valuation_csv(os.path.join(cfg.out, "valuation.csv"), cfg, reports)

    if cfg.with_boundary:
        theoretical = _load_theoretical(boundary_file) if boundary_file else None
        scatter = extract_boundary(res_test, paths_test, theoretical)
        _write_boundary_csv(cfg.out, cfg, scatter)
    return {rep.kind: rep for rep in reports}


# ---------------------------------------------------------------------------
# Benchmark suites
# ---------------------------------------------------------------------------

PUT_SUITE = "put"
SYM_SUITE = "maxcall_sym"
ASYM_SUITE = "maxcall_asym"
BARRIER_SUITE = "barrier"
SUITES = (PUT_SUITE, SYM_SUITE, ASYM_SUITE, BARRIER_SUITE)


def benchmark_grid(suite: str) -> list[ExperimentConfig]:
    """Row configs of one suite at scale 1 (published-study sizes)."""
    rows = []
    if suite == PUT_SUITE:
        for (sigma, x0, T, N), _ in references.AMERICAN_PUT.items():
            rows.append(ExperimentConfig(
                kind=PUT, dim=1, x0=float(x0), mu=0.05, rate=0.05, strike=100.0,
                sigma=sigma, maturity=float(T), steps=N,
                k_train=200000, k_test=200000, with_ls=True,
                reference=references.AMERICAN_PUT[(sigma, x0, T, N)][2]))
    elif suite in (SYM_SUITE, ASYM_SUITE):
        table = references.MAXCALL_SYM_4F if suite == SYM_SUITE else references.MAXCALL_ASYM_4F
        vol_mode = "symmetric" if suite == SYM_SUITE else "asymmetric"
        for (D, x0), (_, nn) in table.items():
            rows.append(ExperimentConfig(
                kind="max_call", dim=D, x0=float(x0), mu=-0.05, rate=0.05,
                strike=100.0, sigma=0.2, vol_mode=vol_mode, maturity=3.0, steps=9,
                k_train=100000, k_test=4096000, feature_mode="four_features",
                reference=nn))
    elif suite == BARRIER_SUITE:
        for (D, x0), (tree, _, _) in references.BARRIER_MAXCALL.items():
            rows.append(ExperimentConfig(
                kind=MAX_CALL_BARRIER, dim=D, x0=float(x0), mu=0.05, rate=0.05,
                strike=100.0, sigma=0.2, maturity=3.0, steps=53, barrier=170.0,
                k_train=100000, k_test=100000, feature_mode="four_features",
                reference=tree))
    else:
        raise ConfigError(f"unknown suite {suite!r}; choose from {SUITES}")
    return rows


def run_benchmark(suite: str, scale: float, out_path: str, threads: int = 1) -> None:
    """Run one suite with path counts scaled by ``scale``; write the table CSV."""
    if scale <= 0:
        raise ConfigError("scale must be positive")
    rows = benchmark_grid(suite)
    with open(out_path, "w") as fh:
        fh.write(f"# suite={suite} scale={_fmt(scale)}\n")
        fh.write("dim,x0,sigma,maturity,steps,k_train,k_test,"
                 "v_train,v_test,se,reference,delta,seconds\n")
        for cfg in rows:
            cfg = replace(cfg,
                          k_train=max(cfg.bags, int(cfg.k_train * scale)),
                          k_test=max(2, int(cfg.k_test * scale)))
            started = time.perf_counter()
            reward_spec = cfg.reward_spec()
            paths_train = cfg.make_ensemble(TRAIN_LABEL)
            paths_test = cfg.make_ensemble(TEST_LABEL)
            stopper = train(paths_train, reward_spec, cfg.train_config(), threads=threads)
            rep_train = value_of_rule(apply(stopper, paths_train))
            rep_test = value_of_rule(apply(stopper, paths_test))
            elapsed = time.perf_counter() - started
            fh.write(",".join([
                str(cfg.dim), _fmt(cfg.x0), _fmt(cfg.sigma), _fmt(cfg.maturity),
                str(cfg.steps), str(cfg.k_train), str(cfg.k_test),
                _fmt(rep_train.value), _fmt(rep_test.value), _fmt(rep_test.se),
                _fmt(cfg.reference), _fmt(rep_test.value - cfg.reference),
                f"{elapsed:.1f}",
            ]) + "\n")
            fh.flush()


def run_oracle(seed: int, instances: int, out_path: str) -> None:
    """Cross-check the two exact oracles on random Markov instances."""
    from treestop.reward import RewardSpec

    with open(out_path, "w") as fh:
        fh.write("instance_seed,steps,induction,enumeration,equal\n")
        rng = np.random.Generator(np.random.Philox(seed))
        for i in range(instances):
            inst_seed = int(rng.integers(0, 2**63 - 1))
            n_steps = int(rng.integers(2, 5))
            paths = make_markov_instance(inst_seed, num_steps=n_steps)
            spec = RewardSpec(PUT, 0.0, 220.0, 1.0, paths.num_steps)
            dp = oracle_enumerate(paths, spec)
            bf = oracle_bruteforce(paths, spec)
            fh.write(f"{inst_seed},{n_steps},{_fmt(dp.value)},{_fmt(bf.value)},"
                     f"{dp.value == bf.value}\n")


# ---------------------------------------------------------------------------
# argparse wiring
# ---------------------------------------------------------------------------

def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None, help="key = value config file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override one config field (repeatable)")
    p.add_argument("--seed-train", type=int, default=None)
    p.add_argument("--seed-test", type=int, default=None)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default=None, help="output directory")


def _resolve(args) -> ExperimentConfig:
    cfg = load_config(args.config, args.set)
    updates = {}
    if args.seed_train is not None:
        updates["seed_train"] = args.seed_train
    if args.seed_test is not None:
        updates["seed_test"] = args.seed_test
    if args.out is not None:
        updates["out"] = args.out
    if updates:
        cfg = replace(cfg, **updates)
    return cfg


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="treestop", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="dump one ensemble as CSV")
    _add_config_args(p_sim)
    p_sim.add_argument("--which", choices=[TRAIN_LABEL, TEST_LABEL], default=TRAIN_LABEL)

    p_train = sub.add_parser("train", help="fit and dump the stopper")
    _add_config_args(p_train)

    p_eval = sub.add_parser("evaluate", help="value a stopper dump on fresh ensembles")
    _add_config_args(p_eval)
    p_eval.add_argument("--stopper", required=True, help="stopper dump path")

    p_bound = sub.add_parser("boundary", help="stopping-boundary CSVs for the 1-D put")
    _add_config_args(p_bound)
    p_bound.add_argument("--stopper", default=None, help="reuse an existing stopper dump")
    p_bound.add_argument("--theoretical", default=None,
                         help="CSV n,b(n) with an externally computed boundary")

    p_bench = sub.add_parser("benchmark", help="run a published benchmark grid")
    p_bench.add_argument("suite", choices=SUITES)
    p_bench.add_argument("--scale", type=float, default=1.0)
    p_bench.add_argument("--threads", type=int, default=1)
    p_bench.add_argument("--out", default="benchmark.csv")

    p_oracle = sub.add_parser("oracle", help="discrete-instance oracle cross-check")
    p_oracle.add_argument("--seed", type=int, default=7)
    p_oracle.add_argument("--instances", type=int, default=20)
    p_oracle.add_argument("--out", default="oracle.csv")

    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _dispatch(args) -> int:
    if args.command == "simulate":
        cfg = _resolve(args)
        os.makedirs(cfg.out, exist_ok=True)
        paths = cfg.make_ensemble(args.which)
        dump_csv(paths, os.path.join(cfg.out, f"ensemble_{args.which}.csv"))
    elif args.command == "train":
        cfg = _resolve(args)
        os.makedirs(cfg.out, exist_ok=True)
        with open(os.path.join(cfg.out, "config_resolved.cfg"), "w") as fh:
            fh.write(cfg.serialize())
        stopper = train(cfg.make_ensemble(TRAIN_LABEL), cfg.reward_spec(),
                        cfg.train_config(), threads=args.threads)
        with open(os.path.join(cfg.out, "stopper.txt"), "w") as fh:
            fh.write(_provenance(cfg))
            fh.write(stopper.serialize())
    elif args.command == "evaluate":
        cfg = _resolve(args)
        os.makedirs(cfg.out, exist_ok=True)
        with open(args.stopper) as fh:
            stopper = BaggedStopper.parse(fh.read(), cfg.reward_spec())
        reward_spec = cfg.reward_spec()
        paths_train = cfg.make_ensemble(TRAIN_LABEL)
        paths_test = cfg.make_ensemble(TEST_LABEL)
        reports = [value_of_rule(apply(stopper, paths_train)),
                   value_of_rule(apply(stopper, paths_test)),
                   v_max(paths_test, reward_spec)]
        if cfg.with_ls:
            reports.extend(ls_value(paths_train, paths_test, reward_spec))
        _write_valuation_csv(os.path.join(cfg.out, "valuation.csv"), cfg, reports)
    elif args.command == "boundary":
        cfg = _resolve(args)
        os.makedirs(cfg.out, exist_ok=True)
        reward_spec = cfg.reward_spec()
        if args.stopper:
            with open(args.stopper) as fh:
                stopper = BaggedStopper.parse(fh.read(), reward_spec)
        else:
            stopper = train(cfg.make_ensemble(TRAIN_LABEL), reward_spec,
                            cfg.train_config(), threads=args.threads)
        paths_test = cfg.make_ensemble(TEST_LABEL)
        res = apply(stopper, paths_test)
        theoretical = _load_theoretical(args.theoretical) if args.theoretical else None
        scatter = extract_boundary(res, paths_test, theoretical)
        _write_boundary_csv(cfg.out, cfg, scatter)
    elif args.command == "benchmark":
        run_benchmark(args.suite, args.scale, args.out, threads=args.threads)
    elif args.command == "oracle":
        run_oracle(args.seed, args.instances, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
