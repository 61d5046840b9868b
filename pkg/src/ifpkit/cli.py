"""Batch command-line front-end.

Subcommands:

    check        verify stability/optimality conditions; exit 0 iff they pass
    solve        compute the optimal consumption policy -> policy.txt
    simulate     simulate the wealth process under a saved policy -> sample files
    stats        inequality statistics for a saved sample -> report CSVs
    sweep        stability-region map over two parameters -> sweep.csv
    reproduce    four-economy comparison table (tail exponents, Gini, shares)
    print-config print the full default configuration (YAML)

Exit codes: 0 success / checks passed; 1 checks failed or artifact
mismatch; 2 malformed configuration or unreadable input.

Every output embeds tool version, config hash, and seed; identical inputs
produce byte-identical files.  File formats are documented in
ifpkit.files.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

import numpy as np

from . import files
from .assumptions import assumption_report
from .config import (
    ConfigError,
    config_digest,
    build_grid,
    build_model,
    default_config,
    dump_config,
    load_config,
    model_digest,
    with_variant,
)
from .coleman import solve_policy
from .simulate import run as run_simulation
from .stats import inequality_report, lorenz_and_shares, zipf_points
from .sweep import stability_sweep

ECONOMY_ORDER = ("stochastic_volatility", "mean_persistence", "iid", "constant")


def _err(msg):
    print(f"ifpkit: {msg}", file=sys.stderr)


def _load(path):
    try:
        return load_config(path)
    except FileNotFoundError:
        raise ConfigError(f"{path}: no such config file")


def _outdir(args):
    os.makedirs(args.out, exist_ok=True)
    return args.out


def cmd_check(args):
    cfg = _load(args.config)
    report = assumption_report(build_model(cfg.model))
    digest = config_digest(cfg)
    path = os.path.join(_outdir(args), "report.json")
    files.write_report_json(path, report, config_sha256=digest, seed=cfg.simulate.seed)
    ok = report.contraction_ok and report.stability_ok
    print(f"return_radius={report.return_radius:.6f} "
          f"contraction={'ok' if report.contraction_ok else 'FAIL'} "
          f"stability={'ok' if report.stability_ok else 'FAIL'} "
          f"alpha={report.alpha:.4f}")
    print(f"report written to {path}")
    return 0 if ok else 1


def cmd_solve(args):
    cfg = _load(args.config)
    model = build_model(cfg.model)
    report = assumption_report(model)
    grid = build_grid(cfg.grid)
    policy, trace = solve_policy(
        model, grid=grid, options=cfg.solver.to_options(), report=report,
        force=args.force,
    )
    path = os.path.join(_outdir(args), args.name)
    files.write_policy(path, policy, model, model_sha256=model_digest(cfg), seed="-")
    print(f"converged in {len(trace)} iterations "
          f"(final distance {trace[-1]:.3e})" if trace else "myopic policy (beta = 0)")
    print(f"policy written to {path}")
    return 0


def cmd_simulate(args):
    cfg = _load(args.config)
    policy, header = files.read_policy(args.policy)
    expected = model_digest(cfg)
    recorded = header.get("model_sha256", "-")
    if recorded != "-" and recorded != expected:
        _err("policy was solved for a different model/grid configuration; refusing")
        return 1
    model = build_model(cfg.model)
    sample = run_simulation(policy, model, cfg.simulate.to_sim_config())
    prefix = os.path.join(_outdir(args), args.name)
    sidecar = files.write_sample(
        prefix, sample,
        config_sha256=config_digest(cfg),
        policy_sha256=files.sha256_file(args.policy),
        fmt=args.format,
    )
    print(f"sample written to {sidecar}")
    return 0


def cmd_stats(args):
    sample = files.read_sample(args.sample)
    rep = inequality_report(sample)
    digest = sample.meta.get("config_sha256", "-")
    seed = sample.meta.get("seed", "-")
    out = _outdir(args)
    files.write_csv(
        os.path.join(out, "stats.csv"),
        ["metric", "value"],
        [["tail_exponent_top5", rep.tail_exponent_top5],
         ["tail_exponent_top10", rep.tail_exponent_top10],
         ["gini", rep.gini]],
        config_sha256=digest, seed=seed,
    )
    files.write_csv(
        os.path.join(out, "lorenz.csv"),
        ["population_share", "wealth_share"],
        [list(row) for row in rep.lorenz],
        config_sha256=digest, seed=seed,
    )
    files.write_csv(
        os.path.join(out, "zipf.csv"),
        ["log_wealth", "log_rank"],
        [list(row) for row in zipf_points(sample)],
        config_sha256=digest, seed=seed,
    )
    print(f"tail5={rep.tail_exponent_top5:.3f} tail10={rep.tail_exponent_top10:.3f} "
          f"gini={rep.gini:.4f}")
    print(f"reports written to {out}")
    return 0


def cmd_sweep(args):
    cfg = _load(args.config)
    ax1 = cfg.sweep.axis1
    ax2 = cfg.sweep.axis2
    result = stability_sweep(
        cfg.model,
        (ax1.name, np.linspace(ax1.start, ax1.stop, ax1.count)),
        (ax2.name, np.linspace(ax2.start, ax2.stop, ax2.count)),
    )
    rows = [
        [p.axis1, p.axis2, p.return_radius, p.patience_lhs, p.patience_rhs,
         int(p.contraction_ok), int(p.stability_ok), p.error]
        for p in result.points
    ]
    path = os.path.join(_outdir(args), "sweep.csv")
    files.write_csv(
        path,
        [ax1.name, ax2.name, "return_radius", "patience_lhs", "patience_rhs",
         "contraction_ok", "stability_ok", "error"],
        rows,
        config_sha256=config_digest(cfg), seed="-",
    )
    print(f"sweep written to {path}")
    return 0


def cmd_reproduce(args):
    cfg = _load(args.config)
    digest = config_digest(cfg)
    out = _outdir(args)
    seed = cfg.simulate.seed
    grid = build_grid(cfg.grid)
    reports = {}
    for variant in ECONOMY_ORDER:
        model = build_model(with_variant(cfg.model, variant))
        checks = assumption_report(model)
        if not (checks.contraction_ok and checks.stability_ok):
            _err(f"{variant}: stability checks failed; cannot reproduce")
            return 1
        _err(f"[{variant}] solving policy ...")
        policy, trace = solve_policy(
            model, grid=grid, options=cfg.solver.to_options(), report=checks
        )
        policy_path = os.path.join(out, f"policy_{variant}.txt")
        files.write_policy(policy_path, policy, model, model_sha256="-", seed="-")
        _err(f"[{variant}] solved in {len(trace)} iterations; simulating ...")
        # common random numbers across economies: cross-economy differences
        # in the tables then reflect model structure, not sampling noise
        sim = cfg.simulate.to_sim_config()
        sample = run_simulation(policy, model, sim)
        files.write_sample(
            os.path.join(out, f"sample_{variant}"), sample,
            config_sha256=digest, policy_sha256=files.sha256_file(policy_path),
        )
        rep = inequality_report(sample)
        reports[variant] = rep
        files.write_csv(
            os.path.join(out, f"lorenz_{variant}.csv"),
            ["population_share", "wealth_share"],
            [list(r) for r in rep.lorenz],
            config_sha256=digest, seed=sim.seed,
        )
        files.write_csv(
            os.path.join(out, f"zipf_{variant}.csv"),
            ["log_wealth", "log_rank"],
            [list(r) for r in zipf_points(sample)],
            config_sha256=digest, seed=sim.seed,
        )
        _err(f"[{variant}] gini={rep.gini:.4f} tail5={rep.tail_exponent_top5:.2f}")

    files.write_csv(
        os.path.join(out, "table1.csv"),
        ["metric", *ECONOMY_ORDER],
        [
            ["tail_exponent_top5", *[reports[v].tail_exponent_top5 for v in ECONOMY_ORDER]],
            ["tail_exponent_top10", *[reports[v].tail_exponent_top10 for v in ECONOMY_ORDER]],
            ["gini", *[reports[v].gini for v in ECONOMY_ORDER]],
        ],
        config_sha256=digest, seed=seed,
    )
    cutoffs = [f"{int(round(100 * s))}%" for s in np.asarray(reports[ECONOMY_ORDER[0]].lorenz)[1:, 0]]
    files.write_csv(
        os.path.join(out, "table2.csv"),
        ["economy", *cutoffs],
        [[v, *[float(x) for x in reports[v].wealth_shares]] for v in ECONOMY_ORDER],
        config_sha256=digest, seed=seed,
    )
    print(f"tables written to {out}")
    return 0


def cmd_print_config(args):
    sys.stdout.write(dump_config(default_config()))
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="ifpkit", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--threads", type=int, default=0,
                   help="cap the number of worker threads (0 = library default)")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, **kwargs):
        sp = sub.add_parser(name, **kwargs)
        sp.set_defaults(fn=fn)
        return sp

    sp = add("check", cmd_check, help="verify stability conditions")
    sp.add_argument("config")
    sp.add_argument("--out", default=".")

    sp = add("solve", cmd_solve, help="solve the consumption policy")
    sp.add_argument("config")
    sp.add_argument("--out", default=".")
    sp.add_argument("--name", default="policy.txt")
    sp.add_argument("--force", action="store_true",
                    help="iterate even when the contraction check fails")

    sp = add("simulate", cmd_simulate, help="simulate the wealth process")
    sp.add_argument("config")
    sp.add_argument("policy")
    sp.add_argument("--out", default=".")
    sp.add_argument("--name", default="sample")
    sp.add_argument("--format", choices=("npy", "csv"), default="npy")

    sp = add("stats", cmd_stats, help="inequality statistics for a sample")
    sp.add_argument("sample", help="sample sidecar (.json)")
    sp.add_argument("--out", default=".")

    sp = add("sweep", cmd_sweep, help="stability-region sweep")
    sp.add_argument("config")
    sp.add_argument("--out", default=".")

    sp = add("reproduce", cmd_reproduce, help="four-economy comparison tables")
    sp.add_argument("config")
    sp.add_argument("--out", default=".")

    add("print-config", cmd_print_config, help="print default configuration")
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads and args.threads > 0:
        import numba

        numba.set_num_threads(max(1, args.threads))
    try:
        return args.fn(args)
    except ConfigError as exc:
        _err(str(exc))
        return 2
    except (FileNotFoundError, ValueError) as exc:
        _err(str(exc))
        return 2


if __name__ == "__main__":
    sys.exit(main())
