"""Command-line front end.

Subcommands:

    gen-data                draw a sample CSV from the configured sampler
    fit                     fit centroids to a sample CSV
    eval                    empirical variance of centroids on a sample CSV
    mc-eval                 Monte Carlo variance of centroids under the sampler
    experiment lemma1       cell-change measure vs closed-form bound
    experiment ulln         sup-discrepancy over a net along a size schedule
    experiment consistency  excess variance of fits along a size schedule

Exit codes: 0 success; 2 validation problems (bad config, bad CSV,
violated hypotheses); 1 runtime failures (missing files, infeasible
separation). Every run prints the resolved seed and the configuration
digest, and output files appear atomically or not at all.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

from .datagen import draw_samples
from .errors import InfeasibleError, ValidationError
from .optimizer import fit as run_fit
from .quantizer import empirical_variance, mc_variance
from .runconfig import RunConfig, load_run_config
from .storage import read_centroids, read_samples, write_centroids, write_samples, write_table
from .theory import cell_change_experiment, consistency_experiment, ulln_experiment

_SAMPLES_HELP = "sample CSV: one observation per row, columns x0..x{d-1}, optional header"
_CENTROIDS_HELP = "centroid CSV: lattice index columns i0.., then coordinates x0.., lexicographic rows"

_RESTARTS_COLUMNS = ("restart", "final_vn", "iterations", "separation", "repairs")
_LEMMA1_COLUMNS = ("config_id", "cell", "alpha", "delta", "estimate", "stderr", "bound", "pass")
_ULLN_COLUMNS = ("n", "seed", "sup_discrepancy")
_CONSISTENCY_COLUMNS = ("n", "seed", "vn_best", "v_of_fit", "v_ref", "gap")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="extvar",
        description="Neighborhood-weighted vector quantization and its theory experiments.",
        epilog=(
            "The YAML configuration schema is documented in extvar.runconfig. "
            f"Restart table columns: {','.join(_RESTARTS_COLUMNS)}. "
            f"lemma1 report columns: {','.join(_LEMMA1_COLUMNS)} "
            "(cell is the lexicographic site rank; pass is 1 when estimate - 3*stderr <= bound). "
            f"ulln report columns: {','.join(_ULLN_COLUMNS)}. "
            f"consistency report columns: {','.join(_CONSISTENCY_COLUMNS)}."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", required=True, help="YAML run configuration")
        p.add_argument("--seed", type=int, default=None, help="override the configured seed")
        p.add_argument("--threads", type=int, default=1, help="worker count (never affects results)")

    p = sub.add_parser("gen-data", help="draw samples and write them as CSV")
    common(p)
    p.add_argument("--out", required=True, help="output CSV path")

    p = sub.add_parser("fit", help="fit centroids to a sample CSV")
    common(p)
    p.add_argument("--data", required=True, help=_SAMPLES_HELP)
    p.add_argument("--out", required=True, help="output directory (centroids.csv, restarts.csv, summary.txt)")

    p = sub.add_parser("eval", help="empirical variance of a centroid file on a sample CSV")
    common(p)
    p.add_argument("--data", required=True, help=_SAMPLES_HELP)
    p.add_argument("--centroids", required=True, help=_CENTROIDS_HELP)

    p = sub.add_parser("mc-eval", help="Monte Carlo variance of a centroid file under the sampler")
    common(p)
    p.add_argument("--centroids", required=True, help=_CENTROIDS_HELP)

    p = sub.add_parser("experiment", help="run a theory experiment")
    p.add_argument("study", choices=("lemma1", "ulln", "consistency"), help="which experiment")
    common(p)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--svg", action="store_true", help="also draw an SVG curve of the report")
    return parser


def _resolved_seed(args, config: RunConfig) -> int:
    return args.seed if args.seed is not None else config.fit.seed


def _load(args) -> tuple[RunConfig, int]:
    config = load_run_config(args.config)
    seed = _resolved_seed(args, config)
    print(f"seed = {seed}")
    print(f"config digest = {config.digest}")
    return config, seed


def _write_summary(path: str, lines: list[str]) -> None:
    from .storage import atomic_write

    with atomic_write(path) as handle:
        handle.write("\n".join(lines) + "\n")


def _cmd_gen_data(args) -> int:
    config, seed = _load(args)
    sampler = config.make_sampler()
    samples = draw_samples(sampler, config.n, seed, workers=args.threads)
    write_samples(args.out, samples)
    print(f"wrote {args.out} ({samples.n} observations, d={samples.d})")
    return 0


def _cmd_fit(args) -> int:
    config, seed = _load(args)
    samples = read_samples(args.data)
    params = dataclasses.replace(config.fit, seed=seed)
    result = run_fit(samples, config.kernel, params, quasi=config.quasi, workers=args.threads)
    os.makedirs(args.out, exist_ok=True)
    write_centroids(os.path.join(args.out, "centroids.csv"), result.best_config)
    write_table(
        os.path.join(args.out, "restarts.csv"),
        _RESTARTS_COLUMNS,
        [
            (r.restart, r.final_vn, r.iterations, r.separation, r.repairs)
            for r in result.per_restart
        ],
    )
    _write_summary(
        os.path.join(args.out, "summary.txt"),
        [
            f"best_vn = {result.best_vn!r}",
            f"quasi_radius = {result.quasi_radius!r}",
            f"n = {samples.n}",
            f"restarts = {len(result.per_restart)}",
            f"seed = {seed}",
            f"config_digest = {config.digest}",
        ],
    )
    print(f"best_vn = {result.best_vn!r}")
    print(f"wrote {args.out}/centroids.csv, restarts.csv, summary.txt")
    return 0


def _cmd_eval(args) -> int:
    config, _ = _load(args)
    samples = read_samples(args.data)
    centroids = read_centroids(args.centroids, config.lattice)
    vn = empirical_variance(samples, centroids, config.kernel, workers=args.threads)
    print(f"vn = {vn!r}")
    return 0


def _cmd_mc_eval(args) -> int:
    config, seed = _load(args)
    centroids = read_centroids(args.centroids, config.lattice)
    sampler = config.make_sampler()
    est = mc_variance(
        centroids, config.kernel, sampler, config.experiment.m_ref, seed, workers=args.threads
    )
    print(f"estimate = {est.estimate!r}")
    print(f"stderr = {est.stderr!r}")
    return 0


def _cmd_experiment(args) -> int:
    config, seed = _load(args)
    exp = config.experiment
    os.makedirs(args.out, exist_ok=True)
    sampler = config.make_sampler()

    if args.study == "lemma1":
        config.require_cell_change_hypothesis()
        report = cell_change_experiment(
            config.lattice,
            config.d,
            config.delta,
            exp.alpha,
            exp.m,
            seed,
            n_configs=exp.configs,
            workers=args.threads,
        )
        write_table(
            os.path.join(args.out, "lemma1.csv"),
            _LEMMA1_COLUMNS,
            [
                (r.config_id, r.cell, r.alpha, r.delta, r.estimate, r.stderr, r.bound, r.passed)
                for r in report.records
            ],
        )
        vacuous = sum(1 for r in report.records if r.vacuous)
        _write_summary(
            os.path.join(args.out, "summary.txt"),
            [
                f"records = {len(report.records)}",
                f"passed = {sum(1 for r in report.records if r.passed)}",
                f"vacuous_bound = {vacuous}",
                f"all_passed = {'1' if report.all_passed else '0'}",
                f"alpha = {exp.alpha!r}",
                f"delta = {config.delta!r}",
                f"samples_per_cell = {exp.m}",
                f"seed = {seed}",
                f"config_digest = {config.digest}",
            ],
        )
        if args.svg:
            from .plots import line_plot

            idx = list(range(len(report.records)))
            line_plot(
                os.path.join(args.out, "lemma1.svg"),
                idx,
                {
                    "estimate": [r.estimate for r in report.records],
                    "bound": [r.bound for r in report.records],
                },
                "record",
                "measure",
                "cell-change measure vs bound",
            )
        print(f"wrote {args.out}/lemma1.csv ({len(report.records)} records)")
        return 0

    if args.study == "ulln":
        report = ulln_experiment(
            sampler,
            config.lattice,
            config.kernel,
            config.delta,
            exp.n_schedule,
            exp.net_size,
            exp.m_ref,
            seed,
            reps=exp.seeds,
            workers=args.threads,
        )
        write_table(
            os.path.join(args.out, "ulln.csv"),
            _ULLN_COLUMNS,
            [(r.n, r.seed, r.sup_discrepancy) for r in report.rows],
        )
        medians = report.median_by_n()
        _write_summary(
            os.path.join(args.out, "summary.txt"),
            [f"net_size = {len(report.net)}", f"delta = {report.delta!r}"]
            + [f"median_disc_n{n} = {medians[n]!r}" for n in sorted(medians)]
            + [f"seed = {seed}", f"config_digest = {config.digest}"],
        )
        if args.svg:
            from .plots import line_plot

            xs = sorted(medians)
            line_plot(
                os.path.join(args.out, "ulln.svg"),
                xs,
                {"median sup-discrepancy": [medians[n] for n in xs]},
                "n",
                "sup-discrepancy",
                "uniform convergence over the net",
                logx=True,
                logy=True,
            )
        print(f"wrote {args.out}/ulln.csv ({len(report.rows)} rows)")
        return 0

    report = consistency_experiment(
        sampler,
        config.lattice,
        config.kernel,
        config.delta,
        exp.n_schedule,
        config.fit,
        exp.m_ref,
        seed,
        reps=exp.seeds,
        quasi=config.quasi,
        workers=args.threads,
    )
    write_table(
        os.path.join(args.out, "consistency.csv"),
        _CONSISTENCY_COLUMNS,
        [(r.n, r.seed, r.vn_best, r.v_of_fit, r.v_ref, r.gap) for r in report.rows],
    )
    medians = report.median_gap_by_n()
    _write_summary(
        os.path.join(args.out, "summary.txt"),
        [
            f"v_ref = {report.reference.estimate!r}",
            f"v_ref_stderr = {report.reference.stderr!r}",
            f"quasi_all_ok = {'1' if all(r.quasi_ok for r in report.rows) else '0'}",
        ]
        + [f"median_gap_n{n} = {medians[n]!r}" for n in sorted(medians)]
        + [f"seed = {seed}", f"config_digest = {config.digest}"],
    )
    if args.svg:
        from .plots import line_plot

        xs = sorted(medians)
        line_plot(
            os.path.join(args.out, "consistency.svg"),
            xs,
            {"median gap": [medians[n] for n in xs]},
            "n",
            "excess variance",
            "consistency of fitted configurations",
            logx=True,
        )
    print(f"wrote {args.out}/consistency.csv ({len(report.rows)} rows)")
    return 0


_COMMANDS = {
    "gen-data": _cmd_gen_data,
    "fit": _cmd_fit,
    "eval": _cmd_eval,
    "mc-eval": _cmd_mc_eval,
    "experiment": _cmd_experiment,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return 2
    try:
        return _COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InfeasibleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())
