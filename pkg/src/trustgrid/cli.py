"""Command-line entry point.

Subcommands: ingest, stats, synth, propagate, recommend, trust, evaluate.
Exit codes: 0 success, 1 usage error, 2 data error. Logs go to stderr;
results go to stdout or --out. Every output artifact echoes the run
configuration so runs are reproducible.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import baselines, evaluation, ingest
from .model import TrustgridError, UnknownItemError
from .propagation import PropagationConfig, propagate, query_trust
from .recommender import recommend

log = logging.getLogger("trustgrid")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _add_input_flags(p, ratings_required=False, trust_required=False):
    p.add_argument("--ratings", help="ratings file (user item rating per line)",
                   required=ratings_required)
    p.add_argument("--trust", help="trust file (source target value per line)",
                   required=trust_required)


def _add_propagation_flags(p):
    p.add_argument("--lambda", dest="damping", type=float, default=0.8,
                   help="per-hop damping factor (default 0.8)")
    p.add_argument("--threshold", type=float, default=0.7,
                   help="storage threshold on positive inferred trust (default 0.7)")
    p.add_argument("--max-rounds", type=int, default=50)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--snapshot", help="snapshot file to write (propagate) or reuse")


def build_parser() -> _Parser:
    parser = _Parser(prog="trustgrid")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("ingest", help="parse and validate input files")
    _add_input_flags(p)

    p = sub.add_parser("stats", help="print dataset statistics")
    _add_input_flags(p)

    p = sub.add_parser("synth", help="generate a seeded synthetic dataset")
    p.add_argument("--users", type=int, default=1000)
    p.add_argument("--items", type=int, default=3000)
    p.add_argument("--degree", type=float, default=10.0)
    p.add_argument("--ratings-per-user", type=float, default=15.0)
    p.add_argument("--mode", choices=("binary", "uniform_signed"), default="binary")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-ratings", required=True)
    p.add_argument("--out-trust", required=True)

    p = sub.add_parser("propagate", help="run trust propagation, write a snapshot")
    _add_input_flags(p, trust_required=True)
    _add_propagation_flags(p)

    p = sub.add_parser("recommend", help="predict one user's rating of one item")
    _add_input_flags(p, ratings_required=True, trust_required=True)
    _add_propagation_flags(p)
    p.add_argument("--user", type=int, required=True)
    p.add_argument("--item", type=int, required=True)
    p.add_argument("--method", choices=evaluation.METHODS, default="proposed")
    p.add_argument("--horizon", type=int, default=3,
                   help="MoleTrust propagation horizon (default 3)")

    p = sub.add_parser("trust", help="query inferred trust or evaluate edge prediction")
    _add_input_flags(p, trust_required=True)
    _add_propagation_flags(p)
    p.add_argument("--source", type=int)
    p.add_argument("--target", type=int)
    p.add_argument("--leave-one-out", action="store_true",
                   help="hide each trust edge and try to re-infer it")
    p.add_argument("--sample", type=float, help="edge sample fraction")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("evaluate", help="leave-one-out evaluation of a method")
    _add_input_flags(p, ratings_required=True, trust_required=True)
    _add_propagation_flags(p)
    p.add_argument("--method", choices=evaluation.METHODS, required=True)
    p.add_argument("--view", choices=evaluation.VIEW_NAMES, default="all")
    p.add_argument("--sample", type=float, help="held-out rating sample fraction")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--horizon", type=int, default=3)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="write machine-readable report records here")

    return parser


def _config_from_args(args) -> PropagationConfig:
    return PropagationConfig(damping=args.damping, store_threshold=args.threshold,
                             max_rounds=args.max_rounds, tolerance=args.tol)


def _echo_config(args) -> dict:
    skip = {"subcommand"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _load(args):
    return ingest.load_dataset(getattr(args, "ratings", None),
                               getattr(args, "trust", None))


def _network_state(args, dataset, config):
    if args.snapshot:
        try:
            state = ingest.load_snapshot(args.snapshot)
            log.info("loaded snapshot %s (round %d)", args.snapshot, state.round)
            return state
        except FileNotFoundError:
            pass
    state = propagate(dataset, config)
    if args.snapshot:
        ingest.save_snapshot(state, args.snapshot, config)
        log.info("wrote snapshot %s", args.snapshot)
    return state


def _cmd_ingest(args):
    dataset = _load(args)
    stats = ingest.dataset_stats(dataset)
    w = dataset.warnings
    print(f"users={stats.n_users} items={stats.n_items} "
          f"ratings={stats.n_ratings} trust_edges={stats.n_trust_edges}")
    print(f"warnings: duplicate_ratings={w.duplicate_ratings} "
          f"duplicate_trust_edges={w.duplicate_trust_edges} "
          f"self_trust_edges={w.self_trust_edges}")
    return EXIT_OK


def _cmd_stats(args):
    stats = ingest.dataset_stats(_load(args))
    print(f"users={stats.n_users}")
    print(f"items={stats.n_items}")
    print(f"ratings={stats.n_ratings}")
    print(f"trust_edges={stats.n_trust_edges}")
    print(f"avg_neighbors={stats.avg_neighbors:.4f}")
    print(f"avg_ratings_per_user={stats.avg_ratings_per_user:.4f}")
    print(f"avg_ratings_per_item={stats.avg_ratings_per_item:.4f}")
    return EXIT_OK


def _cmd_synth(args):
    spec = ingest.SyntheticSpec(
        n_users=args.users, n_items=args.items, avg_out_degree=args.degree,
        avg_ratings_per_user=args.ratings_per_user,
        trust_value_mode=args.mode, rng_seed=args.seed)
    dataset = ingest.generate_synthetic(spec)
    # output paths are volatile and do not determine content
    echoed = {k: v for k, v in _echo_config(args).items()
              if not k.startswith("out_")}
    banner = "# " + json.dumps(echoed, sort_keys=True)
    with open(args.out_ratings, "w", encoding="utf-8") as fh:
        fh.write(banner + "\n")
        for u, i, v in dataset.rating_list():
            fh.write(f"{u} {i} {v}\n")
    with open(args.out_trust, "w", encoding="utf-8") as fh:
        fh.write(banner + "\n")
        for s, t, v in dataset.trust_edge_list():
            fh.write(f"{s} {t} {v!r}\n")
    stats = ingest.dataset_stats(dataset)
    print(f"wrote {stats.n_ratings} ratings and {stats.n_trust_edges} trust edges")
    return EXIT_OK


def _cmd_propagate(args):
    dataset = _load(args)
    config = _config_from_args(args)
    state = propagate(dataset, config)
    if args.snapshot:
        ingest.save_snapshot(state, args.snapshot, config)
    entries = sum(len(t.entries) for t in state.tables.values())
    inferred = sum(1 for t in state.tables.values()
                   for e in t.entries.values() if e.origin == "inferred")
    print(f"rounds={state.round} converged={state.converged} "
          f"entries={entries} inferred={inferred}")
    return EXIT_OK


def _cmd_recommend(args):
    dataset = _load(args)
    dataset._check_user(args.user)
    if args.item not in dataset.items:
        raise UnknownItemError(f"unknown item {args.item}")
    config = _config_from_args(args)
    if args.method == "proposed":
        state = _network_state(args, dataset, config)
        rec = recommend(state, args.user, args.item, dataset)
        if rec is None:
            print("no prediction: no positively-trusted neighbor rated this item")
            return EXIT_OK
        print(f"predicted={rec.predicted:.4f} confidence={rec.confidence:.4f} "
              f"contributors={len(rec.contributors)} "
              f"rating_recall={rec.rating_recall:.4f}")
        return EXIT_OK
    predicted, depth, _ = evaluation._predict_one(
        dataset, None, args.method, args.horizon, args.user, args.item)
    if predicted is None:
        print("no prediction")
    elif depth is not None:
        print(f"predicted={predicted:.4f} depth={depth}")
    else:
        print(f"predicted={predicted:.4f}")
    return EXIT_OK


def _cmd_trust(args):
    dataset = _load(args)
    config = _config_from_args(args)
    if args.leave_one_out:
        coverage, error = evaluation.leave_one_out_trust(
            dataset, config, sample=args.sample, seed=args.seed)
        print(f"coverage={'na' if coverage is None else f'{coverage:.4f}'} "
              f"mae={'na' if error is None else f'{error:.4f}'}")
        return EXIT_OK
    if args.source is None or args.target is None:
        raise _UsageError("trust query needs --source and --target")
    state = _network_state(args, dataset, config)
    result = query_trust(state, args.source, args.target)
    if result is None:
        print("no trust entry")
    else:
        trust, origin, hops = result
        print(f"trust={trust:.6f} origin={origin} hops={hops}")
    return EXIT_OK


def _cmd_evaluate(args):
    dataset = _load(args)
    config = _config_from_args(args)
    state = None
    if args.method == "proposed":
        state = _network_state(args, dataset, config)
    results = evaluation.evaluate_ratings(
        dataset, args.method, config, sample=args.sample, seed=args.seed,
        horizon=args.horizon, state=state, jobs=args.jobs)
    report = evaluation.build_report(results, args.method, args.view, dataset)

    def fmt(x):
        return "na" if x is None else f"{x:.4f}"

    print(f"method={report.method} view={report.view}")
    print(f"attempted={report.n_attempted} predicted={report.n_predicted}")
    print(f"mae={fmt(report.mae)} maue={fmt(report.maue)}")
    print(f"ratings_coverage={fmt(report.ratings_coverage)} "
          f"users_coverage={fmt(report.users_coverage)}")
    print(f"mean_rating_recall={fmt(report.mean_rating_recall)}")
    print("depth_histogram=" + json.dumps(
        {str(k): v for k, v in sorted(report.depth_histogram.items())}))
    for p in report.delta_curve:
        print(f"delta_a>={p.min_delta_a}: n={p.n} "
              f"mean_dr={fmt(p.mean_delta_r)} mean_da={fmt(p.mean_delta_a)} "
              f"mean_dcf={fmt(p.mean_delta_cf)}")

    if args.out:
        record = report.to_dict()
        record["config"] = _echo_config(args)
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(record, sort_keys=True) + "\n")
    return EXIT_OK


_COMMANDS = {
    "ingest": _cmd_ingest,
    "stats": _cmd_stats,
    "synth": _cmd_synth,
    "propagate": _cmd_propagate,
    "recommend": _cmd_recommend,
    "trust": _cmd_trust,
    "evaluate": _cmd_evaluate,
}


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.subcommand](args)
    except _UsageError as exc:
        log.error("usage error: %s", exc)
        return EXIT_USAGE
    except (TrustgridError, OSError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
