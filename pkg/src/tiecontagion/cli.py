"""Command-line entry point: ``tiecontagion <subcommand> [options]``.

Every subcommand writes into ``--out`` and leaves a ``run-manifest.json``
recording inputs (with SHA-256), all parameters and the root seed. Options may
also come from ``--config FILE`` (JSON object keyed by option dest names);
explicit flags win.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .burst import NoBurst, cumulative_curve, detect_markers, trace_curve
from .calibration import (
    DEFAULT_ALPHAS,
    DIVERGENCES,
    empirical_strength_sample,
    fit_alpha_all,
    seed_node_for,
    sub_seed,
    sweep,
)
from .diffusion import BACKEND, DiffusionConfig, DiffusionTrace, Simulator, coverage, snapshot_first_k
from .events import aggregate_by_dominance, analyze_event, load_events
from .graph import (
    NodeIdMap,
    SocialGraph,
    load_edge_list,
    load_graph,
    load_retweet_log,
    parse_timestamp,
    save_graph,
    sbm_generate,
    synthetic_retweet_log,
)
from .output import emit_plot_data, write_csv, write_fit, write_json, write_sweep
from .stats import (
    DEFAULT_BINS,
    DEFAULT_EPSILON,
    StatisticsError,
    bernoulli_from_sample,
    histogram,
    kl_divergence,
    wasserstein_1d,
    welch_t_test,
)
from .ties import (
    COMMON_FRIENDS,
    RECIPROCITY,
    RETWEET_STRENGTH,
    build_strength_table,
    canonical_metric,
    common_counts,
    compare_emotion_strengths,
)

log = logging.getLogger("tiecontagion")


class CLIError(Exception):
    pass


# --- argument helpers --------------------------------------------------------


def float_list(text: str) -> list[float]:
    """``"a,b,c"`` or an inclusive range ``"start:stop:step"``."""
    text = str(text).strip()
    if ":" in text:
        start, stop, step = (float(p) for p in text.split(":"))
        if step <= 0:
            raise argparse.ArgumentTypeError("range step must be positive")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + k * step, 10) for k in range(count)]
    return [float(p) for p in text.split(",") if p.strip()]


def int_list(text: str) -> list[int]:
    return [int(p) for p in str(text).split(",") if p.strip()]


def _input_paths(args) -> list[str]:
    keys = ("graph", "log", "edges", "timestamps", "trace", "events", "a", "b", "empirical", "config")
    return [getattr(args, k) for k in keys if getattr(args, k, None)]


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(args, argv, out: Path) -> None:
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("func",)}
    doc = {
        "tool": "tiecontagion",
        "version": __version__,
        "kernel_backend": BACKEND,
        "subcommand": args.command,
        "argv": list(argv),
        "parameters": params,
        "rng_seed": getattr(args, "rng_seed", None),
        "inputs": {p: _sha256(p) for p in _input_paths(args)},
    }
    write_json(out / "run-manifest.json", doc)


def _open(path, mode="r"):
    try:
        return open(path, mode, encoding="utf-8")
    except FileNotFoundError:
        raise CLIError(f"no such file: {path}") from None


def _load_graph_arg(path) -> tuple:
    with _open(path) as fh:
        head = fh.read(1)
    if head == "{":
        return load_graph(path)
    with _open(path) as fh:
        return load_edge_list(fh)


def _load_log_arg(path, idmap: NodeIdMap):
    if not path:
        return None
    with _open(path) as fh:
        return load_retweet_log(fh, idmap)


def _load_table(args, g, idmap):
    metric = canonical_metric(args.metric)
    log_ = _load_log_arg(getattr(args, "log", None), idmap)
    if metric != COMMON_FRIENDS and log_ is None:
        raise CLIError(f"metric {metric} needs --log")
    t_cut = getattr(args, "t_cut", None)
    if metric == RETWEET_STRENGTH and t_cut is None:
        t_cut = math.inf
    return build_strength_table(g, log_, metric, t_cut), log_


def _read_sample(path) -> np.ndarray:
    values = []
    with _open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            field = line.split(",")[0].strip()
            try:
                values.append(float(field))
            except ValueError:
                if lineno == 1:
                    continue  # header
                raise CLIError(f"{path}: line {lineno}: not a number: {field!r}") from None
    return np.asarray(values, dtype=np.float64)


def _read_timestamps(path) -> list[float]:
    out = []
    with _open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            field = line.split(",")[0].strip()
            try:
                out.append(parse_timestamp(field))
            except ValueError:
                if lineno == 1:
                    continue
                raise CLIError(f"{path}: line {lineno}: bad timestamp {field!r}") from None
    return out


# --- subcommands -------------------------------------------------------------


def cmd_ingest(args, out: Path) -> None:
    with _open(args.edges) as fh:
        g, idmap = load_edge_list(fh)
    summary = {
        "nodes": g.node_count,
        "directed_edges": int(len(g.directed)),
        "undirected_edges": g.edge_count,
        "follow_reciprocity": g.follow_reciprocity(),
        "warnings": list(g.warnings),
    }
    if args.log:
        log_ = _load_log_arg(args.log, idmap)
        summary["retweets"] = len(log_)
        summary["log_warnings"] = list(log_.warnings)
        summary["nodes_after_log"] = len(idmap)
        if len(idmap) > g.node_count:
            g = SocialGraph.from_directed(len(idmap), g.directed, warnings=g.warnings)
    save_graph(g, out / "graph.json", idmap)
    write_json(out / "ingest-summary.json", summary)


def cmd_synth(args, out: Path) -> None:
    g = sbm_generate(args.blocks, args.p_in, args.p_out, args.rng_seed)
    idmap = NodeIdMap(str(i) for i in range(g.node_count))
    save_graph(g, out / "graph.json", idmap)
    with open(out / "edges.tsv", "w", encoding="utf-8") as fh:
        for u, v in g.directed.tolist():
            fh.write(f"{u}\t{v}\n")
    if args.records > 0:
        log_ = synthetic_retweet_log(g, args.records, sub_seed(args.rng_seed, "synth-log"))
        with open(out / "retweets.csv", "w", encoding="utf-8") as fh:
            fh.write("timestamp,retweeter,author,emotion\n")
            for r in log_.records:
                fh.write(f"{int(r.timestamp)},{r.retweeter},{r.author},{r.emotion}\n")
    write_json(out / "synth-summary.json", {
        "nodes": g.node_count,
        "undirected_edges": g.edge_count,
        "blocks": list(args.blocks),
        "records": args.records,
    })


def cmd_tie_strength(args, out: Path) -> None:
    g, idmap = _load_graph_arg(args.graph)
    table, log_ = _load_table(args, g, idmap)
    if table.metric == COMMON_FRIENDS:
        raw = common_counts(g)
    elif table.metric == RECIPROCITY:
        raw = table.ratios
    else:
        raw = table.raw_values
    rows = [
        (idmap.label(int(u)), idmap.label(int(v)), float(r), float(x))
        for (u, v), r, x in zip(g.edges.tolist(), raw, table.values)
    ]
    write_csv(out / "strengths.csv", ["u", "v", "raw", "normalized"], rows)
    summary = {
        "metric": table.metric,
        "edges": len(table),
        "mean_strength": float(table.values.mean()) if len(table) else None,
        "follow_reciprocity": g.follow_reciprocity(),
    }
    if table.s_min is not None:
        summary.update(s_min=table.s_min, s_max=table.s_max)
    if log_ is not None:
        try:
            summary["emotions"] = compare_emotion_strengths(g, log_, table.metric).to_dict()
        except StatisticsError as exc:
            summary["emotions"] = {"error": str(exc)}
    write_json(out / "summary.json", summary)


def _config_from_args(args) -> DiffusionConfig:
    return DiffusionConfig(args.gamma, args.alpha, canonical_metric(args.metric), args.max_steps, args.weight_floor)


def cmd_simulate(args, out: Path) -> None:
    g, idmap = _load_graph_arg(args.graph)
    table, _ = _load_table(args, g, idmap)
    cfg = _config_from_args(args)
    sim = Simulator(g, table, cfg)
    fixed = idmap.id(args.seed_node) if args.seed_node is not None else None
    (out / "traces").mkdir(exist_ok=True)
    if args.snapshot_k:
        (out / "snapshots").mkdir(exist_ok=True)
    traces = []
    for rep in range(args.runs):
        seed = fixed if fixed is not None else seed_node_for(args.rng_seed, rep, g.node_count)
        tr = sim.run(seed, sub_seed(args.rng_seed, "run", cfg.gamma, cfg.alpha, rep))
        traces.append(tr)
        with open(out / "traces" / f"run_{rep:04d}.json", "w", encoding="utf-8") as fh:
            fh.write(tr.to_json() + "\n")
        if args.snapshot_k:
            snap = snapshot_first_k(tr, g, args.snapshot_k)
            with open(out / "snapshots" / f"run_{rep:04d}.dot", "w", encoding="utf-8") as fh:
                fh.write(snap.to_dot(g, idmap, name=f"run_{rep:04d}"))
    horizon = max(tr.steps for tr in traces) + 1
    curves = np.array([np.pad(tr.cumulative(), (0, horizon - tr.steps - 1), mode="edge") for tr in traces])
    rows = [
        (step, float(col.mean()), float(col.std(ddof=1)) if len(col) > 1 else 0.0, int(col.min()), int(col.max()))
        for step, col in enumerate(curves.T)
    ]
    write_csv(out / "cumulative.csv", ["step", "mean", "sd", "min", "max"], rows)
    covs = [coverage(tr) for tr in traces]
    slopes = []
    for tr in traces:
        try:
            slopes.append(detect_markers(trace_curve(tr)).slope)
        except NoBurst:
            pass
    write_json(out / "summary.json", {
        "runs": args.runs,
        "mean_coverage": float(np.mean(covs)),
        "coverage_sd": float(np.std(covs, ddof=1)) if len(covs) > 1 else 0.0,
        "mean_slope": float(np.mean(slopes)) if slopes else None,
        "noburst": args.runs - len(slopes),
    })


def cmd_burst(args, out: Path) -> None:
    if bool(args.timestamps) == bool(args.trace):
        raise CLIError("give exactly one of --timestamps or --trace")
    if args.trace:
        with _open(args.trace) as fh:
            curve = trace_curve(DiffusionTrace.from_dict(json.load(fh)))
    else:
        curve = cumulative_curve(_read_timestamps(args.timestamps), args.bin_width)
    emit_plot_data(curve, out / "curve.csv")
    try:
        emit_plot_data(detect_markers(curve), out / "markers.json")
    except NoBurst as exc:
        write_json(out / "markers.json", {"no_burst": True, "reason": str(exc)})


def cmd_sweep(args, out: Path) -> None:
    g, idmap = _load_graph_arg(args.graph)
    table, _ = _load_table(args, g, idmap)
    result = sweep(g, table, args.gammas, args.alphas, args.runs, args.rng_seed,
                   args.max_steps, args.weight_floor, args.threads)
    write_sweep(result, out)


def cmd_fit(args, out: Path) -> None:
    g, idmap = _load_graph_arg(args.graph)
    table, log_ = _load_table(args, g, idmap)
    if args.empirical:
        empirical = _read_sample(args.empirical)
    elif args.emotion:
        if log_ is None:
            raise CLIError("--emotion needs --log")
        empirical = empirical_strength_sample(g, log_, table, args.emotion)
    else:
        raise CLIError("give --empirical or --emotion")
    kinds = DIVERGENCES if args.divergence == "both" else (args.divergence,)
    fits = fit_alpha_all(g, table, empirical, args.gamma, args.alphas, args.runs, kinds, args.rng_seed,
                         args.bins, args.epsilon, args.max_steps, args.weight_floor, args.threads)
    for kind, fit in fits.items():
        write_fit(fit, out / f"fit_{kind}.csv")
    write_json(out / "fit.json", {"empirical_size": int(len(empirical)),
                                  "fits": [f.to_dict() for f in fits.values()]})


def cmd_events(args, out: Path) -> None:
    with _open(args.events) as fh:
        events = load_events(fh)
    analyses = [analyze_event(e, args.bin_width, args.threshold, args.count_all) for e in events]
    write_json(out / "events.json", [a.to_dict() for a in analyses])
    summary = aggregate_by_dominance(analyses)
    write_json(out / "summary.json", summary.to_dict())
    write_csv(out / "summary.csv", ["emotion", "events", "usable", "mean_normalized_slope"], [
        (k, grp.events, grp.usable, grp.mean_normalized_slope) for k, grp in summary.groups.items()
    ])


def cmd_stats(args, out: Path) -> None:
    a, b = _read_sample(args.a), _read_sample(args.b)
    doc: dict = {"n_a": int(a.size), "n_b": int(b.size)}
    try:
        w = welch_t_test(a, b)
        doc["welch"] = {"t": w.t, "df": w.df, "p": w.p_two_sided}
    except StatisticsError as exc:
        doc["welch"] = {"error": str(exc)}
    try:
        if args.kind == "bernoulli":
            pa, pb = bernoulli_from_sample(a), bernoulli_from_sample(b)
        else:
            pa, pb = histogram(a, args.bins), histogram(b, args.bins)
        doc["kl"] = kl_divergence(pa, pb, args.epsilon)
        doc["wasserstein"] = wasserstein_1d(pa, pb)
        doc["distribution"] = {"kind": pa.kind, "bins": len(pa.masses), "epsilon": args.epsilon}
    except ValueError as exc:
        doc["divergence_error"] = str(exc)
    write_json(out / "stats.json", doc)


# --- parser ------------------------------------------------------------------


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default="out", help="output directory (default: out)")
    p.add_argument("--rng-seed", type=int, default=0, help="root random seed (default: 0)")
    p.add_argument("--config", help="JSON file of option defaults; flags win")
    p.add_argument("--threads", type=int, default=1, help="worker processes (default: 1)")


def _graph_opts(p: argparse.ArgumentParser, metric_choices=("common-friends", "reciprocity", "retweets")) -> None:
    p.add_argument("--graph", required=True, help="graph cache JSON or edge-list TSV")
    p.add_argument("--log", help="retweet log CSV (needed for reciprocity / retweets)")
    p.add_argument("--metric", default="common-friends", choices=metric_choices)


def _model_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-steps", type=int, default=50)
    p.add_argument("--weight-floor", type=float, default=1e-6)


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = argparse.ArgumentParser(prog="tiecontagion", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    subs = {}

    p = subs["ingest"] = sub.add_parser("ingest", help="edge list (+ log) to graph cache")
    p.add_argument("--edges", required=True)
    p.add_argument("--log")
    p.set_defaults(func=cmd_ingest)

    p = subs["synth"] = sub.add_parser("synth", help="generate a stochastic block model graph")
    p.add_argument("--blocks", type=int_list, default=[500, 500, 500, 500])
    p.add_argument("--p-in", type=float, default=0.05)
    p.add_argument("--p-out", type=float, default=0.005)
    p.add_argument("--records", type=int, default=0, help="synthetic retweet records to emit")
    p.set_defaults(func=cmd_synth)

    p = subs["tie-strength"] = sub.add_parser("tie-strength", help="per-edge strengths and anger/joy comparison")
    _graph_opts(p)
    p.add_argument("--t-cut", type=parse_timestamp, default=None,
                   help="count retweets strictly before this time (default: whole log)")
    p.set_defaults(func=cmd_tie_strength)

    p = subs["simulate"] = sub.add_parser("simulate", help="run diffusion simulations")
    _graph_opts(p)
    p.add_argument("--gamma", type=float, default=0.6)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--runs", type=int, default=1)
    _model_opts(p)
    seeds = p.add_mutually_exclusive_group()
    seeds.add_argument("--seed-node", help="node label to seed every run")
    seeds.add_argument("--random-seeds", action="store_true", help="uniform random seed node per run (default)")
    p.add_argument("--snapshot-k", type=int, default=0, help="emit DOT snapshots of the first K infected")
    p.set_defaults(func=cmd_simulate)

    p = subs["burst"] = sub.add_parser("burst", help="awakening/peak markers of a cumulative curve")
    p.add_argument("--timestamps", help="CSV with one timestamp per line (first column)")
    p.add_argument("--trace", help="trace JSON written by simulate")
    p.add_argument("--bin-width", type=float, default=3600.0, help="seconds per bin (default: 3600)")
    p.set_defaults(func=cmd_burst)

    p = subs["sweep"] = sub.add_parser("sweep", help="slope/coverage over a (gamma, alpha) grid")
    _graph_opts(p)
    p.add_argument("--gammas", type=float_list, default=[0.4, 0.6, 0.9])
    p.add_argument("--alphas", type=float_list, default=list(DEFAULT_ALPHAS))
    p.add_argument("--runs", type=int, default=50)
    _model_opts(p)
    p.set_defaults(func=cmd_sweep)

    p = subs["fit"] = sub.add_parser("fit", help="divergence-minimizing alpha")
    _graph_opts(p, ("common-friends", "reciprocity", "retweets"))
    src = p.add_mutually_exclusive_group()
    src.add_argument("--emotion", choices=("anger", "joy", "disgust", "sadness"))
    src.add_argument("--empirical", help="CSV of empirical strengths (first column)")
    p.add_argument("--gamma", type=float, default=0.6)
    p.add_argument("--alphas", type=float_list, default=list(DEFAULT_ALPHAS))
    p.add_argument("--runs", type=int, default=50)
    p.add_argument("--divergence", choices=("kl", "wasserstein", "both"), default="both")
    p.add_argument("--bins", type=int, default=DEFAULT_BINS)
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    _model_opts(p)
    p.set_defaults(func=cmd_fit)

    p = subs["events"] = sub.add_parser("events", help="dominant-emotion burst kinetics of events")
    p.add_argument("--events", required=True, help="CSV: event_id,timestamp,emotion")
    p.add_argument("--bin-width", type=float, default=3600.0)
    p.add_argument("--threshold", type=float, default=0.6)
    p.add_argument("--count-all", action="store_true", help="count all tweets, not only emotional ones")
    p.set_defaults(func=cmd_events)

    p = subs["stats"] = sub.add_parser("stats", help="Welch test and divergences between two samples")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--kind", choices=("histogram", "bernoulli"), default="histogram")
    p.add_argument("--bins", type=int, default=DEFAULT_BINS)
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    p.set_defaults(func=cmd_stats)

    for p in subs.values():
        _common(p)
    return parser, subs


def parse_args(argv) -> argparse.Namespace:
    parser, subs = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        with _open(args.config) as fh:
            cfg = json.load(fh)
        if not isinstance(cfg, dict):
            parser.error("--config must hold a JSON object")
        sp = subs[args.command]
        known = {a.dest for a in sp._actions}
        unknown = sorted(set(cfg) - known)
        if unknown:
            parser.error(f"unknown config keys: {', '.join(unknown)}")
        for action in sp._actions:
            if action.dest in cfg and isinstance(cfg[action.dest], str) and action.type is not None:
                cfg[action.dest] = action.type(cfg[action.dest])
        sp.set_defaults(**cfg)
        args = parser.parse_args(argv)
    return args


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
    except CLIError as exc:
        print(f"tiecontagion: error: {exc}", file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        args.func(args, out)
        _write_manifest(args, argv, out)
    except (CLIError, ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"tiecontagion: error: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
