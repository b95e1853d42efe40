"""``critset`` command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error, 3 resource guard refusal.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import time
from typing import Sequence

from . import baselines, rankcore, search, synth
from .bigraph import (
    BipartiteGraph,
    GraphError,
    degree_stats,
    read_edge_list,
    write_edge_list,
)
from .evaluation import coverage_curve
from .ranking import Ranking, read_ranking, write_ranking

log = logging.getLogger("critset")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_GUARD = 0, 1, 2, 3

METHODS = ("mincov", "shapley", "degree", "pagerank", "betweenness", "dspeel", "greedy", "shc")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _write_manifest(path: str, **fields) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(fields, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _manifest_path(args) -> str | None:
    if getattr(args, "manifest", None):
        return args.manifest
    if getattr(args, "out", None):
        return args.out + ".manifest.json"
    return None


def _load(path: str) -> BipartiteGraph:
    g, report = read_edge_list(path)
    log.info("loaded %s: %r %s", path, g, report.as_dict())
    return g


def _set_threads(n: int | None) -> None:
    if n:
        import numba

        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


# ---------------------------------------------------------------------------


def cmd_stats(args) -> int:
    g = _load(args.input)
    row = degree_stats(g).as_row()
    text = json.dumps(row) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def compute_ranking(g: BipartiteGraph, method: str, args) -> Ranking:
    if method == "mincov":
        return rankcore.mincov(g)
    if method == "shapley":
        return rankcore.shapley_rank(g)
    if method == "degree":
        return baselines.degree_rank(g)
    if method == "pagerank":
        r = baselines.pagerank_rank(g, args.damping, args.tol, args.max_iters)
        if not r.info["converged"]:
            log.warning("pagerank did not converge in %d iterations", args.max_iters)
        return r
    if method == "betweenness":
        return baselines.betweenness_rank(g, args.size_guard)
    if method == "dspeel":
        return baselines.dspeel_rank(g)
    if method == "greedy":
        return baselines.forward_greedy_rank(g)
    if method == "shc":
        if args.seed is None:
            raise UsageError("--seed is required for --method shc")
        max_moves = args.max_moves
        patience = args.patience if args.patience is not None else max_moves
        params = search.ShcParams(
            seed=args.seed,
            restarts=args.restarts,
            max_moves_per_restart=max_moves,
            patience=patience,
            init_strategy=args.init,
        )
        return search.shc_rank(g, params)
    raise UsageError(f"unknown method {method!r}")


def _method_params(args) -> dict:
    m = args.method
    if m == "pagerank":
        return {"damping": args.damping, "tol": args.tol, "max_iters": args.max_iters}
    if m == "betweenness":
        return {"size_guard": args.size_guard}
    if m == "shc":
        return {
            "restarts": args.restarts,
            "max_moves": args.max_moves,
            "patience": args.patience if args.patience is not None else args.max_moves,
            "init": args.init,
        }
    return {}


def cmd_rank(args) -> int:
    _set_threads(args.threads)
    t0 = time.perf_counter()
    g = _load(args.input)
    r = compute_ranking(g, args.method, args)
    if args.out:
        write_ranking(g, r, args.out, args.format)
    else:
        write_ranking(g, r, sys.stdout, args.format)
    mpath = _manifest_path(args)
    if mpath:
        _write_manifest(
            mpath,
            command="rank",
            input=args.input,
            input_sha256=_sha256(args.input),
            method=args.method,
            parameters=_method_params(args),
            seed=args.seed,
            threads=args.threads,
            wall_time_s=time.perf_counter() - t0,
            outputs=[args.out] if args.out else [],
        )
    return EXIT_OK


def cmd_eval(args) -> int:
    g = _load(args.input)
    r = read_ranking(g, args.ranking, method=args.method or os.path.basename(args.ranking))
    curve = coverage_curve(g, r)
    outputs = []
    if args.out:
        curve.write_csv(args.out)
        outputs.append(args.out)
    if args.summary:
        curve.write_summary(args.summary)
        outputs.append(args.summary)
    else:
        curve.write_summary(sys.stdout)
    mpath = _manifest_path(args)
    if mpath:
        _write_manifest(
            mpath,
            command="eval",
            input=args.input,
            input_sha256=_sha256(args.input),
            ranking=args.ranking,
            ranking_sha256=_sha256(args.ranking),
            method=curve.method,
            parameters={},
            seed=None,
            outputs=outputs,
        )
    return EXIT_OK


def _read_config_file(path: str) -> dict[str, str]:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.split("#", 1)[0].strip()
            if not s:
                continue
            if "=" not in s:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            k, v = s.split("=", 1)
            out[k.strip().replace("-", "_").lower()] = v.strip()
    return out


def _synth_value(args, cfg: dict, name: str, cast, default=None):
    v = getattr(args, name, None)
    if v is None:
        v = cfg.get(name, default)
    if v is None:
        raise UsageError(f"missing --{name.replace('_', '-')}")
    return cast(v)


def _read_simple_graph(path: str) -> list[tuple[str, str]]:
    edges = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith(("%", "#")):
                continue
            parts = s.split()
            if len(parts) < 2:
                raise GraphError(f"{path}:{lineno}: expected '<u> <v>', got {s!r}")
            edges.append((parts[0], parts[1]))
    return edges


def cmd_synth(args) -> int:
    t0 = time.perf_counter()
    cfg = _read_config_file(args.config) if args.config else {}
    report = synth.GenerationReport()
    params: dict
    if args.kind == "pl":
        c = synth.PowerLawConfig(
            n_contributors=_synth_value(args, cfg, "nc", int),
            n_items=_synth_value(args, cfg, "ni", int),
            alpha_C=_synth_value(args, cfg, "alpha_c", float),
            alpha_I=_synth_value(args, cfg, "alpha_i", float),
            D_C=_synth_value(args, cfg, "dc", int),
            D_I=_synth_value(args, cfg, "di", int),
            seed=_synth_value(args, cfg, "seed", int, 0),
        )
        g = synth.generate_powerlaw(c, report)
        params = dict(c.__dict__)
    elif args.kind == "er":
        c = synth.ErConfig(
            n_contributors=_synth_value(args, cfg, "nc", int),
            n_items=_synth_value(args, cfg, "ni", int),
            p=_synth_value(args, cfg, "p", float),
            seed=_synth_value(args, cfg, "seed", int, 0),
        )
        g = synth.generate_er(c, report)
        params = dict(c.__dict__)
    else:
        edges = _read_simple_graph(args.input)
        k = _synth_value(args, cfg, "k", int)
        g, k = synth.dks_to_criticalset(edges, k)
        params = {"k": k}
    if args.out:
        write_edge_list(g, args.out)
    else:
        write_edge_list(g, sys.stdout)
    log.info("generated %r %s", g, report.__dict__)
    mpath = _manifest_path(args)
    if mpath:
        _write_manifest(
            mpath,
            command=f"synth {args.kind}",
            input=getattr(args, "input", None),
            input_sha256=_sha256(args.input) if getattr(args, "input", None) else None,
            method=args.kind,
            parameters=params,
            seed=params.get("seed"),
            report=report.__dict__,
            wall_time_s=time.perf_counter() - t0,
            outputs=[args.out] if args.out else [],
        )
    return EXIT_OK


def run_bench(edge_counts: Sequence[int], seed: int, nodes: int = 50_000, repeats: int = 3):
    """Time ``mincov`` and ``shapley_cov`` on uniform random graphs.

    Returns ``[(edges, method, seconds)]`` with the best of ``repeats`` runs.
    """
    tiny = synth.generate_uniform_edges(4, 4, 6, 0)
    rankcore.mincov(tiny), rankcore.shapley_cov(tiny)  # compile outside the timings
    rows = []
    for k, m in enumerate(edge_counts):
        g = synth.generate_uniform_edges(nodes, nodes, int(m), seed + k)
        for name, fn in (("mincov", rankcore.mincov), ("shapley", rankcore.shapley_cov)):
            best = float("inf")
            for _ in range(repeats):
                t = time.perf_counter()
                fn(g)
                best = min(best, time.perf_counter() - t)
            rows.append((g.num_edges, name, best))
        del g
    return rows


def cmd_bench(args) -> int:
    _set_threads(args.threads)
    rows = run_bench([int(float(e)) for e in args.edges], args.seed, args.nodes, args.repeats)
    lines = ["edges,method,seconds\n"] + [f"{e},{m},{s:.6f}\n" for e, m, s in rows]
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.writelines(lines)
    else:
        sys.stdout.writelines(lines)
    return EXIT_OK


def cmd_oracle(args) -> int:
    g = _load(args.input)
    res = search.brute_force_best_k(g, args.k, args.limit)
    text = json.dumps(res.to_json(g)) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="critset", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("stats", help="structural statistics of an edge list")
    s.add_argument("--input", required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_stats)

    r = sub.add_parser("rank", help="rank contributors with one method")
    r.add_argument("--input", required=True)
    r.add_argument("--method", required=True, choices=METHODS)
    r.add_argument("--out")
    r.add_argument("--manifest")
    r.add_argument("--format", choices=("csv", "text"), default="csv")
    r.add_argument("--seed", type=int)
    r.add_argument("--damping", type=float, default=0.85)
    r.add_argument("--tol", type=float, default=1e-10)
    r.add_argument("--max-iters", type=int, default=200)
    r.add_argument("--size-guard", type=int, default=baselines.DEFAULT_SIZE_GUARD)
    r.add_argument("--restarts", type=int, default=4)
    r.add_argument("--max-moves", type=int, default=20_000)
    r.add_argument("--patience", type=int)
    r.add_argument("--init", choices=("mincov", "random"), default="mincov")
    r.add_argument("--threads", type=int)
    r.set_defaults(func=cmd_rank)

    e = sub.add_parser("eval", help="coverage curve and AUC of a ranking")
    e.add_argument("--input", required=True)
    e.add_argument("--ranking", required=True)
    e.add_argument("--out", help="curve CSV path")
    e.add_argument("--summary", help="summary JSON path (default: stdout)")
    e.add_argument("--method", help="method name recorded in the summary")
    e.add_argument("--manifest")
    e.set_defaults(func=cmd_eval)

    y = sub.add_parser("synth", help="generate a synthetic graph")
    ysub = y.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    common = _Parser(add_help=False)
    common.add_argument("--out")
    common.add_argument("--manifest")
    common.add_argument("--config", help="key=value file; flags take precedence")
    common.add_argument("--seed", type=int)
    pl = ysub.add_parser("pl", parents=[common], help="power-law configuration model")
    for flag, typ in (("--nc", int), ("--ni", int), ("--alpha-c", float), ("--alpha-i", float),
                      ("--dc", int), ("--di", int)):
        pl.add_argument(flag, type=typ)
    er = ysub.add_parser("er", parents=[common], help="Erdos-Renyi bipartite graph")
    for flag, typ in (("--nc", int), ("--ni", int), ("--p", float)):
        er.add_argument(flag, type=typ)
    rd = ysub.add_parser("reduce", parents=[common], help="densest-k-subgraph reduction")
    rd.add_argument("--input", required=True, help="simple graph edge list '<u> <v>'")
    rd.add_argument("--k", type=int)
    y.set_defaults(func=cmd_synth)

    b = sub.add_parser("bench", help="time mincov and shapley on random graphs")
    b.add_argument("--edges", nargs="+", required=True, help="edge counts, e.g. 1e6 2e6")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--nodes", type=int, default=50_000, help="nodes per side")
    b.add_argument("--repeats", type=int, default=3)
    b.add_argument("--out")
    b.add_argument("--threads", type=int)
    b.set_defaults(func=cmd_bench)

    o = sub.add_parser("oracle", help="exhaustive best size-k contributor set")
    o.add_argument("--input", required=True)
    o.add_argument("--k", type=int, required=True)
    o.add_argument("--limit", type=int, default=5_000_000)
    o.add_argument("--out")
    o.set_defaults(func=cmd_oracle)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"critset: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (baselines.SizeGuardError, search.OracleLimitError) as exc:
        print(f"critset: refused: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (GraphError, OSError, ValueError) as exc:
        print(f"critset: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
