"""Command-line interface.

Exit codes: 0 success, 1 I/O failure, 2 invalid input, 3 verification failure
(``--certify`` disagreement or a count mismatch in ``verify-counts``).
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import logging
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import _backend
from .dataset import DataError, Dataset, load_csv, write_csv
from .equivalence import dag_to_cpdag, meek_closure, modified_cpdag, shd, shd_scaled
from .fixtures import sachs_truth_text
from .graph import (CycleError, Cpdag, Dag, GraphFormatError, default_names, dumps_graph,
                    loads_graph, to_dot)
from .knowledge import (Knowledge, KnowledgeError, compile_allowed, merge_super_structure,
                        parse_knowledge, parse_super_structure, predicted_eval_count,
                        tier_count_formula)
from .lattice import build_all
from .oracle import MAX_EXHAUSTIVE_VARS, exhaustive_best_dag
from .scoring import ScoreTable
from .search import astar_discover
from .synthgen import KINDS, KnowledgeUnavailable, sample_er_dag, sample_knowledge, sample_sem, simulate

log = logging.getLogger("dkastar")

DEFAULT_SEED = 20240101
CERTIFY_RTOL = 1e-9

EXIT_OK, EXIT_IO, EXIT_INVALID, EXIT_MISMATCH = 0, 1, 2, 3


def _read(path) -> str:
    return Path(path).read_text(encoding="utf-8")


def _write(path, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


# -- discover ----------------------------------------------------------------

def cmd_discover(args) -> int:
    data = load_csv(args.data, args.delimiter)
    names = list(data.names)
    knowledge = parse_knowledge(_read(args.knowledge), names) if args.knowledge else Knowledge.empty(data.p, names)
    if args.super_structure:
        adj = parse_super_structure(_read(args.super_structure), names)
        knowledge = merge_super_structure(knowledge, adj)
    if args.certify and data.p > MAX_EXHAUSTIVE_VARS:
        raise KnowledgeError(f"--certify supports at most {MAX_EXHAUSTIVE_VARS} variables, data has {data.p}")

    result = astar_discover(data, knowledge, backend=args.backend)
    graph = modified_cpdag(result.dag, knowledge)
    report = {
        "variables": names,
        "total_score": result.total_score,
        "eval_count": result.eval_count,
        "predicted_eval_count": predicted_eval_count(data.p, knowledge),
        "expanded_nodes": result.expanded_nodes,
        "wall_time_ms": round(result.wall_time_ms, 3),
        "backend": _backend.get(args.backend).NAME,
    }
    status = EXIT_OK
    if args.certify:
        odag, oscore = exhaustive_best_dag(data, knowledge)
        same_score = math.isclose(result.total_score, oscore, rel_tol=CERTIFY_RTOL, abs_tol=0.0)
        same_graph = modified_cpdag(odag, knowledge) == graph
        report["certified"] = bool(same_score and same_graph)
        report["oracle_score"] = oscore
        if not report["certified"]:
            print(f"certify: mismatch (astar {result.total_score!r}, oracle {oscore!r}, "
                  f"graphs {'equal' if same_graph else 'differ'})", file=sys.stderr)
            status = EXIT_MISMATCH

    text = dumps_graph(graph, names)
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    if args.dot:
        _write(args.dot, to_dot(graph, names))
    if args.report:
        _write(args.report, json.dumps(report, indent=2) + "\n")
    log.info("score=%.6f evals=%d expanded=%d", result.total_score, result.eval_count, result.expanded_nodes)
    return status


# -- bench -------------------------------------------------------------------

BENCH_COLUMNS = ["dim", "kind", "repeat", "shd", "shd_scaled", "eval_count", "predicted_eval_count",
                 "expanded_nodes", "runtime_ms"]
SUMMARY_STD = ["shd_std", "shd_scaled_std", "eval_count_std", "expanded_nodes_std", "runtime_ms_std"]


def _bench_truth(seed: int, dim: int, repeat: int, degree: float, kinds):
    """First DAG (over attempts) from which every requested knowledge kind can be sampled."""
    for attempt in range(1000):
        dag = sample_er_dag(dim, degree, [seed, dim, repeat, 0, attempt])
        try:
            for kind in kinds:
                sample_knowledge(dag, kind, [seed, dim, repeat, 1 + KINDS.index(kind)])
        except KnowledgeUnavailable:
            continue
        return dag, attempt
    raise RuntimeError(f"could not draw a usable DAG for dim={dim} repeat={repeat}")


def bench_repeat(dim: int, repeat: int, kinds, seed: int, n: int, degree: float, backend=None):
    """Rows for one (dim, repeat): the same data set is shared by every knowledge kind."""
    truth, attempt = _bench_truth(seed, dim, repeat, degree, kinds)
    sem = sample_sem(truth, [seed, dim, repeat, 100, attempt])
    data = Dataset.from_array(simulate(sem, n, [seed, dim, repeat, 200, attempt]))
    rows = []
    for kind in kinds:
        knowledge = sample_knowledge(truth, kind, [seed, dim, repeat, 1 + KINDS.index(kind)],
                                     names=data.names)
        result = astar_discover(data, knowledge, backend=backend)
        est = modified_cpdag(result.dag, knowledge)
        ref = modified_cpdag(truth, knowledge)
        rows.append({
            "dim": dim, "kind": kind, "repeat": repeat,
            "shd": shd(est, ref), "shd_scaled": shd_scaled(est, ref),
            "eval_count": result.eval_count,
            "predicted_eval_count": predicted_eval_count(dim, knowledge),
            "expanded_nodes": result.expanded_nodes,
            "runtime_ms": round(result.wall_time_ms, 3),
        })
    return rows


def run_bench(dims, repeats, kinds, seed, n=500, degree=2.0, threads=1, backend=None):
    """Per-repeat rows in (dim, kind, repeat) order plus per-(dim, kind) summaries."""
    jobs = [(d, r) for d in dims for r in range(repeats)]
    args = [(d, r, tuple(kinds), seed, n, degree, backend) for d, r in jobs]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(bench_repeat, *zip(*args)))
    else:
        results = [bench_repeat(*a) for a in args]
    by_key = {}
    for rows in results:
        for row in rows:
            by_key.setdefault((row["dim"], row["kind"]), []).append(row)
    data_rows, summaries = [], []
    for d in dims:
        for kind in kinds:
            group = sorted(by_key[(d, kind)], key=lambda r: r["repeat"])
            data_rows.extend(group)
            summaries.append(summarize(group))
    return data_rows, summaries


def summarize(group):
    out = {"dim": group[0]["dim"], "kind": group[0]["kind"], "repeat": "summary"}
    for col in BENCH_COLUMNS[3:]:
        vals = np.array([r[col] for r in group], dtype=float)
        out[col] = float(vals.mean())
        std_col = f"{col}_std"
        if std_col in SUMMARY_STD:
            out[std_col] = float(vals.std(ddof=1)) if len(vals) > 1 else 0.0
    return out


def format_bench_csv(data_rows, summaries) -> str:
    """Data rows of each (dim, kind) group followed by that group's summary row."""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=BENCH_COLUMNS + SUMMARY_STD, lineterminator="\n")
    w.writeheader()
    summary_of = {(s["dim"], s["kind"]): s for s in summaries}
    for key, group in itertools.groupby(data_rows, key=lambda r: (r["dim"], r["kind"])):
        w.writerows(group)
        w.writerow(summary_of[key])
    return buf.getvalue()


def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def cmd_bench(args) -> int:
    dims = _int_list(args.dims)
    kinds = [k.strip() for k in args.knowledge_kinds.split(",") if k.strip()]
    bad = [k for k in kinds if k not in KINDS]
    if bad or not dims or any(d < 2 for d in dims) or args.repeats < 1:
        raise KnowledgeError(f"invalid bench arguments (unknown kinds: {bad})" if bad
                             else "need dims >= 2 and repeats >= 1")
    threads = args.threads or os.cpu_count() or 1
    data_rows, summaries = run_bench(dims, args.repeats, kinds, args.seed, args.n, args.degree,
                                     threads, args.backend)
    text = format_bench_csv(data_rows, summaries)
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    print(f"{'dim':>4} {'kind':>10} {'shd_scaled':>18} {'eval_count':>12} {'expanded':>10}", file=sys.stderr)
    for s in summaries:
        print(f"{s['dim']:>4} {s['kind']:>10} {s['shd_scaled']:>9.4f} ± {s['shd_scaled_std']:<6.4f} "
              f"{s['eval_count']:>12.1f} {s['expanded_nodes']:>10.1f}", file=sys.stderr)
    return EXIT_OK


# -- verify-counts -----------------------------------------------------------

def count_regressions(data, knowledge, backend=None) -> int:
    """Regressions actually run while building every pruned lattice."""
    table = ScoreTable(data, backend)
    build_all(data, compile_allowed(knowledge), table, backend)
    return table.eval_count


def random_tier_partition(p: int, rng) -> list[list[int]]:
    n_tiers = int(rng.integers(2, p + 1))
    cuts = np.sort(rng.choice(np.arange(1, p), size=n_tiers - 1, replace=False))
    perm = [int(v) for v in rng.permutation(p)]
    bounds = [0, *map(int, cuts), p]
    return [perm[bounds[k]:bounds[k + 1]] for k in range(n_tiers)]


def verify_counts(min_p: int, max_p: int, n_random: int, seed: int, backend=None, out=None):
    """Check the counter against the closed-form counts; returns the list of failures."""
    out = out or sys.stdout
    rng = np.random.default_rng(seed)
    failures = []
    print(f"{'p':>3} {'case':<16} {'configs':>7} {'expected':>10} {'actual':>10}  status", file=out)
    for p in range(min_p, max_p + 1):
        data = Dataset.from_array(rng.standard_normal((2 * p + 10, p)))
        cases = {"none": [], "known": [], "forbidden": [], "tiers-3": [], "tiers-random": []}
        full = p * 2 ** (p - 1)
        cases["none"].append((Knowledge.empty(p), full, None))
        reduced = (p - 1) * 2 ** (p - 1)
        for a in range(p):
            for b in range(p):
                if a != b:
                    cases["known"].append((Knowledge.build(p, known=[(a, b)]), reduced, None))
        for a in range(p):
            for b in range(a + 1, p):
                cases["forbidden"].append((Knowledge.build(p, forbidden=[(a, b)]), reduced, None))
        half = p * 2 ** (p - 2)
        for src in range(p):
            for snk in range(p):
                if src != snk:
                    rest = [i for i in range(p) if i not in (src, snk)]
                    k = Knowledge.build(p, tiers=[[src], rest, [snk]])
                    cases["tiers-3"].append((k, tier_count_formula(p, [1, p - 2, 1]), half))
        for _ in range(n_random):
            tiers = random_tier_partition(p, rng)
            cases["tiers-random"].append(
                (Knowledge.build(p, tiers=tiers), tier_count_formula(p, [len(t) for t in tiers]), None))
        for case, configs in cases.items():
            bad = 0
            first_exp = first_act = None
            for knowledge, expected, halved in configs:
                actual = count_regressions(data, knowledge, backend)
                ok = actual == expected and predicted_eval_count(p, knowledge) == expected
                if halved is not None:
                    # the general formula counts the source's empty parent set; halving holds up to +1
                    ok = ok and 0 <= actual - halved <= 1
                if first_exp is None:
                    first_exp, first_act = expected, actual
                if not ok:
                    bad += 1
                    failures.append((p, case, knowledge, expected, actual))
                    print(f"MISMATCH p={p} case={case} known={sorted(knowledge.known)} "
                          f"forbidden={sorted(knowledge.forbidden)} tiers={knowledge.tiers} "
                          f"expected={expected} actual={actual}", file=out)
            shown_exp = first_exp if case != "tiers-random" else "varies"
            shown_act = first_act if case != "tiers-random" else "varies"
            print(f"{p:>3} {case:<16} {len(configs):>7} {shown_exp!s:>10} {shown_act!s:>10}  "
                  f"{'ok' if not bad else f'{bad} FAILED'}", file=out)
    return failures


def cmd_verify_counts(args) -> int:
    if args.max_p < args.min_p or args.min_p < 2:
        raise KnowledgeError("need 2 <= min-p <= max-p")
    t0 = time.perf_counter()
    failures = verify_counts(args.min_p, args.max_p, args.random_tiers, args.seed, args.backend)
    print(f"{'all counts exact' if not failures else f'{len(failures)} mismatches'} "
          f"({time.perf_counter() - t0:.1f} s)")
    return EXIT_MISMATCH if failures else EXIT_OK


# -- shd / synth -------------------------------------------------------------

def _as_modified(graph, knowledge):
    cp = dag_to_cpdag(graph) if isinstance(graph, Dag) else graph
    return meek_closure(cp, knowledge)


def cmd_shd(args) -> int:
    names_a, ga = loads_graph(_read(args.a))
    names_b, gb = loads_graph(_read(args.b))
    if sorted(names_a) != sorted(names_b):
        raise GraphFormatError("the two graphs are over different variables")
    if names_a != names_b:
        # reorder b onto a's variable order
        perm = [names_b.index(n) for n in names_a]
        if isinstance(gb, Dag):
            gb = Dag.from_edges(len(perm), [(perm.index(a), perm.index(b)) for a, b in gb.edges()])
        else:
            gb = Cpdag(gb.marks[np.ix_(perm, perm)])
    knowledge = parse_knowledge(_read(args.knowledge), names_a) if args.knowledge else None
    ma, mb = _as_modified(ga, knowledge), _as_modified(gb, knowledge)
    print(f"shd {shd(ma, mb)}")
    print(f"shd_scaled {shd_scaled(ma, mb)!r}")
    return EXIT_OK


def cmd_synth(args) -> int:
    if args.p < 2 or args.n < 1:
        raise KnowledgeError("need --p >= 2 and --n >= 1")
    names = default_names(args.p)
    dag = sample_er_dag(args.p, args.degree, [args.seed, 0])
    sem = sample_sem(dag, [args.seed, 1])
    x = simulate(sem, args.n, [args.seed, 2])
    prefix = args.out_prefix
    write_csv(f"{prefix}.csv", x, names)
    _write(f"{prefix}.truth.json", dumps_graph(dag, names))
    if args.knowledge_kind:
        try:
            k = sample_knowledge(dag, args.knowledge_kind, [args.seed, 3], names)
        except KnowledgeUnavailable as exc:
            raise KnowledgeError(str(exc)) from None
        _write(f"{prefix}.knowledge.json", k.dumps(names))
    return EXIT_OK


def cmd_sachs_truth(args) -> int:
    text = sachs_truth_text()
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- entry point -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dkastar", description=__doc__.splitlines()[0])
    ap.add_argument("--backend", choices=_backend.available(), default=None,
                    help="kernel implementation (default: compiled when available)")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    d = sub.add_parser("discover", help="run A* discovery on a CSV data set")
    d.add_argument("--data", required=True)
    d.add_argument("--delimiter", default=",")
    d.add_argument("--knowledge")
    d.add_argument("--super-structure")
    d.add_argument("--out", help="modified-CPDAG JSON (default: stdout)")
    d.add_argument("--dot")
    d.add_argument("--report")
    d.add_argument("--certify", action="store_true",
                   help=f"cross-check against exhaustive search (p <= {MAX_EXHAUSTIVE_VARS})")
    d.set_defaults(func=cmd_discover)

    b = sub.add_parser("bench", help="synthetic benchmark over dimensions and knowledge kinds")
    b.add_argument("--dims", default="5,7,10")
    b.add_argument("--repeats", type=int, default=20)
    b.add_argument("--knowledge-kinds", default=",".join(KINDS))
    b.add_argument("--seed", type=int, default=DEFAULT_SEED)
    b.add_argument("--n", type=int, default=500)
    b.add_argument("--degree", type=float, default=2.0)
    b.add_argument("--threads", type=int, default=0, help="worker processes (default: all cores)")
    b.add_argument("--out")
    b.set_defaults(func=cmd_bench)

    v = sub.add_parser("verify-counts", help="check regression counts against closed forms")
    v.add_argument("--max-p", type=int, default=12)
    v.add_argument("--min-p", type=int, default=4)
    v.add_argument("--random-tiers", type=int, default=20)
    v.add_argument("--seed", type=int, default=DEFAULT_SEED)
    v.set_defaults(func=cmd_verify_counts)

    s = sub.add_parser("shd", help="SHD between the modified CPDAGs of two graph files")
    s.add_argument("a")
    s.add_argument("b")
    s.add_argument("--knowledge")
    s.set_defaults(func=cmd_shd)

    y = sub.add_parser("synth", help="write a synthetic data set, its true DAG and optional knowledge")
    y.add_argument("--p", type=int, required=True)
    y.add_argument("--degree", type=float, default=2.0)
    y.add_argument("--n", type=int, default=500)
    y.add_argument("--seed", type=int, default=DEFAULT_SEED)
    y.add_argument("--out-prefix", required=True)
    y.add_argument("--knowledge-kind", choices=[k for k in KINDS if k != "none"])
    y.set_defaults(func=cmd_synth)

    t = sub.add_parser("sachs-truth", help="print the bundled Sachs ground-truth DAG")
    t.add_argument("--out")
    t.set_defaults(func=cmd_sachs_truth)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (KnowledgeError, DataError, GraphFormatError, CycleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
