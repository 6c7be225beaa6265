"""Time lattice construction and order-graph A* on the compiled and numpy kernels.

    python3 benchmarks/bench_backends.py --dims 8,10,12,14 --repeats 3
"""

import argparse
import time

import numpy as np

from dkastar import _backend
from dkastar.dataset import Dataset
from dkastar.knowledge import Knowledge, compile_allowed
from dkastar.lattice import build_all
from dkastar.scoring import ScoreTable
from dkastar.search import search_lattices
from dkastar.synthgen import sample_er_dag, sample_sem, simulate


def time_backend(ds, name):
    t0 = time.perf_counter()
    lattices = build_all(ds, compile_allowed(Knowledge.empty(ds.p)), ScoreTable(ds, name), name)
    t1 = time.perf_counter()
    result = search_lattices(lattices, name)
    t2 = time.perf_counter()
    return t1 - t0, t2 - t1, result


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dims", default="8,10,12,14")
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    names = _backend.available()
    print(f"{'p':>3} {'backend':>8} {'lattice s':>10} {'astar s':>9} {'total s':>9}")
    for p in (int(d) for d in args.dims.split(",")):
        timings = {n: [] for n in names}
        for r in range(args.repeats):
            dag = sample_er_dag(p, 2.0, [args.seed, p, r])
            ds = Dataset.from_array(simulate(sample_sem(dag, [args.seed, p, r, 1]), 500, [args.seed, p, r, 2]))
            results = {}
            for n in names:
                lat, search, results[n] = time_backend(ds, n)
                timings[n].append((lat, search))
            if len({repr(v) for v in results.values()}) != 1:
                raise SystemExit(f"backends disagree at p={p} repeat={r}")
        for n in names:
            lat, search = np.median(np.array(timings[n]), axis=0)
            print(f"{p:>3} {n:>8} {lat:>10.4f} {search:>9.4f} {lat + search:>9.4f}")


if __name__ == "__main__":
    main()
