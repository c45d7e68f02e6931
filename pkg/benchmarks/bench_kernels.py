"""Compiled versus numpy partial-map kernels.

Two measurements: the raw kernels on random arrays, and a full relation check
on the featured orbit with each backend swapped in.  Usage::

    python3 benchmarks/bench_kernels.py [--size N] [--repeat R]
"""

from __future__ import annotations

import argparse
import contextlib
import timeit

import numpy as np

from orbitrep import _pykernels, kernels
from orbitrep.dynamics import MapSpec
from orbitrep.numeric import parse_scalar
from orbitrep.operators import verify_relations
from orbitrep.orbit import generalized_orbit

NAMES = ("normalize", "inverse", "compose", "adjoint", "compare", "projection_defect")


def _compiled():
    try:
        from orbitrep import _kernels
    except ImportError:
        return None
    return _kernels


@contextlib.contextmanager
def using(backend):
    saved = {name: getattr(kernels, name) for name in NAMES}
    for name in NAMES:
        setattr(kernels, name, getattr(backend, name))
    try:
        yield
    finally:
        for name, fn in saved.items():
            setattr(kernels, name, fn)


def random_map(rng, n):
    tgt = np.where(rng.random(n) < 0.8, rng.permutation(n), -1).astype(np.int64)
    core = (rng.random(n) < 0.9).astype(np.uint8)
    rowc = (rng.random(n) < 0.9).astype(np.uint8)
    return tgt, core, rowc


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=1_000_000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    compiled = _compiled()
    backends = [("numpy", _pykernels)] + ([("cython", compiled)] if compiled else [])
    if compiled is None:
        print("compiled extension not built; timing numpy only")

    rng = np.random.default_rng(args.seed)
    a, b = random_map(rng, args.size), random_map(rng, args.size)
    cases = {
        "compose": lambda k: k.compose(*a, *b),
        "adjoint": lambda k: k.adjoint(*a),
        "compare": lambda k: k.compare(a[0], a[1], b[0], b[1]),
    }
    print(f"kernels on {args.size:,} columns (best of {args.repeat}, ms)")
    print(f"{'kernel':<10}" + "".join(f"{name:>12}" for name, _ in backends) + f"{'speedup':>10}")
    for case, fn in cases.items():
        times = [best(lambda k=k: fn(k), args.repeat) * 1e3 for _, k in backends]
        speed = f"{times[0] / times[1]:>9.1f}x" if len(times) == 2 else ""
        print(f"{case:<10}" + "".join(f"{t:>12.2f}" for t in times) + speed)

    spec = MapSpec(parse_scalar("2"), parse_scalar("sqrt(2)-1"))
    basis = generalized_orbit(spec, 0, 8, 5)
    print(f"\nsubshift relations, word depth 3, halo 6, featured orbit ({len(basis)} points)")
    results = []
    for name, k in backends:
        with using(k):
            t = best(lambda: verify_relations(None, basis, "subshift", word_depth=3, halo=6), 1)
            rep = verify_relations(None, basis, "subshift", word_depth=3, halo=6)
        results.append(rep.to_json())
        print(f"{name:<10}{t:>10.2f} s   work basis {rep.work_size:,}, violations {rep.violation_count}")
    if len(results) == 2:
        print("reports identical:", results[0] == results[1])


if __name__ == "__main__":
    main()
