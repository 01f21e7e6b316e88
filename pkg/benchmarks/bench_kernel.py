"""Compare the compiled and pure-Python hit-search kernels.

    python3 benchmarks/bench_kernel.py [--repeat N]

Times the kernel alone on random symbol strings, then a whole alignment
build, once per backend.  Both backends must return identical results; the
script checks that before reporting times.
"""

import argparse
import random
import statistics
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from icmaus import build_alignments, pairwise  # noqa: E402
from icmaus.pairwise import SearchParams, search_hits  # noqa: E402
from workloads import random_kb, random_new  # noqa: E402


def kernel_case(rng, length, alphabet):
    symbols = [f"s{i}" for i in range(alphabet)]
    driver = [rng.choice(symbols) for _ in range(length)]
    target = [rng.choice(symbols) for _ in range(length // 4 or 1)]
    weights = [1.0 + rng.random() for _ in driver]
    return driver, target, weights


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - start)
    return statistics.median(times), out


def bench_kernel(backends, repeat):
    params = SearchParams()
    print("kernel (median seconds per call)")
    print(f"{'length':>8} " + " ".join(f"{b:>10}" for b in backends) + "   speedup")
    for length in (16, 64, 256):
        rng = random.Random(length)
        cases = [kernel_case(rng, length, 12) for _ in range(8)]
        row, results = [], []
        for b in backends:
            t, out = best_of(lambda: [search_hits(d, t, w, params, backend=b) for d, t, w in cases], repeat)
            row.append(t / len(cases))
            results.append(out)
        assert all(r == results[0] for r in results), "backends disagree"
        ratio = row[-1] / row[0] if len(row) > 1 else 1.0
        print(f"{length:>8} " + " ".join(f"{t:>10.5f}" for t in row) + f"   {ratio:6.1f}x")


def bench_engine(backends, repeat):
    print("\nwhole build, random KB (median seconds)")
    print(f"{'n':>8} " + " ".join(f"{b:>10}" for b in backends))
    before = pairwise.get_backend()
    try:
        for n in (16, 32, 64):
            kb, symbols = random_kb(0)
            new = random_new(0, symbols, n)
            row, results = [], []
            for b in backends:
                pairwise.set_backend(b)
                t, out = best_of(lambda: build_alignments(new, kb), repeat)
                row.append(t)
                results.append([(sa.alignment.key(), sa.CD) for sa in out])
            assert all(r == results[0] for r in results), "backends disagree"
            print(f"{n:>8} " + " ".join(f"{t:>10.3f}" for t in row))
    finally:
        pairwise.set_backend(before)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    backends = [b for b in ("c", "python") if b in pairwise.available_backends()]
    if backends == ["python"]:
        print("compiled kernel not built; timing the Python backend only")
    bench_kernel(backends, args.repeat)
    bench_engine(backends, args.repeat)


if __name__ == "__main__":
    main()
