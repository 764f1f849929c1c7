"""Time the numba kernels against their pure-numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--m 4096] [--repeat 5] [--json out.json]

Each kernel is run once per backend before timing (this absorbs numba's JIT
compile), then timed with ``timeit``.  Outputs of the two backends are
compared so a speedup is never reported for a kernel that disagrees.
"""
from __future__ import annotations

import argparse
import json
import timeit

import numpy as np

from spherefront import _kernels
from spherefront.curves import make_helix


def _inputs(m: int):
    curve = make_helix(2.0, 0.5, m)
    h = curve.length / m
    half = np.arange(2 * m + 1) * (h / 2)
    g, e, de = curve.derivatives(half, 2)
    basis0 = np.array([[0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]])
    basis0 = _kernels.gram_schmidt(basis0 - (basis0 @ g[0])[:, None] * g[0] - (basis0 @ e[0])[:, None] * e[0])
    g0 = -de[0] / np.linalg.norm(de[0])
    rng = np.random.default_rng(7)
    stacks = rng.standard_normal((m, 64, 2, 8))
    frames = rng.standard_normal((m * 16, 3, 4))
    return {
        "bishop_sweep": lambda: _kernels.bishop_sweep(g, e, de, basis0, h),
        "transport_sweep": lambda: _kernels.transport_sweep(e, de, g0, h),
        "min_singular": lambda: _kernels.min_singular(stacks),
        "gram_schmidt": lambda: _kernels.gram_schmidt(frames),
    }


def run(m: int, repeat: int) -> list[dict]:
    if not _kernels.NUMBA_AVAILABLE:
        raise SystemExit("numba is not installed; nothing to compare")
    kernels = _inputs(m)
    rows = []
    for name, fn in kernels.items():
        times, outs = {}, {}
        for backend in ("numpy", "numba"):
            _kernels.set_backend(backend)
            outs[backend] = np.asarray(fn())  # warm-up / JIT compile
            times[backend] = min(timeit.repeat(fn, number=1, repeat=repeat))
        diff = float(np.max(np.abs(outs["numpy"] - outs["numba"])))
        rows.append({"kernel": name, "numpy_s": times["numpy"], "numba_s": times["numba"],
                     "speedup": times["numpy"] / times["numba"], "max_abs_diff": diff})
    return rows


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, default=4096, help="curve steps / batch size")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", type=str, default=None)
    args = ap.parse_args()
    original = _kernels.get_backend()
    try:
        rows = run(args.m, args.repeat)
    finally:
        _kernels.set_backend(original)
    print(f"{'kernel':<16}{'numpy [s]':>12}{'numba [s]':>12}{'speedup':>10}{'max |diff|':>12}")
    for r in rows:
        print(f"{r['kernel']:<16}{r['numpy_s']:>12.4f}{r['numba_s']:>12.4f}{r['speedup']:>10.1f}{r['max_abs_diff']:>12.1e}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2, sort_keys=True)


if __name__ == "__main__":
    main()
