"""Numba vs pure-numpy statevector kernels on the generator circuits.

    python3 benchmarks/bench_kernels.py [--batch 64] [--repeat 20]

Both backends are loaded in the same process; the numba column is skipped
when numba is disabled through QSTYLEGAN_DISABLE_NUMBA.
"""
import argparse
import time

import numpy as np

from qstylegan import _kernels
from qstylegan.ansatz import GeneratorConfig, StyleParams, circuit_template, gate_angles
from qstylegan.latent_data import make_rng

CASES = [
    ("simple", 5, 2, "dual"),
    ("bel", 5, 2, "dual"),
    ("bel", 10, 2, "single"),
    ("bel", 15, 2, "dual"),
]


def _time(fn, repeat):
    fn()  # warm-up (and JIT compile)
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--batch", type=int, default=64)
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args(argv)

    backends = [("numpy", _kernels.NUMPY_KERNELS)]
    if _kernels.NUMBA_KERNELS is not None:
        backends.append(("numba", _kernels.NUMBA_KERNELS))

    print(f"batch={args.batch}, best of {args.repeat} (ms)")
    print(f"{'circuit':<22}{'op':<10}" + "".join(f"{name:>10}" for name, _ in backends) + f"{'speedup':>10}")
    rng = make_rng(0, "bench")
    for kind, n_qb, n_l, readout in CASES:
        cfg = GeneratorConfig(kind, n_qb, n_l, readout)
        params = StyleParams.random(cfg, rng)
        noise = rng.standard_normal((args.batch, n_qb))
        tpl = circuit_template(cfg.kind, n_qb, n_l)
        theta = gate_angles(cfg, params, noise)
        upstream = rng.standard_normal((args.batch, cfg.latent_dim))
        ops = {
            "simulate": lambda k: _kernels.simulate(n_qb, tpl.kinds, tpl.ctrls, tpl.tgts, theta, kernels=k),
            "vjp": lambda k: _kernels.vjp(n_qb, tpl.kinds, tpl.ctrls, tpl.tgts, theta, cfg.dual, upstream,
                                          kernels=k),
        }
        for op, fn in ops.items():
            times = [_time(lambda: fn(k), args.repeat) * 1e3 for _, k in backends]
            speed = f"{times[0] / times[-1]:>9.1f}x" if len(times) > 1 else f"{'-':>10}"
            label = f"{kind} {n_qb}qb/{n_l}l/{readout}"
            print(f"{label:<22}{op:<10}" + "".join(f"{t:>10.3f}" for t in times) + speed)


if __name__ == "__main__":
    main()
