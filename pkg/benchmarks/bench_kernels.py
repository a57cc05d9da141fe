"""Compare the compiled and numpy gate kernels on one Trotter layer.

Usage: python benchmarks/bench_kernels.py [N ...]
"""

import sys
import time

import numpy as np

from curvedchain import kernels
from curvedchain.circuit import ChainSpec, trotter_step
from curvedchain.lattice import build_profile
from curvedchain.statevector import apply_circuit, init_product_state


def best_of(fn, repeat=5):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(sizes):
    impls = kernels.available()
    print(f"backends: {', '.join(impls)} (default {kernels.BACKEND})")
    print(f"{'N':>3} {'gates':>6} " + " ".join(f"{name:>12}" for name in impls) + "   speedup")
    for n in sizes:
        spec = ChainSpec(build_profile("horizon", n, j_star=n / 7), delta=0.5)
        layer = trotter_step(spec)
        state = init_product_state(n, range(2, n + 1, 2))
        results = {}
        out = {}
        for name, impl in impls.items():
            results[name] = best_of(lambda: out.__setitem__(name, apply_circuit(state, layer, impl)))
        ref = next(iter(out.values())).amplitudes
        for psi in out.values():
            assert np.allclose(psi.amplitudes, ref, atol=1e-12)
        row = " ".join(f"{results[name] * 1e3:10.2f}ms" for name in impls)
        speed = ""
        if "cython" in results and "numpy" in results:
            speed = f"{results['numpy'] / results['cython']:8.2f}x"
        print(f"{n:>3} {len(layer.gates):>6} {row} {speed}")


if __name__ == "__main__":
    main([int(a) for a in sys.argv[1:]] or [10, 14, 18, 20])
