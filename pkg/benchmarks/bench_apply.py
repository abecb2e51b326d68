"""Benchmark the matrix-free generator application: numba vs numpy vs dense.

Usage: python benchmarks/bench_apply.py [r_max ...]

The numba path is what `fluorospec.model.apply_generator` uses by default;
FLUOROSPEC_NO_NUMBA=1 selects the numpy path. The dense row is the
build-generator-then-matvec alternative, amortized over many applications.
"""
import sys
import time

import numpy as np

import fluorospec as fs
from fluorospec import _kernels
from fluorospec.model import block_hamiltonians


def make_spec(r_max, rng):
    phi = rng.uniform(0.0, 1.0, (r_max, r_max))
    np.fill_diagonal(phi, 0.0)
    cross = rng.uniform(0.0, 0.3, (r_max, r_max))
    np.fill_diagonal(cross, 0.0)
    return fs.ModelSpec(
        space=fs.ConfigSpace(r_max),
        per_state=tuple(fs.PerStateParams(rng.normal(), rng.uniform(0.2, 2.0),
                                          rng.uniform(0.0, 2.0))
                        for _ in range(r_max)),
        rates=fs.FluctuationRates(phi=phi, gamma_cross=cross))


def timeit(fn, *args, repeats=200):
    fn(*args)                      # warm up (JIT compile, caches)
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn(*args)
    return (time.perf_counter() - t0) / repeats


def main(sizes):
    rng = np.random.default_rng(0)
    try:
        import numba

        numba_apply = numba.njit(cache=True)(_kernels._apply_blocks_loops)
    except ImportError:
        numba_apply = None
        print("numba not available; benchmarking numpy and dense only")

    print(f"{'r_max':>6} {'numpy (us)':>12} {'numba (us)':>12} "
          f"{'dense matvec (us)':>18} {'speedup nb/np':>14}")
    for r in sizes:
        spec = make_spec(r, rng)
        x = rng.normal(size=(r, 2, 2)) + 1j * rng.normal(size=(r, 2, 2))
        args = (np.ascontiguousarray(x),
                np.ascontiguousarray(block_hamiltonians(spec)),
                spec.gammas(), spec.effective_decays(),
                np.ascontiguousarray(spec.rates.phi),
                np.ascontiguousarray(spec.rates.gamma_cross),
                np.zeros((0, 2, 2), complex), np.zeros((0, r, r)))
        t_np = timeit(_kernels.apply_blocks_numpy, *args)
        m = fs.build_generator(spec).matrix
        v = fs.BlockState(x).to_vector()
        t_dense = timeit(lambda: m @ v)
        if numba_apply is not None:
            t_nb = timeit(numba_apply, *args)
            ref = _kernels.apply_blocks_numpy(*args)
            assert np.abs(numba_apply(*args) - ref).max() < 1e-12
            print(f"{r:>6} {t_np * 1e6:>12.2f} {t_nb * 1e6:>12.2f} "
                  f"{t_dense * 1e6:>18.2f} {t_np / t_nb:>14.1f}")
        else:
            print(f"{r:>6} {t_np * 1e6:>12.2f} {'-':>12} {t_dense * 1e6:>18.2f}")


if __name__ == "__main__":
    sizes = [int(a) for a in sys.argv[1:]] or [1, 2, 5, 20, 100, 400]
    main(sizes)
