"""Compare the compiled kernels against the NumPy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np
import scipy.sparse as sp

from oscbath import kernels
from oscbath.bath import SpectralModel, generate
from oscbath.dynamics import initial_state
from oscbath.model import CompositeModel, SystemSpec


def make_model(d: int, N: int) -> CompositeModel:
    kappa = np.full((d, d), 0.3) + 0.7 * np.eye(d)
    bath = generate(SpectralModel("uniform-flat", nu_max=2.0, coupling_scale=0.3), N)
    return CompositeModel(SystemSpec(np.ones(d), kappa), bath)


def leapfrog_case(impl, d: int, N: int, nsteps: int):
    m = make_model(d, N)
    s = initial_state(m, np.ones(d), np.zeros(d))
    params = (np.ascontiguousarray(m.K), 1.0 / m.mass, np.array(m.nu), np.array(m.g), m.star, 1e-3, nsteps)

    def run():
        state = [np.array(a, dtype=float) for a in (s.x, s.p, s.y, s.k)]
        impl.leapfrog(*state, *params)

    return run


def power_case(impl, d: int, N: int):
    A = sp.csr_matrix(np.abs(make_model(d, N).hamiltonian()))
    args = (A.indptr.astype(np.int32), A.indices.astype(np.int32), A.data,
            np.ones(A.shape[0]), 0.5 * A.sum(axis=1).max(), 1e-14, 10**6)
    return lambda: impl.power_iteration(*args)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    impls = {"python": kernels.python_impl}
    if kernels.compiled_impl is not None:
        impls["cython"] = kernels.compiled_impl
    else:
        print("compiled extension not built; timing the fallback only")

    cases = [
        ("leapfrog d=1 N=8 steps=10000", lambda impl: leapfrog_case(impl, 1, 8, 10_000)),
        ("leapfrog d=3 N=64 steps=2000", lambda impl: leapfrog_case(impl, 3, 64, 2_000)),
        ("power_iteration d=2 N=200", lambda impl: power_case(impl, 2, 200)),
        ("power_iteration d=3 N=500", lambda impl: power_case(impl, 3, 500)),
    ]
    print(f"{'case':34s}" + "".join(f"{name:>12s}" for name in impls) + "     speedup")
    for label, factory in cases:
        times = {}
        for name, impl in impls.items():
            fn = factory(impl)
            times[name] = min(timeit.repeat(fn, number=1, repeat=args.repeat))
        row = f"{label:34s}" + "".join(f"{times[n] * 1e3:10.2f}ms" for n in impls)
        if "cython" in times:
            row += f"  {times['python'] / times['cython']:8.1f}x"
        print(row)


if __name__ == "__main__":
    main()
