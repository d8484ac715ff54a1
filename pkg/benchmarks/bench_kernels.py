"""Time the numba and numpy kernel twins on realistic sweep batches.

    python benchmarks/bench_kernels.py [--points 4096] [--repeat 5]

Both implementations are called directly, so one process covers both
backends. Results are checked for agreement before timings are printed.
"""

import argparse
import time

import numpy as np

from wgqed import _kernels
from wgqed.geometry import DriveSpec, Geometry, RateSet, build_effective_model
from wgqed.lindblad import liouvillian, liouvillian_batch, model_coefficients, steady_state, superoperator_basis, trace_row
from wgqed.operators import vec


def _models(n_qubits, points):
    geom = Geometry(tuple(18.6 * k for k in range(n_qubits)), 18.6, 6.4)
    rates = RateSet.uniform(n_qubits, 26.0, 0.18, 0.2)
    freqs = [6.4 + 0.001 * k for k in range(n_qubits)]
    drives = np.linspace(6.3, 6.5, points)
    return [build_effective_model(freqs, geom, rates, DriveSpec(f, 7.5)) for f in drives]


def _best(fn, repeat):
    fn()  # warm-up, includes JIT compilation
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench(n_qubits, points, repeat):
    models = _models(n_qubits, points)
    coeffs = np.array([model_coefficients(m) for m in models])
    basis = superoperator_basis(n_qubits)
    Ls = liouvillian_batch(models)
    row = trace_row(models[0].dim)

    L = liouvillian(models[points // 2])
    rho = steady_state(L)
    Lp = L - np.abs(L).max() * np.outer(vec(rho), row)
    seed = vec(np.diag(np.arange(models[0].dim, dtype=complex)))
    weights = np.conj(seed)
    offsets = np.linspace(-100, 100, points)

    cases = {
        "assemble": (_kernels.assemble_numpy, _kernels.assemble_numba, (coeffs, basis)),
        "steady_state": (_kernels.steady_state_numpy, _kernels.steady_state_numba, (Ls, row)),
        "resolvent": (_kernels.resolvent_numpy, _kernels.resolvent_numba, (Lp, seed, weights, offsets)),
    }
    for name, (slow, fast, args) in cases.items():
        a, b = slow(*args), fast(*args)
        err = np.abs(a - b).max() / max(np.abs(a).max(), 1e-300)
        t_np = _best(lambda: slow(*args), repeat)
        t_nb = _best(lambda: fast(*args), repeat)
        print(
            f"N={n_qubits} {name:<13} points={points:<6} numpy {t_np * 1e3:8.2f} ms  "
            f"numba {t_nb * 1e3:8.2f} ms  speedup {t_np / t_nb:5.2f}x  rel.diff {err:.1e}"
        )


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=4096)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--qubits", type=int, nargs="+", default=[1, 2, 3])
    args = ap.parse_args()
    if _kernels.assemble_numba is None:
        raise SystemExit("numba is not importable; nothing to compare")
    for n in args.qubits:
        bench(n, args.points if n < 3 else max(1, args.points // 8), args.repeat)


if __name__ == "__main__":
    main()
