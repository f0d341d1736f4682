"""Benchmark the compiled kernels against the pure-NumPy fallback.

Times each kernel on representative workloads (best of several repeats) and
an end-to-end squeezing sweep through the public API in a subprocess per
backend, then prints a speedup table.  Run as

    python benchmarks/bench_backends.py [--repeats N]
"""

import argparse
import subprocess
import sys
import time

import numpy as np

from qswitch import _kernels_py

try:
    from qswitch import _kernels
except ImportError:
    _kernels = None


def best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def random_hermitian_stack(rng, m, d):
    g = rng.normal(size=(m, d, d)) + 1j * rng.normal(size=(m, d, d))
    return 0.5 * (g + g.conj().transpose(0, 2, 1))


def kernel_cases(rng):
    herm4 = random_hermitian_stack(rng, 2000, 4)
    herm2 = random_hermitian_stack(rng, 20000, 2)
    states = random_hermitian_stack(rng, 2000, 4)
    states = states @ states.conj().transpose(0, 2, 1)
    states /= np.einsum("mii->m", states).real[:, None, None]
    ops = (rng.normal(size=(4, 4, 4)) + 1j * rng.normal(size=(4, 4, 4))) / 4.0
    raw = rng.random((200000, 4))
    probs = raw / raw.sum(axis=1, keepdims=True)
    uniforms = rng.random(200000)
    collusion_block = rng.random((100000, 39))
    return [
        ("eigvalsh_batch 2000x4x4", lambda k: k.eigvalsh_batch(herm4)),
        ("eigvalsh_batch 20000x2x2", lambda k: k.eigvalsh_batch(herm2)),
        ("kraus_apply_batch 2000x4x4", lambda k: k.kraus_apply_batch(states, ops)),
        ("categorical_rows 200000x4", lambda k: k.categorical_rows(probs, uniforms)),
        ("collusion_counts n=20 x100000", lambda k: k.collusion_counts(collusion_block, 20)),
    ]


_SWEEP_SNIPPET = """
import time
from qswitch import channels, information
from qswitch._backend import backend_name
psi = information.psi_for_key_information(1.0)
start = time.perf_counter()
for i in range(25):
    r = -0.5 + i / 24.0
    cfg = channels.BathConfig(r=r, T=0.1, t=0.5)
    ks = channels.sgad_kraus(channels.sgad_params_from_bath(cfg))
    information.holevo(information.signal_ensemble(psi, channel=ks))
print(backend_name(), time.perf_counter() - start)
"""


def sweep_times():
    """(python_seconds, compiled_seconds or None) for the end-to-end sweep."""
    results = {}
    for backend in ("python", "compiled"):
        proc = subprocess.run(
            [sys.executable, "-c", _SWEEP_SNIPPET],
            capture_output=True,
            text=True,
            env={"QSWITCH_BACKEND": backend, "PATH": "/usr/bin:/bin"},
        )
        if proc.returncode != 0:
            results[backend] = None
            continue
        name, seconds = proc.stdout.split()
        assert name == backend
        results[backend] = float(seconds)
    return results["python"], results["compiled"]


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args(argv)

    rng = np.random.default_rng(2024)
    rows = []
    for name, call in kernel_cases(rng):
        pure = best_of(lambda: call(_kernels_py), args.repeats)
        if _kernels is None:
            rows.append((name, pure, None))
        else:
            comp = best_of(lambda: call(_kernels), args.repeats)
            rows.append((name, pure, comp))

    py_sweep, comp_sweep = sweep_times()
    rows.append(("squeezing sweep, 25 baths", py_sweep, comp_sweep))

    width = max(len(name) for name, _, _ in rows)
    print(f"{'case':<{width}}  {'pure':>10}  {'compiled':>10}  {'speedup':>8}")
    for name, pure, comp in rows:
        pure_ms = "?" if pure is None else f"{1e3 * pure:8.2f}ms"
        if comp is None:
            print(f"{name:<{width}}  {pure_ms:>10}  {'n/a':>10}  {'n/a':>8}")
        else:
            comp_ms = f"{1e3 * comp:8.2f}ms"
            print(
                f"{name:<{width}}  {pure_ms:>10}  {comp_ms:>10}  "
                f"{pure / comp:7.1f}x"
            )
    if _kernels is None:
        print("\ncompiled extension not importable; kernel rows show the fallback only")
    return 0


if __name__ == "__main__":
    sys.exit(main())
