"""Time the numba and pure-numpy kernels on the same inputs.

    python benchmarks/bench_kernels.py [--repeat 3]

Both backends are called directly, so one run compares them regardless of
CASIMIRKIT_NUMBA.  The first numba call includes compilation (or a cache
load) and is reported separately.
"""
import argparse
import time

import numpy as np

from casimirkit import kernels as K
from casimirkit import lifshitz as L
from casimirkit.materials import au_preset
from casimirkit.numerics import graded_panels


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def box_case():
    # finest rung of the default ladder for a 1 um EM cube: ~1e6 modes
    sides = (1000.0, 1000.0, 1000.0)
    d = 1000.0 / 32
    return lambda numba: K.box_mode_sum(sides, True, K.REGULATED, d, 50.0, use_numba=numba)


def lifshitz_case():
    cfg = L.PlatesConfig(160.0, 300.0, au_preset("drude"))
    zeta = cfg.zeta_step * np.arange(1, 2001)
    eps_t, free, core = L._permittivities(cfg, zeta)
    t, w = graded_panels(zeta, n=20)
    return lambda numba: K.lifshitz_terms(zeta, eps_t, free, core, 1.0, 0.0, False, t, w, use_numba=numba)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    print(f"{'kernel':<16}{'numpy s':>12}{'numba s':>12}{'first numba s':>16}{'speed-up':>10}{'max rel diff':>14}")
    for name, case in (("box_mode_sum", box_case()), ("lifshitz_terms", lifshitz_case())):
        t0 = time.perf_counter()
        case(True)
        first = time.perf_counter() - t0
        t_nb, out_nb = _best(lambda: case(True), args.repeat)
        t_np, out_np = _best(lambda: case(False), args.repeat)
        a, b = np.atleast_1d(out_nb), np.atleast_1d(out_np)
        diff = float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))
        print(f"{name:<16}{t_np:>12.4f}{t_nb:>12.4f}{first:>16.3f}{t_np / t_nb:>10.1f}{diff:>14.1e}")


if __name__ == "__main__":
    main()
