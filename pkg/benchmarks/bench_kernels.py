"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py --nphi 512 --repeat 20
"""

import argparse
import timeit

import numpy as np

from e1lab import _kernels_py, cauchy, rotsym

try:
    from e1lab import _kernels as _kernels_c
except ImportError:
    _kernels_c = None


def cases(n_phi):
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    U = cauchy.exact_state(rotsym.type1(1.0), 0.1, phi).as_array()
    dphi = phi[1]
    w0 = float(rotsym.closed_form_w(rotsym.type1(1.0), 0.05))
    return {
        "lw_step": lambda k: k.lw_step(0.1, -1e-4, phi, dphi, U),
        "upwind_step": lambda k: k.upwind_step(0.1, -1e-4, phi, dphi, U),
        "level_diagnostics": lambda k: k.level_diagnostics(0.1, phi, U),
        "rk4_w (type I to blow-up)": lambda k: k.rk4_w(0.05, w0, 1.0, 1e-3, 1e-6, 1e8),
    }


def best_time(fn, repeat):
    number = 1
    while timeit.timeit(fn, number=number) < 0.05:
        number *= 2
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--nphi", type=int, default=512)
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    if _kernels_c is None:
        print("compiled extension not built; only the numpy fallback is available")
    print(f"{'kernel':28s} {'numpy [us]':>12s} {'cython [us]':>12s} {'speedup':>8s}")
    for name, call in cases(args.nphi).items():
        t_py = best_time(lambda: call(_kernels_py), args.repeat)
        if _kernels_c is None:
            print(f"{name:28s} {t_py * 1e6:12.1f} {'-':>12s} {'-':>8s}")
            continue
        t_c = best_time(lambda: call(_kernels_c), args.repeat)
        print(f"{name:28s} {t_py * 1e6:12.1f} {t_c * 1e6:12.1f} {t_py / t_c:8.1f}")
    t = {}
    for label, mod in (("numpy", _kernels_py), ("cython", _kernels_c)):
        if mod is None:
            continue
        f = cauchy.initial_data(rotsym.type1(1.0))
        saved = cauchy.kernels.lw_step, cauchy.kernels.level_diagnostics
        cauchy.kernels.lw_step, cauchy.kernels.level_diagnostics = mod.lw_step, mod.level_diagnostics
        try:
            t[label] = best_time(lambda: cauchy.march_cauchy(f, 0.1, 0.05, args.nphi), max(1, args.repeat // 2))
        finally:
            cauchy.kernels.lw_step, cauchy.kernels.level_diagnostics = saved
    line = ", ".join(f"{k} {v * 1e3:.1f} ms" for k, v in t.items())
    print(f"full Lax-Wendroff march at {args.nphi} nodes: {line}")
    if len(t) == 2:
        print(f"march speedup {t['numpy'] / t['cython']:.1f}x")


if __name__ == "__main__":
    main()
