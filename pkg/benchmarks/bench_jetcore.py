"""Compare the compiled Cauchy-product kernel with the numpy fallback.

    python3 benchmarks/bench_jetcore.py [--repeat N]

Times the raw kernel on random jets and a full 5d Weyl evaluation of the
twistor metric, once per backend (the fallback runs in a subprocess with
PKETWISTOR_PURE_PYTHON=1).
"""

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np


def measure(repeat: int) -> dict:
    from pketwistor import _kernels, catalog, twistor
    from pketwistor.jetcalc import space

    out = {"backend": _kernels.BACKEND}
    rng = np.random.default_rng(0)
    for dim, order in ((4, 3), (5, 3), (5, 5)):
        sp = space(dim, order)
        a = rng.standard_normal((256, sp.size))
        b = rng.standard_normal((256, sp.size))
        t = min(timeit.repeat(lambda: _kernels.mul_flat(a, b, sp), number=20, repeat=repeat)) / 20
        out[f"mul_flat d={dim} k={order} (256 jets)"] = t

    _, cof = catalog.accepted_samples(catalog.MetricSpec("typeII-YM"), 1, seed=0)[0]

    def weyl():
        tc = twistor.build_twistor_coframe(cof, 0.8)
        twistor.cartan_quartic_from_weyl5(tc)

    out["twistor Cartan quartic"] = min(timeit.repeat(weyl, number=3, repeat=repeat)) / 3
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()
    if args.child:
        print(json.dumps(measure(args.repeat)))
        return
    runs = []
    for pure in ("0", "1"):
        env = dict(os.environ, PKETWISTOR_PURE_PYTHON=pure)
        res = subprocess.run([sys.executable, __file__, "--child", "--repeat", str(args.repeat)],
                             env=env, capture_output=True, text=True, check=True)
        runs.append(json.loads(res.stdout))
    fast, slow = runs
    print(f"{'case':42s} {fast['backend']:>12s} {slow['backend']:>12s} {'speedup':>8s}")
    for key in fast:
        if key == "backend":
            continue
        print(f"{key:42s} {fast[key] * 1e3:10.3f}ms {slow[key] * 1e3:10.3f}ms {slow[key] / fast[key]:7.2f}x")


if __name__ == "__main__":
    main()
