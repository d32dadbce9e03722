"""Compare the numba kernels with the pure-Python fallback.

Each mode runs in a fresh interpreter because the fallback is chosen when
``pfab._accel`` is imported (``PFAB_DISABLE_NUMBA=1``).  Two workloads:

* quadrature -- basis integrals I_{i,j}(h) on a grid of h for all systems;
* ode        -- full return maps of a perturbed S2 flow.

The numba timing excludes compilation (one warm-up call first).  Results are
checked to agree between the modes.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--json out.json]
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
from timeit import default_timer as timer

WORKER = r"""
import json, sys
from timeit import default_timer as timer
import numpy as np
from pfab import _accel
from pfab.systems import make_system, PerturbationPoly
from pfab.quadrature import integral_I
from pfab.odeharness import full_return, start_point

repeat = int(sys.argv[1])

def quad():
    out = []
    for name, hs in (("s1", np.geomspace(0.05, 20, 12)), ("s2", np.linspace(0.05, 0.95, 12)),
                     ("r19", np.linspace(0.02, 1.0, 12)), ("r20", np.linspace(0.02, 1.0, 12))):
        s = make_system(name)
        for h in hs:
            for idx in ((1, 1), (0, 2), (2, 0)):
                if name in ("r19", "r20"):
                    idx = (idx[0] + 0.5, idx[1]) if idx[1] else idx
                out.append(integral_I(s, float(h), idx))
    return out

s2 = make_system("s2")
pert = PerturbationPoly.from_json_dict({"n": 2, "a+": {"0,1": 0.3, "1,0": -0.2}, "b+": {"0,0": 0.1, "1,1": 0.4},
                                        "b-": {"2,0": -0.3}})
x0s = [start_point(s2, h) for h in np.linspace(0.05, 0.9, 8)]

def ode():
    return [full_return(s2, pert, 1e-3, x, rtol=1e-10).x_ret for x in x0s]

res = {"numba": _accel.NUMBA_ENABLED}
for name, fn in (("quadrature", quad), ("ode", ode)):
    t0 = timer(); vals = fn(); res[name + "_first"] = timer() - t0
    best = float("inf")
    for _ in range(repeat):
        t0 = timer(); vals = fn(); best = min(best, timer() - t0)
    res[name] = best
    res[name + "_values"] = [float(v) for v in vals]
print(json.dumps(res))
"""


def run_mode(disable: bool, repeat: int) -> dict:
    env = dict(os.environ)
    if disable:
        env["PFAB_DISABLE_NUMBA"] = "1"
    else:
        env.pop("PFAB_DISABLE_NUMBA", None)
    t0 = timer()
    proc = subprocess.run([sys.executable, "-c", WORKER, str(repeat)], env=env, capture_output=True,
                          text=True, check=True)
    out = json.loads(proc.stdout.strip().splitlines()[-1])
    out["wall"] = timer() - t0
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", default=None)
    args = ap.parse_args(argv)

    jit = run_mode(False, args.repeat)
    py = run_mode(True, args.repeat)
    if not jit["numba"]:
        print("numba is not available; both runs used the fallback", file=sys.stderr)

    rows = []
    for name in ("quadrature", "ode"):
        a, b = jit[name + "_values"], py[name + "_values"]
        dev = max(abs(x - y) / max(1.0, abs(y)) for x, y in zip(a, b))
        rows.append({"workload": name, "numba_s": jit[name], "numba_first_s": jit[name + "_first"],
                     "python_s": py[name], "speedup": py[name] / jit[name], "max_rel_diff": dev})

    print(f"{'workload':<12}{'numba [s]':>12}{'(+compile)':>12}{'python [s]':>12}{'speedup':>10}{'max diff':>11}")
    for r in rows:
        print(f"{r['workload']:<12}{r['numba_s']:>12.4f}{r['numba_first_s']:>12.3f}{r['python_s']:>12.4f}"
              f"{r['speedup']:>10.1f}{r['max_rel_diff']:>11.1e}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2, sort_keys=True)


if __name__ == "__main__":
    main()
