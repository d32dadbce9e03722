import json
import os
import subprocess
import sys

import pytest

SNIPPET = """
import json
from pfab import NUMBA_ENABLED
from pfab.systems import make_system, PerturbationPoly
from pfab.quadrature import integral_I
from pfab.odeharness import full_return, start_point
s = make_system("s2")
p = PerturbationPoly(1, {(0, 1): 0.5}, {}, {(1, 0): -0.2}, {})
print(json.dumps([NUMBA_ENABLED, integral_I(s, 0.4, (0, 2)),
                  full_return(s, p, 1e-3, start_point(s, 0.4)).x_ret]))
"""


def run(disable):
    env = dict(os.environ)
    env.pop("PFAB_DISABLE_NUMBA", None)
    if disable:
        env["PFAB_DISABLE_NUMBA"] = "1"
    out = subprocess.run([sys.executable, "-c", SNIPPET], env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def test_fallback_matches_numba():
    jit, py = run(False), run(True)
    assert py[0] is False
    assert jit[1:] == pytest.approx(py[1:], rel=1e-13)
