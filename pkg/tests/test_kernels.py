import json
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gausstri import _accel, kernels
from gausstri.model import angles_from_side_arrays


def vertices(n, dim, seed):
    rng = np.random.default_rng(seed)
    return rng.standard_normal((n, dim)), rng.standard_normal((n, dim)), rng.standard_normal((n, dim))


@pytest.mark.parametrize("dim", [2, 3, 7])
def test_triangle_backends_agree(dim):
    pa, pb, pc = vertices(20_000, dim, dim)
    out_l, obt_l, bad_l = kernels.triangle_kernel_loop(pa, pb, pc)
    out_n, obt_n, bad_n = kernels.triangle_kernel_numpy(pa, pb, pc)
    assert np.allclose(out_l, out_n, rtol=1e-13, atol=1e-15)
    ok = ~bad_l
    assert np.array_equal(bad_l, bad_n)
    # obtuse flags can only differ on a knife edge
    near = np.abs(np.max(out_n[3:], axis=0) - np.pi / 2) < 1e-12
    assert np.array_equal(obt_l[ok & ~near], obt_n[ok & ~near])


def test_kernel_angles_match_model():
    pa, pb, pc = vertices(5000, 2, 1)
    out, _, bad = kernels.triangle_kernel(pa, pb, pc)
    al, be, ga = angles_from_side_arrays(out[0], out[1], out[2])
    assert np.allclose(out[3][~bad], al[~bad], rtol=1e-13)
    assert np.allclose(out[5][~bad], ga[~bad], rtol=1e-13)


def test_degenerate_flagged():
    pa = np.array([[0.0, 0.0], [0.0, 0.0]])
    pb = np.array([[1.0, 0.0], [1.0, 0.0]])
    pc = np.array([[2.0, 0.0], [0.0, 1.0]])
    for fn in (kernels.triangle_kernel_loop, kernels.triangle_kernel_numpy):
        _, _, bad = fn(pa, pb, pc)
        assert bad.tolist() == [True, False]


@given(st.floats(-0.95, 0.95), st.booleans())
@settings(max_examples=20, deadline=None)
def test_corr_rice_backends_agree(rho, opposite):
    rng = np.random.default_rng(0)
    a = rng.uniform(0.01, 5.0, 300)
    b = rng.uniform(0.01, 5.0, 300)
    vl, sl = kernels.corr_rice_kernel_loop(a, b, rho, opposite, 1e-14, 500, 1e6)
    vn, sn = kernels.corr_rice_kernel_numpy(a, b, rho, opposite, 1e-14, 500, 1e6)
    assert np.array_equal(sl, sn)
    good = sl == kernels.OK
    # OK status still allows terms up to 1e6 times the sum, so rounding can
    # reach ~1e6 * eps whenever the terms alternate
    rtol = 1e-9 if opposite != (rho < 0) else 1e-12
    assert np.allclose(vl[good], vn[good], rtol=rtol, atol=1e-300)


def test_backend_reports_dispatch():
    assert _accel.backend() in ("numba", "numpy")
    assert (_accel.backend() == "numba") == _accel.USE_NUMBA


SNIPPET = """
import json
from gausstri import _accel
from gausstri.montecarlo import estimate_probability
from gausstri.model import FamilySpec
e = estimate_probability(FamilySpec("pinned", 2), lambda t: t.obtuse, 20000, 5)
print(json.dumps({"backend": _accel.backend(), "value": e.value, "stderr": e.stderr}))
"""


def run_with_flag(flag):
    env = dict(os.environ)
    env.pop("GAUSSTRI_DISABLE_NUMBA", None)
    if flag is not None:
        env["GAUSSTRI_DISABLE_NUMBA"] = flag
    out = subprocess.run([sys.executable, "-c", SNIPPET], env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def test_env_flag_selects_numpy_path():
    plain = run_with_flag(None)
    off = run_with_flag("1")
    assert off["backend"] == "numpy"
    if _accel.NUMBA_AVAILABLE:
        assert plain["backend"] == "numba"
    assert run_with_flag("0")["backend"] == plain["backend"]
    # same draws either way; sums may differ only in the last bits
    assert off["value"] == pytest.approx(plain["value"], abs=1e-12)
