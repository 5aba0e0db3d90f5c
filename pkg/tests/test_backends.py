"""The compiled kernels and the pure-Python fallback produce identical streams."""

import os
import subprocess
import sys

import numpy as np
import pytest

from levysim._backend import compiled_available, get_kernels
from levysim.measures import CGMYLevyDensity, CGMYSpec, GaussianDensity, NIGLevyDensity, NIGSpec
from levysim.rng import RandomStream
from levysim.samplers import AIMH, AISF, LocalMH, LocalSF
from levysim.subdivision import alias_build, alias_draw

pytestmark = pytest.mark.skipif(not compiled_available(), reason="compiled kernels not built")

GAUSS = GaussianDensity(0.0, 1.0, 1.0, (-5.0, 5.0))
NIG = NIGLevyDensity(NIGSpec(2 ** 0.5, 0.0, 2 ** 0.5), 0.005)
CGMY = CGMYLevyDensity(CGMYSpec(1.0, 1.0, 1.0, 0.5), 0.005)

FACTORIES = {
    "local-mh": lambda d, b: LocalMH(d, 4.0, 3, backend=b),
    "local-sf": lambda d, b: LocalSF(d, 3, backend=b),
    "aimh": lambda d, b: AIMH(d, 3, n_cells=64, rebuild_period=512, backend=b),
    "aisf": lambda d, b: AISF(d, 3, n_cells=64, rebuild_period=512, backend=b),
}


CASES = [(name, GAUSS) for name in FACTORIES] + [(name, d) for name in ("aimh", "aisf") for d in (NIG, CGMY)]


@pytest.mark.parametrize("name, density", CASES, ids=[f"{n}-{type(d).__name__}" for n, d in CASES])
def test_samplers_bit_identical(name, density):
    make = FACTORIES[name]
    a, b = make(density, "python"), make(density, "cython")
    for n in (1, 999, 5000):
        assert np.array_equal(a.draw(n), b.draw(n))
    assert a.n_evals == b.n_evals
    assert a.n_uniforms == b.n_uniforms


def test_adaptive_state_identical():
    a = AISF(CGMY, 5, n_cells=32, rebuild_period=256, backend="python")
    b = AISF(CGMY, 5, n_cells=32, rebuild_period=256, backend="cython")
    a.draw(20_000)
    b.draw(20_000)
    assert a.lambda_estimate() == b.lambda_estimate()


def test_alias_bit_identical():
    w = RandomStream(7).generator.random(300) ** 3
    ta, tb = alias_build(w, backend="python"), alias_build(w, backend="cython")
    assert np.array_equal(ta.prob, tb.prob) and np.array_equal(ta.alias, tb.alias)
    xa = alias_draw(ta, RandomStream(8).kernel_stream("python"), 10_000)
    xb = alias_draw(tb, RandomStream(8).kernel_stream("cython"), 10_000)
    assert np.array_equal(xa, xb)


def test_get_kernels():
    assert get_kernels("python").BACKEND == "python"
    assert get_kernels("cython").BACKEND == "cython"
    with pytest.raises(ValueError):
        get_kernels("fortran")


def test_env_forces_fallback():
    env = dict(os.environ, LEVYSIM_BACKEND="python")
    out = subprocess.run([sys.executable, "-c", "import levysim._backend as b; print(b.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
