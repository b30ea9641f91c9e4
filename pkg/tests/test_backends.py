import os
import subprocess
import sys

import numpy as np
import pytest

from pathlab import ActionModel, Grid, PotentialSpec, parametrix_kernel
from pathlab._accel import ENV_FLAG, HAVE_NUMBA, backend, set_backend
from pathlab._kernels import line_integrals, shoot_pairs

POTENTIALS = [
    PotentialSpec.harmonic(1.0),
    PotentialSpec.parse("harmonic(1)+cosine(0.3,1,0)"),
    PotentialSpec.parse("lorentzian_bump(1,2)+gaussian_bump(0.5,1.5)"),
]

needs_numba = pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")


@pytest.fixture
def numpy_backend():
    prev = set_backend("numpy")
    yield
    set_backend(prev)


def _both(f):
    out = {}
    for b in ("numba", "numpy"):
        prev = set_backend(b)
        try:
            out[b] = f()
        finally:
            set_backend(prev)
    return out


@needs_numba
@pytest.mark.parametrize("V", POTENTIALS, ids=str)
def test_shoot_pairs_agree(V, rng):
    xs, ys = rng.uniform(-4, 4, 400), rng.uniform(-4, 4, 400)
    res = _both(lambda: shoot_pairs(xs, ys, 0.2, V.packed))
    assert np.array_equal(res["numba"][1], res["numpy"][1])
    assert np.max(np.abs(res["numba"][0] - res["numpy"][0])) < 1e-12


@needs_numba
@pytest.mark.parametrize("V", POTENTIALS, ids=str)
def test_line_integrals_agree(V, rng):
    xs, ys = rng.uniform(-4, 4, 300), rng.uniform(-4, 4, 300)
    res = _both(lambda: line_integrals(xs, ys, V.packed, 3))
    assert np.max(np.abs(res["numba"] - res["numpy"])) < 1e-12


@needs_numba
def test_kernels_agree():
    g = Grid(128, -6, 6)
    V = POTENTIALS[1]
    for kind in ("classical_bvp", "taylor3"):
        res = _both(lambda: parametrix_kernel(ActionModel(kind, V), 0.2, 0.0, g).entries)
        assert np.max(np.abs(res["numba"] - res["numpy"])) < 1e-10


def test_caustic_status(numpy_backend):
    _, status = shoot_pairs(np.array([1.0]), np.array([0.5]), np.pi, PotentialSpec.harmonic(1.0).packed)
    assert status[0] != 0


def test_env_flag_selects_numpy():
    env = dict(os.environ, **{ENV_FLAG: "1"})
    out = subprocess.run(
        [sys.executable, "-c", "from pathlab._accel import backend; print(backend())"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "numpy"


def test_set_backend_validates():
    with pytest.raises(ValueError):
        set_backend("cuda")
    assert backend() in ("numba", "numpy")
