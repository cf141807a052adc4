import os
import subprocess
import sys

import numpy as np
import pytest

from torus_closing import kernels, random_chain

compiled = kernels.compiled_eval_chain()
needs_compiled = pytest.mark.skipif(compiled is None, reason="compiled extension not built")


@needs_compiled
@pytest.mark.parametrize("seed", range(8))
def test_backends_agree(seed):
    rng = np.random.default_rng(seed)
    fmap = random_chain(rng, 12)
    kinds, params = fmap.encoded
    pts = rng.uniform(-2, 3, size=(500, 2))
    a, ja = compiled(kinds, params, pts, True)
    b, jb = kernels.python_eval_chain(kinds, params, pts, True)
    assert np.max(np.abs(a - b)) < 1e-13
    assert np.max(np.abs(ja - jb)) < 1e-12


@needs_compiled
def test_no_jacobian_requested():
    fmap = random_chain(np.random.default_rng(1), 4)
    kinds, params = fmap.encoded
    pts = np.zeros((3, 2))
    out, jac = compiled(kinds, params, pts, False)
    assert jac is None and out.shape == (3, 2)


def test_empty_chain_is_identity():
    pts = np.random.default_rng(0).uniform(0, 1, (10, 2))
    kinds = np.zeros(0, dtype=np.intc)
    params = np.zeros((0, 6))
    out, jac = kernels.eval_chain(kinds, params, pts, True)
    assert np.array_equal(out, pts)
    assert np.array_equal(jac, np.broadcast_to(np.eye(2), (10, 2, 2)))


def test_environment_forces_fallback():
    env = dict(os.environ, TORUS_CLOSING_BACKEND="python")
    out = subprocess.run([sys.executable, "-c", "import torus_closing.kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@needs_compiled
def test_pullback_backends_agree():
    from torus_closing.quadrature import POLAR, _pullback_density

    rng = np.random.default_rng(3)
    fmap = random_chain(rng, 6)
    kinds, params = fmap.encoded
    starts, ends = rng.uniform(0, 1, (40, 2)), rng.uniform(0, 1, (40, 2))
    x, w = np.polynomial.legendre.leggauss(24)
    s, w = 0.5 * (x + 1), 0.5 * w
    origin = np.array([0.3, 0.6])
    fast = kernels.compiled_polar_pullback()(kinds, params, starts, ends, s, w, origin)
    slow = kernels.python_polar_pullback(kinds, params, starts, ends, s, w, origin)
    d = ends - starts
    pts = starts[:, None, :] + s[None, :, None] * d[:, None, :]
    tan = np.broadcast_to(w[None, :, None] * d[:, None, :], pts.shape)
    generic = _pullback_density(fmap, pts, tan, origin, POLAR).sum(axis=1)
    assert np.max(np.abs(fast - slow)) < 1e-14
    assert np.max(np.abs(fast - generic)) < 1e-14
