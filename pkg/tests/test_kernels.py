import os
import subprocess
import sys

import numpy as np
import pytest

from levinson2d import _kernels
from levinson2d import potential as pot
from levinson2d import radial


def _inputs(n=3000, batch=7):
    p = pot.truncated_gaussian(-25.0, 0.5, 1.5)
    edges, counts = radial._segment_counts(p, 1.0, 5.0, 1.0, radial.DEFAULT_CONTROL, 1.5)
    g = radial._grid(p, edges, counts, 1)
    E = np.linspace(-20.0, 5.0, batch)
    lam = np.linspace(0.2, 1.0, batch)
    return g, E, lam


@pytest.mark.skipif(_kernels.integrate_numba is None, reason="numba unavailable")
def test_numba_matches_numpy():
    g, E, lam = _inputs()
    args = (g.h, g.Pa, g.Pm, g.Pb, g.Qa, g.Qm, g.Qb, 1.0, E, lam, np.ones_like(E), np.ones_like(E))
    a = _kernels.integrate_numpy(*args)
    b = _kernels.integrate_numba(*args)
    for x, y in zip(a, b):
        assert np.allclose(x, y, rtol=1e-12, atol=0)
    assert np.array_equal(a[2], b[2])


def test_backend_flag_selects_numpy():
    env = dict(os.environ, LEVINSON2D_NUMBA="0")
    out = subprocess.run(
        [sys.executable, "-c", "import levinson2d; print(levinson2d.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "numpy"


def test_backend_reported():
    assert _kernels.BACKEND in {"numba", "numpy"}


def test_node_count_of_free_oscillator():
    # lam = 0, E > 0: w oscillates, nodes match the lifted angle's integer part
    p = pot.square_well(1.0, r0=10.0)
    s = radial.integrate_interior(p, 0.0, 4.0, lam=0.0)
    # R = sqrt(r) J_0(2r): zeros of J_0 below 20
    import oracles

    assert s.nodes == len(oracles.j_zeros(0, 20.0))
