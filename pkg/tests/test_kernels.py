import numpy as np
import pytest

from helmbie import _kernels
from helmbie._kernels import _pykernels

ck = pytest.importorskip("helmbie._kernels._ckernels")


def test_backend_is_compiled_by_default():
    assert _kernels.BACKEND in ("cython", "python")


@pytest.mark.parametrize("nu,t0", [(0.0, 1.0), (1.0, 0.5), (0.5, 0.7978845608028654), (-0.5, 1.1283791670955126)])
def test_j_sharp_backends_agree(nu, t0):
    z = np.array([0, 1, 25, 400, 899, 30 + 400j, -20 + 5j], dtype=complex)
    a = ck.j_sharp_series(nu, t0, z, 1e-15, 200)
    b = _pykernels.j_sharp_series(nu, t0, z, 1e-15, 200)
    assert np.array_equal(a[0], b[0])
    assert np.array_equal(a[2], b[2])


@pytest.mark.parametrize("nu", [0, 1, 2])
def test_n_sharp_backends_agree(nu):
    z = np.array([0, 1, 25, 400, 899, 30 + 400j], dtype=complex)
    a = ck.n_sharp_series(nu, z, 1e-15, 200)
    b = _pykernels.n_sharp_series(nu, z, 1e-15, 200)
    assert np.allclose(a[0], b[0], rtol=1e-15, atol=0)


def test_layer_sums_backends_agree(rng):
    tgt = np.ascontiguousarray(rng.uniform(-0.5, 0.5, (7, 2)))
    th = np.linspace(0, 2 * np.pi, 16, endpoint=False)
    src = np.ascontiguousarray(np.stack([np.cos(th), np.sin(th)], 1))
    w = np.full(16, np.pi / 8)
    for kind in (0, 1):
        for grad in (0, 1):
            a = ck.laplace_layer_sums(tgt, src, src, w, kind, grad)
            b = _pykernels.laplace_layer_sums(tgt, src, src, w, kind, grad)
            assert np.allclose(a, b, rtol=1e-14, atol=1e-15)


def test_double_double_beats_plain_cancellation():
    # J0(30): plain double summation loses ~e^30 / 2^53 relative accuracy
    val, _, ok = ck.j_sharp_series(0.0, 1.0, np.array([900.0 + 0j]), 1e-15, 200)
    assert ok[0]
    assert abs(val[0].real - (-0.0863679835810402113359623244961)) < 1e-16


def test_pure_python_switch(monkeypatch):
    import importlib
    monkeypatch.setenv("HELMBIE_PURE_PYTHON", "1")
    mod = importlib.reload(_kernels)
    try:
        assert mod.BACKEND == "python"
    finally:
        monkeypatch.delenv("HELMBIE_PURE_PYTHON")
        importlib.reload(_kernels)
