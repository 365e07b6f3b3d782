import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helmbie import fields
from helmbie.distcalc import (DensityPair, SchauderMinusOne, build_dtn, dist_normal_derivative,
                              e_sharp_pair, lower, pair_density)
from helmbie.geometry import area_quadrature, make_boundary


@pytest.fixture(scope="module")
def disk():
    b = make_boundary("circle", 128)
    return b, build_dtn(b), area_quadrature(b, 16, 128)


def test_dtn_examples(disk):
    b, dtn, _ = disk
    t = b.t
    assert np.max(np.abs(dtn @ np.cos(t) - np.cos(t))) < 1e-10
    assert np.max(np.abs(dtn @ np.ones(128))) < 1e-10
    e = make_boundary("ellipse", 128, a=1.0, b=0.6)
    de = build_dtn(e)
    assert abs(np.sum(e.weights * (de @ e.points[:, 0]))) < 1e-8


def test_dtn_flux_free_for_all_data(rng):
    b = make_boundary("kite", 128)
    dtn = build_dtn(b)
    col = b.weights @ dtn.matrix
    assert np.max(np.abs(col)) < 1e-8


def test_dtn_ellipse_reproduces_linear_functions():
    e = make_boundary("ellipse", 128, a=1.0, b=0.6)
    de = build_dtn(e)
    for c in ((1.0, 0.0), (0.3, -2.0)):
        u = fields.linear(c)
        assert np.max(np.abs(de @ u.value(e.points) - u.normal_derivative(e.points, e.normals))) < 1e-10


def test_e_sharp_examples(disk):
    b, _, aq = disk
    x = aq.points
    f = SchauderMinusOne.from_functions(b, aq, f0=lambda p: p[:, 0] ** 2)
    got = e_sharp_pair(f, np.ones(len(x)), np.zeros((len(x), 2)), np.ones(b.n_total), b, aq)
    assert got == pytest.approx(np.pi / 4, rel=1e-12)
    f1 = SchauderMinusOne.from_functions(b, aq, f1=lambda p: np.ones(len(p)))
    grad = np.tile([1.0, 0.0], (len(x), 1))
    assert abs(e_sharp_pair(f1, x[:, 0], grad, b.points[:, 0], b, aq)) < 1e-12
    with pytest.raises(ValueError):
        e_sharp_pair(f1, x[:5, 0], grad, b.points[:, 0], b, aq)


def test_e_sharp_matches_classical_divergence(disk):
    b, _, aq = disk
    # f = f0 + d1 f1 + d2 f2 with polynomial f1 = x y^2, f2 = x^3: classical f = f0 + y^2 + 0
    f = SchauderMinusOne.from_functions(b, aq, f0=lambda p: p[:, 0], f1=lambda p: p[:, 0] * p[:, 1] ** 2,
                                        f2=lambda p: p[:, 0] ** 3)
    v = fields.harmonic_polynomial([0.4, 1.0], [0.0, 0.5], 0.2)
    q = aq.points
    got = e_sharp_pair(f, v.value(q), v.gradient(q), v.value(b.points), b, aq)
    classical = aq.integrate((q[:, 0] + q[:, 1] ** 2) * v.value(q))
    assert got == pytest.approx(classical, rel=1e-11)


def test_pair_density_examples(disk):
    b, dtn, _ = disk
    t = b.t
    w = b.weights
    mu = np.sin(t) ** 2
    assert pair_density(DensityPair.classical(mu), np.cos(t), dtn) == pytest.approx(np.sum(w * mu * np.cos(t)))
    assert abs(pair_density(DensityPair(np.zeros(128), np.ones(128)), np.cos(t), dtn)) < 1e-12
    got = pair_density(DensityPair(np.zeros(128), np.cos(t)), np.cos(t), dtn)
    assert got == pytest.approx(np.pi, rel=1e-10)


def test_lowering_reproduces_pairing(disk, rng):
    b, dtn, _ = disk
    g = DensityPair(rng.normal(size=128), rng.normal(size=128))
    gn = lower(g, dtn)
    for _ in range(3):
        v = rng.normal(size=128)
        assert np.sum(b.weights * gn * v) == pytest.approx(pair_density(g, v, dtn), rel=1e-12, abs=1e-12)


def test_dist_normal_derivative_examples(disk):
    b, dtn, aq = disk
    t = b.t
    u = fields.linear((1.0, 0.0))
    zero = SchauderMinusOne.zero(b, aq)
    assert dist_normal_derivative(u.value(b.points), zero, np.cos(t), dtn, aq) == pytest.approx(np.pi, rel=1e-10)
    for v in (np.cos(t), np.sin(3 * t) + 0.2):
        assert abs(dist_normal_derivative(np.ones(128), zero, v, dtn, aq)) < 1e-10


def test_plane_wave_normal_derivative(disk):
    b, dtn, aq = disk
    for k, d in ((1.0, (0.6, 0.8)), (3.0, (1.0, 0.0))):
        u = fields.plane_wave(k, d)
        lap = SchauderMinusOne.from_functions(b, aq, f0=u.laplacian)
        v = np.exp(np.sin(b.t))
        got = dist_normal_derivative(u.value(b.points), lap, v, dtn, aq)
        ref = np.sum(b.weights * u.normal_derivative(b.points, b.normals) * v)
        assert abs(got - ref) < 1e-10


def test_density_pair_validation():
    with pytest.raises(ValueError):
        DensityPair(np.ones(3), np.ones(4))
    with pytest.raises(ValueError):
        DensityPair(np.array([np.nan]), np.zeros(1))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_dtn_symmetric_and_positive(seed):
    dtn = _dtn_kite128()
    b = dtn.boundary
    rng = np.random.default_rng(seed)
    u, v = rng.normal(size=128), rng.normal(size=128)
    w = b.weights
    assert abs(np.sum(w * u * (dtn @ v)) - np.sum(w * v * (dtn @ u))) < 1e-8
    assert np.sum(w * v * (dtn @ v)) >= -1e-8


_CACHE = {}


def _dtn_kite128():
    if "k" not in _CACHE:
        _CACHE["k"] = build_dtn(make_boundary("kite", 128))
    return _CACHE["k"]


def test_dtn_asymmetry_decays_with_refinement():
    gaps = []
    for n in (64, 128):
        b = make_boundary("kite", n)
        a = b.weights[:, None] * build_dtn(b).matrix
        gaps.append(np.max(np.abs(a - a.T)) / np.max(np.abs(a)))
    assert gaps[1] < 1e-3 * gaps[0]
