import numpy as np
import pytest

from helmbie import fields
from helmbie.distcalc import DensityPair, build_dtn
from helmbie.errors import IncompatibleDataError, NearBoundaryError, NotAtDipError
from helmbie.geometry import area_quadrature, make_boundary
from helmbie.layerpot import assemble
from helmbie.solver import (NeumannProblem, eigen_scan, eigenfunction_checks, green_identity_residual,
                            neumann_eigenfunction, radiation_check, refine_dip, second_green_residual,
                            sigma_min, solve_neumann)
from helmbie.specfun import FundamentalSolution

J11P = 1.84118378134065930
J01 = 2.40482555769577277


def _classical(u, b):
    return DensityPair.classical(u.normal_derivative(b.points, b.normals))


@pytest.fixture(scope="module")
def circle256():
    return make_boundary("circle", 256)


def test_exterior_point_source_example(circle256):
    u = fields.point_source(1.0, (0.2, 0.0))
    rep = solve_neumann(NeumannProblem("exterior", 1.0, circle256, _classical(u, circle256)))
    x = np.array([[3.0, 1.0]])
    assert abs(rep.field.value(x)[0] - u.value(x)[0]) < 1e-8
    assert rep.residual_boundary < 1e-10
    assert not rep.least_squares


def test_interior_plane_wave_example(circle256):
    u = fields.plane_wave(1.0, (0.6, 0.8))
    rep = solve_neumann(NeumannProblem("interior", 1.0, circle256, _classical(u, circle256)))
    x = np.array([[0.0, 0.0], [0.3, -0.2], [-0.5, 0.4]])
    assert np.max(np.abs(rep.field.value(x) - u.value(x))) < 1e-8


def test_zero_data_gives_zero_field(circle64):
    rep = solve_neumann(NeumannProblem("exterior", 1.0, circle64, DensityPair.classical(np.zeros(64))))
    assert np.all(rep.density == 0)
    assert np.all(rep.field.value([[2.0, 0.0]]) == 0)


def test_complex_wavenumber_exterior(kite128):
    k = 1.5 + 0.4j
    u = fields.point_source(k, (0.1, 0.05))
    rep = solve_neumann(NeumannProblem("exterior", k, kite128, _classical(u, kite128)))
    x = np.array([[3.0, 1.0], [-2.0, 2.5]])
    assert np.max(np.abs(rep.field.value(x) - u.value(x))) < 1e-8


def test_problem_validation(circle64):
    g = DensityPair.classical(np.zeros(64))
    with pytest.raises(ValueError):
        NeumannProblem("inside", 1.0, circle64, g)
    with pytest.raises(ValueError):
        NeumannProblem("interior", -1.0, circle64, g)
    with pytest.raises(ValueError):
        NeumannProblem("interior", 1.0 - 0.1j, circle64, g)
    with pytest.raises(ValueError):
        NeumannProblem("interior", 1.0, circle64, DensityPair.classical(np.zeros(10)))


def test_laplace_analogue_has_constant_cokernel(circle64):
    wt = assemble("Wt_adjoint_double", FundamentalSolution.laplace(2), circle64).matrix
    sv = np.linalg.svd(-0.5 * np.eye(64) + wt, compute_uv=False)
    assert sv[-1] < 1e-12 * sv[0]


def test_incompatible_data_at_dip():
    b = make_boundary("circle", 64)
    k = refine_dip(b, "interior", J11P - 0.01, J11P + 0.01)[0]
    # cos(theta) is the cokernel direction at j'_{1,1}
    with pytest.raises(IncompatibleDataError):
        solve_neumann(NeumannProblem("interior", k, b, DensityPair.classical(np.cos(b.t))))
    rep = solve_neumann(NeumannProblem("interior", k, b, DensityPair.classical(np.cos(2 * b.t))))
    assert rep.least_squares
    assert rep.compatibility_defect < 1e-6


def test_scan_examples(circle64):
    res = eigen_scan(circle64, "interior", 1.5, 2.2, 29)
    assert any(abs(k - J11P) < 1e-3 for k, _ in res.dips)
    res = eigen_scan(circle64, "exterior", 2.0, 2.8, 33)
    assert any(abs(k - J01) < 1e-3 for k, _ in res.dips)
    assert len(res.rows()) == 33


def test_sigma_min_is_not_small_off_dip(circle64):
    smin, smax = sigma_min(circle64, 1.0, "interior")
    assert smin > 1e-3 * smax


def test_eigenfunction_example():
    b = make_boundary("circle", 64)
    k = refine_dip(b, "interior", J11P - 0.01, J11P + 0.01)[0]
    ef = neumann_eigenfunction(b, k, "interior")
    assert ef.multiplicity == 2
    # trace lies in span{cos, sin}
    basis = np.stack([np.cos(b.t), np.sin(b.t)], 1)
    coef, *_ = np.linalg.lstsq(basis, ef.trace, rcond=None)
    assert np.linalg.norm(basis @ coef - ef.trace) < 1e-6 * np.linalg.norm(ef.trace)
    chk = eigenfunction_checks(ef)
    assert chk["pde_residual"] < 1e-5
    assert chk["normal_derivative"] < 1e-4
    assert chk["opposite_trace"] < 1e-6


def test_not_at_dip(circle64):
    with pytest.raises(NotAtDipError):
        neumann_eigenfunction(circle64, 1.0, "interior")


def test_third_green_identity(circle256):
    u = fields.plane_wave(2.0, (1.0, 0.0))
    inside = green_identity_residual(u, circle256, 2.0, [[0.1, 0.2], [-0.4, 0.3]])
    outside = green_identity_residual(u, circle256, 2.0, [[2.0, 0.0], [0.0, -3.0]])
    assert np.max(inside) < 1e-8 and np.max(outside) < 1e-8
    v = fields.point_source(2.0, (0.3, -0.1))
    ext = green_identity_residual(v, circle256, 2.0, [[2.0, 0.0], [0.0, 0.0]], side="exterior")
    assert np.max(ext) < 1e-8
    with pytest.raises(NearBoundaryError):
        green_identity_residual(u, circle256, 2.0, [[1.0, 0.0]])


def test_second_green_identity():
    b = make_boundary("circle", 128)
    aq, dtn = area_quadrature(b, 16, 128), build_dtn(b)
    u = fields.plane_wave(1.0, (0.6, 0.8))
    assert second_green_residual(u, u, b, 1.0, aq, dtn) < 1e-10
    assert second_green_residual(u, fields.linear((1.0, 0.0)), b, 1.0, aq, dtn) < 1e-6
    p, q = fields.point_source(1.0, (0.2, 0.0)), fields.point_source(1.0, (-0.3, 0.4))
    assert second_green_residual(p, q, b, 1.0, side="exterior") < 1e-8
    with pytest.raises(ValueError):
        second_green_residual(u, u, b, 1.0)


def test_radiation_examples(circle64):
    ps = fields.point_source(1.0, (0.1, 0.0))
    assert radiation_check(ps, 1.0).passed
    bad = radiation_check(fields.point_source(1.0, (0.1, 0.0), incoming=True), 1.0)
    assert not bad.passed
    assert np.all(bad.ratios >= 1.8)
    rep = solve_neumann(NeumannProblem("exterior", 1.0, circle64, _classical(ps, circle64)))
    assert radiation_check(rep, 1.0, boundary=circle64).passed
