"""Quadrature, Galerkin matrices, boundary conditions, 3D tensor spaces."""

from fractions import Fraction

import numpy as np
import numpy.testing as npt
import pytest

from splinecomplex.assembly import (
    Complex3D,
    Scalar2D,
    Vector2D,
    assemble_load_3d,
    assemble_matrix_2d,
    assemble_matrix_3d,
    assemble_port_boundary,
    dirichlet_dofs_2d,
    dirichlet_dofs_3d,
    gauss_points_1d,
    gauss_points_2d,
    hcurl_error_3d,
)
from splinecomplex.benchmarks import linear_patch, prism_patch, square_raw_tmesh
from splinecomplex.bspline import KnotVector, eval_local, eval_local_deriv
from splinecomplex.complexes import build_complex
from splinecomplex.tmesh import TMesh2D, TsplineSpace, tensor_raw_tmesh
from splinecomplex.tspline import build_tspline_complex, derive_complex_meshes

F = Fraction


def uniform_raw(n):
    b = [F(k, n) for k in range(n + 1)]
    return tensor_raw_tmesh(b, b)


def tcx_for(n, p):
    return build_tspline_complex(derive_complex_meshes(uniform_raw(n), p))


def test_gauss_exactness():
    # order q integrates polynomials of degree 2q-1; q = p+1 covers 2p+1
    for p in (1, 2, 3, 4):
        q = p + 1
        pts, w = gauss_points_1d(0.25, 0.75, q)
        for deg in range(2 * p + 2):
            exact = (0.75 ** (deg + 1) - 0.25 ** (deg + 1)) / (deg + 1)
            npt.assert_allclose(np.sum(w * pts**deg), exact, rtol=1e-13)


def exact_gradgrad_1d(kv):
    """Symbolic-integration oracle: exact span polynomials via rational
    Lagrange interpolation of the recursion values, differentiated and
    integrated with Fractions."""
    from tests.test_bspline import cox_de_boor_exact

    p = kv.degree
    ks = kv.knots
    n = kv.n
    K = [[F(0)] * n for _ in range(n)]
    for a, b in kv.spans():
        # sample p+1 points inside the span, interpolate exactly
        nodes = [a + (b - a) * F(k + 1, p + 2) for k in range(p + 1)]
        polys = []
        for i in range(n):
            vals = [cox_de_boor_exact(ks, p, i, x) for x in nodes]
            polys.append(_lagrange_coeffs(nodes, vals))
        for i in range(n):
            di = _poly_derive(polys[i])
            for j in range(n):
                dj = _poly_derive(polys[j])
                K[i][j] += _poly_integrate(_poly_mul(di, dj), a, b)
    return K


def _lagrange_coeffs(xs, ys):
    n = len(xs)
    out = [F(0)] * n
    for i in range(n):
        num = [F(1)]
        den = F(1)
        for j in range(n):
            if j == i:
                continue
            num = _poly_mul(num, [-xs[j], F(1)])
            den *= xs[i] - xs[j]
        for k, c in enumerate(num):
            out[k] += ys[i] * c / den
    return out


def _poly_mul(a, b):
    out = [F(0)] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        for j, cb in enumerate(b):
            out[i + j] += ca * cb
    return out


def _poly_derive(a):
    return [c * (k + 1) for k, c in enumerate(a[1:])] or [F(0)]


def _poly_integrate(a, lo, hi):
    total = F(0)
    for k, c in enumerate(a):
        total += c * (hi ** (k + 1) - lo ** (k + 1)) / (k + 1)
    return total


def test_gradgrad_1d_matches_symbolic_oracle():
    kv = KnotVector(2, (F(0), F(1, 2), F(1)), (3, 1, 3))
    exact = exact_gradgrad_1d(kv)
    # assembled with the production quadrature utilities
    n = kv.n
    ks = kv.knots
    K = np.zeros((n, n))
    for a, b in kv.spans():
        pts, w = gauss_points_1d(float(a), float(b), kv.degree + 1)
        dv = np.stack(
            [eval_local_deriv(ks[i : i + kv.degree + 2], kv.degree, pts) for i in range(n)],
            axis=1,
        )
        K += dv.T @ (dv * w[:, None])
    npt.assert_allclose(K, np.array([[float(v) for v in row] for row in exact]), atol=1e-13)


def test_mass_row_sums_partition():
    tcx = tcx_for(3, 2)
    sc = Scalar2D(TsplineSpace(tcx.meshes.M0))
    geom = linear_patch(np.eye(2))
    M = assemble_matrix_2d(sc, geom, "mass")
    rs = np.asarray(M.sum(axis=1)).ravel()
    assert np.all(rs > 0)
    npt.assert_allclose(rs.sum(), 1.0, atol=1e-12)  # total = area of the square


def test_mass_spd():
    tcx = tcx_for(3, 2)
    v2 = Vector2D.from_complex(tcx)
    geom = linear_patch(2.0 * np.eye(2))
    M = assemble_matrix_2d(v2, geom, "mass").toarray()
    w = np.linalg.eigvalsh(0.5 * (M + M.T))
    assert w[0] > 0


def test_symmetry():
    tcx = tcx_for(2, 3)
    v2 = Vector2D.from_complex(tcx)
    geom = linear_patch(np.array([[1.2, 0.1], [0.0, 0.8]]))
    for kind in ("mass", "rotrot"):
        A = assemble_matrix_2d(v2, geom, kind)
        assert abs(A - A.T).max() < 1e-13


def test_curlcurl_kernel_contains_gradients():
    p = 2
    tcx = tcx_for(2, p)
    kv_z = KnotVector.uniform(p, 2)
    cx3 = Complex3D(tcx, kv_z)
    geom = prism_patch(np.eye(2))
    K = assemble_matrix_3d(cx3, geom, "curlcurl")
    G = cx3.operators()["grad"]
    rng = np.random.default_rng(50)
    c = rng.standard_normal(G.shape[1])
    v = G @ c
    r = np.linalg.norm(K @ v) / max(np.linalg.norm(K.toarray() @ rng.standard_normal(v.size)), 1e-30)
    assert r < 1e-10


def test_3d_dims_and_dd_zero():
    p = 3
    n = 2
    tcx = tcx_for(n, p)
    kv_z = KnotVector.uniform(p, n)
    cx3 = Complex3D(tcx, kv_z)
    dims = cx3.space_dims()
    nz = kv_z.n
    assert dims[1] == tcx.space_dim(1) * nz + tcx.space_dim(0) * (nz - 1)
    # tensor-product horizontal input reproduces the pure B-spline 3D counts
    kv = KnotVector.uniform(p, n)
    bcx = build_complex([kv, kv, kv_z])
    for j in range(4):
        assert dims[j] == bcx.space_dim(j), j
    ops = cx3.operators()
    assert np.abs((ops["curl"] @ ops["grad"])).max() < 1e-14
    assert np.abs((ops["div"] @ ops["curl"])).max() < 1e-14


def test_source_recovers_gradient_field():
    # f chosen so u = grad(x^2 y z) is in the space: recovered to solver accuracy
    p = 2
    tcx = tcx_for(2, p)
    kv_z = KnotVector.uniform(p, 2)
    cx3 = Complex3D(tcx, kv_z)
    geom = prism_patch(np.eye(2))
    K = assemble_matrix_3d(cx3, geom, "curlcurl")
    M = assemble_matrix_3d(cx3, geom, "mass")

    u = lambda X: np.column_stack(
        [2 * X[:, 0] * X[:, 1] * X[:, 2], X[:, 0] ** 2 * X[:, 2], X[:, 0] ** 2 * X[:, 1]]
    )
    b = assemble_load_3d(cx3, geom, u)
    from splinecomplex.solvers import solve_source

    x = solve_source((K + M).tocsc(), b)
    curl0 = lambda X: np.zeros((X.shape[0], 3))
    e_l2, e_curl = hcurl_error_3d(cx3, geom, x, u, curl0)
    assert e_l2 < 1e-9 and e_curl < 1e-9


def test_zero_rhs_zero_solution():
    from splinecomplex.solvers import solve_source

    p = 2
    tcx = tcx_for(2, p)
    cx3 = Complex3D(tcx, KnotVector.uniform(p, 1))
    geom = prism_patch(np.eye(2))
    A = (assemble_matrix_3d(cx3, geom, "curlcurl") + assemble_matrix_3d(cx3, geom, "mass")).tocsc()
    x = solve_source(A, np.zeros(A.shape[0]))
    assert np.all(x == 0)


def test_dirichlet_counts_3d():
    p = 2
    tcx = tcx_for(2, p)
    cx3 = Complex3D(tcx, KnotVector.uniform(p, 2))
    all_faces = [(a, s) for a in range(3) for s in (0, 1)]
    constrained = dirichlet_dofs_3d(cx3, all_faces)
    # no-tags restriction is the identity
    assert dirichlet_dofs_3d(cx3, []) == []
    assert 0 < len(constrained) < cx3.x1_dim()
    # the free space excludes every clamped tangential dof
    dims = cx3.space_dims()
    nz = cx3.kv_z.n
    n2 = tcx.space_dim(0)
    c1 = tcx.Y1[0].dim
    # component 1 (x-directed): clamped at y and z boundaries
    kv = KnotVector.uniform(p, 2)
    n1d = kv.n
    interior_1d = n1d - 2
    expected_c1 = (n1d - 1) * n1d * nz - (n1d - 1) * interior_1d * (nz - 2)
    assert expected_c1 == len([d for d in constrained if d < c1 * nz])


def test_port_boundary_matrix():
    p = 2
    tcx = tcx_for(3, p)
    cx3 = Complex3D(tcx, KnotVector.uniform(p, 2))
    geom = prism_patch(np.pi * np.eye(2))
    from splinecomplex.benchmarks import square_geometry

    B, tmap = assemble_port_boundary(cx3, square_geometry(), 0)
    Bd = B.toarray()
    assert abs(Bd - Bd.T).max() < 1e-13
    w = np.linalg.eigvalsh(0.5 * (Bd + Bd.T))
    assert w[0] > -1e-12  # positive semidefinite Gram of tangential traces
    # zero incident field gives a zero load by construction
    assert B.shape == (cx3.x1_dim(), cx3.x1_dim())


def test_zero_measure_elements_skipped():
    # repeated internal knot produces zero-width faces; assembly ignores them
    raw = tensor_raw_tmesh([F(0), F(1, 2), F(1)], [F(0), F(1, 2), F(1)])
    from splinecomplex.tmesh import RawTMesh

    raw2 = RawTMesh(raw.breakpoints_x, raw.breakpoints_y, raw.faces, {("x", 1): 2})
    mesh = TMesh2D.from_raw(raw2, (2, 2))
    sc = Scalar2D(TsplineSpace(mesh))
    geom = linear_patch(np.eye(2))
    M = assemble_matrix_2d(sc, geom, "mass")
    rs = np.asarray(M.sum(axis=1)).ravel()
    npt.assert_allclose(rs.sum(), 1.0, atol=1e-12)


def test_thread_count_does_not_change_results():
    tcx = tcx_for(3, 3)
    v2 = Vector2D.from_complex(tcx)
    geom = linear_patch(np.pi * np.eye(2))
    A1 = assemble_matrix_2d(v2, geom, "rotrot", threads=1)
    A2 = assemble_matrix_2d(v2, geom, "rotrot", threads=3)
    assert abs(A1 - A2).max() == 0.0
