"""Interface conformity, dof merging, orientation signs, global operators."""

from fractions import Fraction

import numpy as np
import numpy.testing as npt
import pytest

from splinecomplex.assembly import Complex3D, Scalar2D, Vector2D, assemble_matrix_2d
from splinecomplex.benchmarks import linear_patch, lsection_patches, prism_patch
from splinecomplex.bspline import KnotVector
from splinecomplex.exactrank import modular_rank
from splinecomplex.multipatch import (
    ConformityError,
    Interface,
    PatchSet,
    Scalar3D,
    build_glue,
    check_conformity,
    global_operator,
)
from splinecomplex.tmesh import TMesh2D, TsplineSpace, tensor_raw_tmesh
from splinecomplex.tspline import build_tspline_complex, derive_complex_meshes

F = Fraction


def uniform_raw(n):
    b = [F(k, n) for k in range(n + 1)]
    return tensor_raw_tmesh(b, b)


def scalar_space(n, p):
    return Scalar2D(TsplineSpace(TMesh2D.from_raw(uniform_raw(n), (p, p))))


def two_squares(n=3, p=2):
    """Patches (0,1)^2 and (1,2)x(0,1) sharing the edge x=1."""
    g0 = linear_patch(np.eye(2))
    g1 = linear_patch(np.eye(2), b=[1.0, 0.0])
    s0, s1 = scalar_space(n, p), scalar_space(n, p)
    itf = Interface((0, (0, 1)), (1, (0, 0)))
    return PatchSet([g0, g1], [s0, s1], [itf])


def test_two_patch_conformity_and_dim():
    ps = two_squares(3, 2)
    rep = check_conformity(ps)
    assert all(ok for _, ok, _ in rep)
    glue = build_glue(ps)
    n = ps.spaces[0].dim
    trace = 3 + 2  # 1D dim of S_2 on 3 spans
    assert glue.ndof == 2 * n - trace


def test_conformity_fails_on_refined_side():
    g0 = linear_patch(np.eye(2))
    g1 = linear_patch(np.eye(2), b=[1.0, 0.0])
    ps = PatchSet(
        [g0, g1],
        [scalar_space(3, 2), scalar_space(4, 2)],
        [Interface((0, (0, 1)), (1, (0, 0)))],
    )
    rep = check_conformity(ps)
    assert not rep[0][1]
    with pytest.raises(ConformityError):
        build_glue(ps)


def test_conformity_fails_on_geometry_gap():
    g0 = linear_patch(np.eye(2))
    g1 = linear_patch(np.eye(2), b=[1.5, 0.0])
    ps = PatchSet(
        [g0, g1],
        [scalar_space(3, 2), scalar_space(3, 2)],
        [Interface((0, (0, 1)), (1, (0, 0)))],
    )
    assert not check_conformity(ps)[0][1]


def test_single_patch_identity_glue():
    g0 = linear_patch(np.eye(2))
    ps = PatchSet([g0], [scalar_space(2, 2)], [])
    glue = build_glue(ps)
    assert glue.ndof == ps.spaces[0].dim
    assert np.array_equal(glue.scatters[0].toarray(), np.eye(glue.ndof))


def test_scalar_continuity_across_interface():
    ps = two_squares(3, 3)
    glue = build_glue(ps)
    rng = np.random.default_rng(40)
    x = rng.standard_normal(glue.ndof)
    c0 = ps.spaces[0].space
    c1 = ps.spaces[1].space
    loc0 = glue.scatters[0] @ x
    loc1 = glue.scatters[1] @ x
    ts = np.linspace(0.03, 0.97, 20)
    va = c0.eval(loc0, np.column_stack([np.ones_like(ts), ts]))
    vb = c1.eval(loc1, np.column_stack([np.zeros_like(ts), ts]))
    npt.assert_allclose(va, vb, atol=1e-8 * max(1, np.abs(va).max()))


def vector_space(n, p):
    tcx = build_tspline_complex(derive_complex_meshes(uniform_raw(n), p))
    return Vector2D.from_complex(tcx), tcx


def test_vector_tangential_continuity():
    v0, _ = vector_space(3, 2)
    v1, _ = vector_space(3, 2)
    g0 = linear_patch(np.eye(2))
    g1 = linear_patch(np.eye(2), b=[1.0, 0.0])
    ps = PatchSet([g0, g1], [v0, v1], [Interface((0, (0, 1)), (1, (0, 0)))])
    glue = build_glue(ps)
    rng = np.random.default_rng(41)
    x = rng.standard_normal(glue.ndof)
    loc0 = glue.scatters[0] @ x
    loc1 = glue.scatters[1] @ x
    ts = np.linspace(0.05, 0.95, 20)
    # tangential component on the face x=1 is the second one (both identity maps)
    ya = np.column_stack([np.ones_like(ts), ts])
    yb = np.column_stack([np.zeros_like(ts), ts])
    va = v0.c2.eval(loc0[v0.c1.dim :], ya)
    vb = v1.c2.eval(loc1[v1.c1.dim :], yb)
    npt.assert_allclose(va, vb, atol=1e-8 * max(1, np.abs(va).max()))


def test_flip_interface_continuity():
    # patch 1 rotated by 180 degrees: the shared edge runs backwards
    v0, _ = vector_space(3, 2)
    v1, _ = vector_space(3, 2)
    g0 = linear_patch(np.eye(2))
    g1 = linear_patch(-np.eye(2), b=[2.0, 1.0])  # maps (0,1)^2 onto (1,2)x(0,1)
    ps = PatchSet(
        [g0, g1],
        [v0, v1],
        [Interface((0, (0, 1)), (1, (0, 1)), flip=(True,))],
    )
    rep = check_conformity(ps)
    assert all(ok for _, ok, _ in rep), rep
    glue = build_glue(ps)
    rng = np.random.default_rng(42)
    x = rng.standard_normal(glue.ndof)
    loc0 = glue.scatters[0] @ x
    loc1 = glue.scatters[1] @ x
    ts = np.linspace(0.05, 0.95, 17)
    pa = np.column_stack([np.ones_like(ts), ts])
    pb = np.column_stack([np.ones_like(ts), 1.0 - ts])
    va = v0.c2.eval(loc0[v0.c1.dim :], pa)  # physical tangent +e_y
    vb = v1.c2.eval(loc1[v1.c1.dim :], pb)  # physical tangent -e_y
    npt.assert_allclose(va, -vb, atol=1e-8 * max(1, np.abs(va).max()))


def test_lsection_global_grad_rank():
    # three-patch L: the union is simply connected, so the kernel of the
    # global gradient is the constants only
    p = 2
    raw = uniform_raw(3)
    geoms = lsection_patches()
    scalars = []
    vectors = []
    tcxs = []
    for _ in range(3):
        tcx = build_tspline_complex(derive_complex_meshes(raw, p))
        tcxs.append(tcx)
        scalars.append(Scalar2D(TsplineSpace(tcx.meshes.M0)))
        vectors.append(Vector2D.from_complex(tcx))
    interfaces = [
        Interface((0, (1, 0)), (1, (0, 0))),
        Interface((1, (1, 0)), (2, (0, 0))),
    ]
    ps0 = PatchSet(geoms, scalars, interfaces)
    ps1 = PatchSet(geoms, vectors, interfaces)
    glue0 = build_glue(ps0)
    glue1 = build_glue(ps1)
    ops = [tcx.operators_int["grad"] for tcx in tcxs]
    G = global_operator(glue0, glue1, ops)
    # d of d is inherited: global rot of global grad
    rot_ops = [tcx.operators_int["rot"] for tcx in tcxs]
    # scalar field constant: gradient zero
    assert np.allclose((G @ np.ones(glue0.ndof)), 0)
    r = modular_rank(np.asarray(G.todense(), dtype=np.int64))
    assert r == glue0.ndof - 1


def test_patch_order_swap_leaves_spectrum():
    ps = two_squares(3, 2)
    glue = build_glue(ps)
    Ms = [assemble_matrix_2d(s, g, "mass") for s, g in zip(ps.spaces, ps.geoms)]
    M = glue.global_matrix(Ms).toarray()
    # swap the patch order (interface declared from the other side)
    g0, g1 = ps.geoms
    s0, s1 = ps.spaces
    ps2 = PatchSet([g1, g0], [s1, s0], [Interface((0, (0, 0)), (1, (0, 1)))])
    glue2 = build_glue(ps2)
    M2 = glue2.global_matrix(
        [assemble_matrix_2d(s, g, "mass") for s, g in zip(ps2.spaces, ps2.geoms)]
    ).toarray()
    npt.assert_allclose(np.sort(np.linalg.eigvalsh(M)), np.sort(np.linalg.eigvalsh(M2)), atol=1e-12)


def test_two_cubes_scalar_dim():
    p = 2
    n = 2
    raw = uniform_raw(n)
    kv_z = KnotVector.uniform(p, n)
    spaces = []
    for _ in range(2):
        tcx = build_tspline_complex(derive_complex_meshes(raw, p))
        spaces.append(Scalar3D(Complex3D(tcx, kv_z)))
    g0 = prism_patch(np.eye(2))
    g1 = prism_patch(np.eye(2), b2=[1.0, 0.0])
    ps = PatchSet([g0, g1], spaces, [Interface((0, (0, 1)), (1, (0, 0)))])
    glue = build_glue(ps)
    n1d = n + p  # univariate dimension
    assert spaces[0].dim == n1d**3
    assert glue.ndof == 2 * n1d**3 - n1d**2


def test_two_cubes_x1_glue_dd_zero():
    p = 2
    raw = uniform_raw(2)
    kv_z = KnotVector.uniform(p, 2)
    x1s, x0s, cx3s = [], [], []
    for _ in range(2):
        tcx = build_tspline_complex(derive_complex_meshes(raw, p))
        cx3 = Complex3D(tcx, kv_z)
        cx3s.append(cx3)
        x1s.append(cx3)
        x0s.append(Scalar3D(cx3))
    g0 = prism_patch(np.eye(2))
    g1 = prism_patch(np.eye(2), b2=[1.0, 0.0])
    itf = [Interface((0, (0, 1)), (1, (0, 0)))]
    glue0 = build_glue(PatchSet([g0, g1], x0s, itf))
    glue1 = build_glue(PatchSet([g0, g1], x1s, itf))
    grads = [c.operators()["grad"] for c in cx3s]
    G = global_operator(glue0, glue1, grads)
    assert np.allclose(np.abs(G @ np.ones(glue0.ndof)), 0, atol=1e-12)
    rng = np.random.default_rng(43)
    x = rng.standard_normal(glue0.ndof)
    # glued gradient fields are tangentially continuous: check by evaluating
    # the grad coefficients patchwise and comparing scalar gradients
    c0 = glue0.scatters[0] @ x
    c1 = glue0.scatters[1] @ x
    s2d = cx3s[0].tcx.Y0
    pts = rng.uniform(0.1, 0.9, size=(10, 2))
    za = 0.37
    # scalar continuity at the interface
    va = _eval_scalar3(cx3s[0], c0, np.column_stack([np.ones(10), pts[:, 0], np.full(10, za)]))
    vb = _eval_scalar3(cx3s[1], c1, np.column_stack([np.zeros(10), pts[:, 0], np.full(10, za)]))
    npt.assert_allclose(va, vb, atol=1e-9 * max(1, np.abs(va).max()))


def _eval_scalar3(cx3, coeffs, pts):
    from splinecomplex.bspline import scaled_eval

    s2d = cx3.tcx.Y0
    kvz = cx3.kv_z
    ks = kvz.knots
    p = kvz.degree
    out = np.zeros(pts.shape[0])
    for iz in range(kvz.n):
        zv = scaled_eval(ks[iz : iz + p + 2], p, "B", pts[:, 2])
        block = coeffs[iz * s2d.dim : (iz + 1) * s2d.dim]
        if np.any(block):
            out += s2d.eval(block, pts[:, :2]) * zv
    return out
