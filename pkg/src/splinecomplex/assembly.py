"""Galerkin assembly on (extended) T-meshes and tensor 3D spaces.

Integration runs element by element over the positive-area faces of the
extended mesh (times nonempty knot spans in the third direction), with
tensor Gauss rules of order degree+1 per direction.  Push-forward metric
factors realize curl-conforming (j=1) and div-conforming (j=2) mappings;
zero-measure elements contribute nothing and are skipped.

Three-dimensional spaces combine a 2D T-spline complex with a 1D spline
direction; component coefficient blocks are ordered (c1, c2, c3) with the
2D anchor index running fastest inside each block.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from numpy.polynomial.legendre import leggauss

from .bspline import KnotVector, grad_matrix_1d, scaled_eval
from .tmesh import TMesh2D, TsplineSpace
from .tspline import TsplineComplex

__all__ = [
    "gauss_points_1d",
    "gauss_points_2d",
    "Scalar2D",
    "Vector2D",
    "Complex3D",
    "tensor_3d",
    "assemble_matrix_2d",
    "assemble_load_2d",
    "assemble_matrix_3d",
    "assemble_load_3d",
    "assemble_port_boundary",
    "dirichlet_dofs_2d",
    "dirichlet_dofs_3d",
    "hcurl_error_3d",
]

_GAUSS_CACHE = {}


def _leggauss(n):
    if n not in _GAUSS_CACHE:
        _GAUSS_CACHE[n] = leggauss(n)
    return _GAUSS_CACHE[n]


def gauss_points_1d(a, b, order):
    gx, gw = _leggauss(order)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return mid + half * gx, half * gw


def gauss_points_2d(box, order):
    x1, y1, x2, y2 = box
    ox, oy = (order, order) if np.isscalar(order) else order
    px, wx = gauss_points_1d(x1, x2, ox)
    py, wy = gauss_points_1d(y1, y2, oy)
    pts = np.stack(np.meshgrid(px, py, indexing="ij"), axis=-1).reshape(-1, 2)
    w = np.outer(wx, wy).reshape(-1)
    return pts, w




def _axes_2d(box, order):
    x1, y1, x2, y2 = box
    ox, oy = (order, order) if np.isscalar(order) else order
    px, wx = gauss_points_1d(x1, x2, ox)
    py, wy = gauss_points_1d(y1, y2, oy)
    pts = np.stack(np.meshgrid(px, py, indexing="ij"), axis=-1).reshape(-1, 2)
    w = np.outer(wx, wy).reshape(-1)
    return px, py, pts, w


def _anchor_tables(space: TsplineSpace, acts, px, py, derivs=True):
    """Values (and optionally x/y derivatives) of anchors on a tensor grid,
    via 1D factor evaluations and outer products; shape (npts, nact)."""
    p1, p2 = space.degrees
    s1, s2 = space.scalings
    n = len(px) * len(py)
    v = np.empty((n, len(acts)))
    dx = np.empty((n, len(acts))) if derivs else None
    dy = np.empty((n, len(acts))) if derivs else None
    for k, a in enumerate(acts):
        fx = scaled_eval(a.lkv1, p1, s1, px)
        fy = scaled_eval(a.lkv2, p2, s2, py)
        v[:, k] = np.multiply.outer(fx, fy).reshape(-1)
        if derivs:
            gx = scaled_eval(a.lkv1, p1, s1, px, 1)
            gy = scaled_eval(a.lkv2, p2, s2, py, 1)
            dx[:, k] = np.multiply.outer(gx, fy).reshape(-1)
            dy[:, k] = np.multiply.outer(fx, gy).reshape(-1)
    return v, dx, dy


# -- space wrappers ------------------------------------------------------------


def _clamped_lkv(lkv, degree, side) -> bool:
    if side == 0:
        return lkv[degree] == lkv[0] == 0
    return lkv[1] == lkv[-1] == 1


@dataclass
class Scalar2D:
    """Scalar 2D space (form degree 0 or 2) over one T-spline space."""

    space: TsplineSpace
    form: int = 0

    @property
    def dim(self):
        return self.space.dim

    def elements(self):
        ext = self.space.mesh.extended()
        return _element_boxes(ext)

    def clamped_dofs(self, face):
        axis, side = face
        out = []
        for a in self.space.anchors:
            lkv = (a.lkv1, a.lkv2)[axis]
            if _clamped_lkv(lkv, self.space.degrees[axis], side):
                out.append(a.index)
        return out


@dataclass
class Vector2D:
    """Rot-conforming vector 2D space: components (D x B, B x D)."""

    c1: TsplineSpace
    c2: TsplineSpace

    @property
    def dim(self):
        return self.c1.dim + self.c2.dim

    @classmethod
    def from_complex(cls, tcx: TsplineComplex) -> "Vector2D":
        return cls(tcx.Y1[0], tcx.Y1[1])

    def elements(self):
        ext = self.c1.mesh.extended()
        return _element_boxes(ext)

    def clamped_dofs(self, face):
        """Dofs with nonzero tangential trace on the face: the tangential
        component is the one along the face, clamped across it."""
        axis, side = face
        comp = 1 - axis  # tangential component index
        space = (self.c1, self.c2)[comp]
        off = 0 if comp == 0 else self.c1.dim
        out = []
        for a in space.anchors:
            lkv = (a.lkv1, a.lkv2)[axis]
            if _clamped_lkv(lkv, space.degrees[axis], side):
                out.append(off + a.index)
        return out


def _element_boxes(mesh: TMesh2D):
    out = []
    for f in mesh.positive_faces():
        out.append(
            (
                float(mesh.xs[f[0]]),
                float(mesh.ys[f[1]]),
                float(mesh.xs[f[2]]),
                float(mesh.ys[f[3]]),
            )
        )
    return out


def _active(space: TsplineSpace, box):
    x1, y1, x2, y2 = box
    out = []
    for a in space.anchors:
        s = a.support
        if float(s[0]) < x2 and float(s[1]) > x1 and float(s[2]) < y2 and float(s[3]) > y1:
            out.append(a)
    return out


# -- 2D assembly -----------------------------------------------------------------


def _metric_2d(geom, pts):
    J, det = geom.jacobian_dets(pts)
    Jinv = np.linalg.inv(J)
    Ginv = np.einsum("pik,pjk->pij", Jinv, Jinv)  # J^-1 J^-T
    return J, det, Ginv


def assemble_matrix_2d(space, geom, kind, order=None, threads=1):
    """Sparse symmetric Galerkin matrix on one 2D patch.

    kinds: 'mass' and 'gradgrad' on Scalar2D (form 0); 'mass' on a form-2
    Scalar2D uses the determinant transform; 'mass' and 'rotrot' on Vector2D.
    """
    if isinstance(space, Scalar2D):
        p = max(space.space.degrees)
        order = order or p + 1
        return _assemble_scalar_2d(space, geom, kind, order, threads)
    p = max(space.c1.degrees)
    order = order or p + 1
    return _assemble_vector_2d(space, geom, kind, order, threads)


def _element_loop(elements, worker, threads):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(worker, elements))
    else:
        results = [worker(box) for box in elements]
    return results


def _assemble_scalar_2d(space: Scalar2D, geom, kind, order, threads):
    S = space.space
    n = S.dim

    def worker(box):
        px, py, pts, w = _axes_2d(box, order)
        J, det, Ginv = _metric_2d(geom, pts)
        act = _active(S, box)
        idx = np.array([a.index for a in act])
        if kind == "mass" and space.form == 0:
            vals, _, _ = _anchor_tables(S, act, px, py, derivs=False)
            M = vals.T @ (vals * (w * det)[:, None])
        elif kind == "mass" and space.form == 2:
            vals, _, _ = _anchor_tables(S, act, px, py, derivs=False)
            M = vals.T @ (vals * (w / det)[:, None])
        elif kind == "gradgrad":
            _, gx, gy = _anchor_tables(S, act, px, py)
            wdet = w * det
            M = (
                gx.T @ (gx * (Ginv[:, 0, 0] * wdet)[:, None])
                + gx.T @ (gy * (Ginv[:, 0, 1] * wdet)[:, None])
                + gy.T @ (gx * (Ginv[:, 1, 0] * wdet)[:, None])
                + gy.T @ (gy * (Ginv[:, 1, 1] * wdet)[:, None])
            )
        else:
            raise ValueError(f"unknown scalar kind {kind!r}")
        return idx, M

    return _merge_coo(_element_loop(space.elements(), worker, threads), n)


def _assemble_vector_2d(space: Vector2D, geom, kind, order, threads):
    n1 = space.c1.dim
    n = space.dim

    def worker(box):
        px, py, pts, w = _axes_2d(box, order)
        J, det, Ginv = _metric_2d(geom, pts)
        a1 = _active(space.c1, box)
        a2 = _active(space.c2, box)
        idx = np.array([a.index for a in a1] + [n1 + a.index for a in a2])
        t1 = _anchor_tables(space.c1, a1, px, py)
        t2 = _anchor_tables(space.c2, a2, px, py)
        if kind == "mass":
            v1, v2 = t1[0], t2[0]
            wdet = (w * det)[:, None]
            M11 = v1.T @ (v1 * (Ginv[:, 0, 0])[:, None] * wdet)
            M12 = v1.T @ (v2 * (Ginv[:, 0, 1])[:, None] * wdet)
            M22 = v2.T @ (v2 * (Ginv[:, 1, 1])[:, None] * wdet)
            M = np.block([[M11, M12], [M12.T, M22]])
        elif kind == "rotrot":
            # rot of (f, 0) is -df/dy; rot of (0, g) is dg/dx
            r = np.concatenate([-t1[2], t2[1]], axis=1)
            M = r.T @ (r * (w / det)[:, None])
        else:
            raise ValueError(f"unknown vector kind {kind!r}")
        return idx, M

    return _merge_coo(_element_loop(space.elements(), worker, threads), n)


def assemble_load_2d(space, geom, f, order=None, threads=1):
    """Load vector for a physical source: scalar f for Scalar2D (form 0),
    vector f for Vector2D (curl-conforming transform)."""
    if isinstance(space, Scalar2D):
        S = space.space
        order = order or max(S.degrees) + 2
        out = np.zeros(S.dim)
        for box in space.elements():
            pts, w = gauss_points_2d(box, order)
            J, det, _ = _metric_2d(geom, pts)
            fv = np.asarray(f(geom.eval(pts)))
            act = _active(S, box)
            for a in act:
                out[a.index] += np.sum(w * det * fv * S.eval_anchor(a, pts))
        return out
    order = order or max(space.c1.degrees) + 2
    out = np.zeros(space.dim)
    n1 = space.c1.dim
    for box in space.elements():
        pts, w = gauss_points_2d(box, order)
        J, det, _ = _metric_2d(geom, pts)
        Jinv = np.linalg.inv(J)
        fv = np.asarray(f(geom.eval(pts)))
        fhat = np.einsum("pij,pj->pi", Jinv, fv)
        wdet = w * det
        for a in _active(space.c1, box):
            out[a.index] += np.sum(wdet * fhat[:, 0] * space.c1.eval_anchor(a, pts))
        for a in _active(space.c2, box):
            out[n1 + a.index] += np.sum(wdet * fhat[:, 1] * space.c2.eval_anchor(a, pts))
    return out


def _merge_coo(results, n):
    rows, cols, vals = [], [], []
    for idx, M in results:
        if len(idx) == 0:
            continue
        r = np.repeat(idx, len(idx))
        c = np.tile(idx, len(idx))
        rows.append(r)
        cols.append(c)
        vals.append(M.reshape(-1))
    A = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    ).tocsr()
    return A


# -- 3D tensor spaces ---------------------------------------------------------------


@dataclass
class Complex3D:
    """Tensor product of a 2D T-spline complex with a 1D spline direction."""

    tcx: TsplineComplex
    kv_z: KnotVector

    def __post_init__(self):
        if self.kv_z.degree != self.tcx.degree:
            raise ValueError("vertical degree must match the horizontal complex")

    @property
    def nz(self):
        return self.kv_z.n

    def space_dims(self):
        t = self.tcx
        nz, nzd = self.nz, self.nz - 1
        return {
            0: t.space_dim(0) * nz,
            1: (t.Y1[0].dim + t.Y1[1].dim) * nz + t.space_dim(0) * nzd,
            2: (t.Y1[0].dim + t.Y1[1].dim) * nzd + t.space_dim(2) * nz,
            3: t.space_dim(2) * nzd,
        }

    def x1_blocks(self):
        """(2D space, z knot vector, z scaling) per X1 component."""
        kvd = self.kv_z.derived()
        return (
            (self.tcx.Y1[0], self.kv_z, "B"),
            (self.tcx.Y1[1], self.kv_z, "B"),
            (self.tcx.Y0, kvd, "D"),
        )

    def x1_dim(self):
        return self.space_dims()[1]

    def x1_offsets(self):
        b = self.x1_blocks()
        sizes = [s.dim * kv.n for (s, kv, _) in b]
        return np.concatenate([[0], np.cumsum(sizes)])

    def operators(self):
        """grad, curl, div as float matrices (Kronecker combinations)."""
        t = self.tcx
        oi, dens = t.operators_int, t.denominators
        n0, n2 = t.space_dim(0), t.space_dim(2)
        n11, n12 = t.Y1[0].dim, t.Y1[1].dim
        Gz = grad_matrix_1d(self.kv_z)
        Iz = sp.identity(self.nz, format="csr")
        Izd = sp.identity(self.nz - 1, format="csr")
        G1 = oi["grad"][:n11] / dens["grad"]
        G2 = oi["grad"][n11:] / dens["grad"]
        R1 = -oi["rot"][:, :n11] / dens["rot"]
        R2 = oi["rot"][:, n11:] / dens["rot"]
        grad = sp.vstack(
            [sp.kron(Iz, G1), sp.kron(Iz, G2), sp.kron(Gz, sp.identity(n0, format="csr"))]
        ).tocsr()
        z12 = sp.csr_matrix((n12 * (self.nz - 1), n11 * self.nz))
        z21 = sp.csr_matrix((n11 * (self.nz - 1), n12 * self.nz))
        curl = sp.vstack(
            [
                sp.hstack([z12, -sp.kron(Gz, sp.identity(n12)), sp.kron(Izd, G2)]),
                sp.hstack([sp.kron(Gz, sp.identity(n11)), z21, -sp.kron(Izd, G1)]),
                sp.hstack([sp.kron(Iz, -R1), sp.kron(Iz, R2), sp.csr_matrix((n2 * self.nz, n0 * (self.nz - 1)))]),
            ]
        ).tocsr()
        div = sp.hstack(
            [sp.kron(Izd, R2), sp.kron(Izd, R1), sp.kron(Gz, sp.identity(n2))]
        ).tocsr()
        return {"grad": grad, "curl": curl, "div": div}


def tensor_3d(tcx: TsplineComplex, kv_z: KnotVector) -> Complex3D:
    """The four 3D spaces from a 2D complex and a vertical knot vector."""
    return Complex3D(tcx, kv_z)


def _z_elements(kv: KnotVector):
    return [(float(a), float(b)) for a, b in kv.spans()]


def _z_tables(kv: KnotVector, scaling, za, zb, order):
    pz, wz = gauss_points_1d(za, zb, order)
    ks = kv.knots
    p = kv.degree
    act = [i for i in range(kv.n) if float(ks[i]) < zb and float(ks[i + p + 1]) > za]
    vals = np.stack([scaled_eval(ks[i : i + p + 2], p, scaling, pz) for i in act], axis=1)
    ders = np.stack([scaled_eval(ks[i : i + p + 2], p, scaling, pz, 1) for i in act], axis=1)
    return pz, wz, act, vals, ders


def assemble_matrix_3d(cx3: Complex3D, geom, kind, order=None, threads=1):
    """'mass' or 'curlcurl' on the curl-conforming 3D space of one patch."""
    p = cx3.tcx.degree
    order = order or p + 1
    blocks = cx3.x1_blocks()
    offs = cx3.x1_offsets()
    n = cx3.x1_dim()
    ext = cx3.tcx.meshes.M0.extended()
    boxes2d = _element_boxes(ext)
    zspans = _z_elements(cx3.kv_z)
    elements = [(b, z) for b in boxes2d for z in zspans]

    def worker(el):
        box, (za, zb) = el
        px, py, pts2, w2 = _axes_2d(box, order)
        tabs = []
        for m, (s2d, kvz, zscal) in enumerate(blocks):
            act2 = _active(s2d, box)
            v2, dx2, dy2 = _anchor_tables(s2d, act2, px, py)
            pz, wz, actz, vz, dz = _z_tables(kvz, zscal, za, zb, order)
            tabs.append((act2, v2, dx2, dy2, actz, vz, dz, s2d.dim))
        pz, wz = gauss_points_1d(za, zb, order)
        npt2, npz = len(w2), len(wz)
        P = np.concatenate(
            [np.repeat(pts2, npz, axis=0), np.tile(pz, npt2)[:, None]], axis=1
        )
        W = (w2[:, None] * wz[None, :]).reshape(-1)
        J, det = geom.jacobian_dets(P)
        # basis values (3 components) and curls per dof
        idx = []
        V = []
        C = []
        for m, (act2, v2, dx2, dy2, actz, vz, dz, dim2) in enumerate(tabs):
            for bi, a in enumerate(act2):
                for zi, iz in enumerate(actz):
                    idx.append(offs[m] + iz * dim2 + a.index)
                    f = (v2[:, bi][:, None] * vz[:, zi][None, :]).reshape(-1)
                    fdx = (dx2[:, bi][:, None] * vz[:, zi][None, :]).reshape(-1)
                    fdy = (dy2[:, bi][:, None] * vz[:, zi][None, :]).reshape(-1)
                    fdz = (v2[:, bi][:, None] * dz[:, zi][None, :]).reshape(-1)
                    val = np.zeros((len(W), 3))
                    cur = np.zeros((len(W), 3))
                    if m == 0:
                        val[:, 0] = f
                        cur[:, 1] = fdz
                        cur[:, 2] = -fdy
                    elif m == 1:
                        val[:, 1] = f
                        cur[:, 0] = -fdz
                        cur[:, 2] = fdx
                    else:
                        val[:, 2] = f
                        cur[:, 0] = fdy
                        cur[:, 1] = -fdx
                    V.append(val)
                    C.append(cur)
        if not idx:
            return np.array([], dtype=int), np.zeros((0, 0))
        V = np.stack(V, axis=0)  # (ndof, nq, 3)
        C = np.stack(C, axis=0)
        if kind == "mass":
            Jinv = np.linalg.inv(J)
            G = np.einsum("pik,pjk->pij", Jinv, Jinv) * (det * W)[:, None, None]
            quad = _bilinear(V, G)
        elif kind == "curlcurl":
            G = np.einsum("pki,pkj->pij", J, J) * (W / det)[:, None, None]
            quad = _bilinear(C, G)
        else:
            raise ValueError(f"unknown 3D kind {kind!r}")
        return np.asarray(idx), quad

    return _merge_coo(_element_loop(elements, worker, threads), n)




def _bilinear(V, Gw):
    """sum_q V[a,q,:] Gw[q] V[b,q,:]^T as one BLAS product."""
    nq = Gw.shape[0]
    GV = np.matmul(V.transpose(1, 0, 2), Gw.transpose(0, 2, 1))  # (q, a, i)
    A = GV.transpose(1, 0, 2).reshape(V.shape[0], nq * 3)
    B = V.reshape(V.shape[0], nq * 3)
    return A @ B.T


def assemble_load_3d(cx3: Complex3D, geom, f, order=None, threads=1):
    """Load vector int f . v for the curl-conforming space of one patch."""
    p = cx3.tcx.degree
    order = order or p + 2
    blocks = cx3.x1_blocks()
    offs = cx3.x1_offsets()
    out = np.zeros(cx3.x1_dim())
    ext = cx3.tcx.meshes.M0.extended()
    for box in _element_boxes(ext):
        for (za, zb) in _z_elements(cx3.kv_z):
            pts2, w2 = gauss_points_2d(box, order)
            pz, wz = gauss_points_1d(za, zb, order)
            npt2, npz = len(w2), len(wz)
            P = np.concatenate(
                [np.repeat(pts2, npz, axis=0), np.tile(pz, npt2)[:, None]], axis=1
            )
            W = (w2[:, None] * wz[None, :]).reshape(-1)
            J, det = geom.jacobian_dets(P)
            Jinv = np.linalg.inv(J)
            fv = np.asarray(f(geom.eval(P)))
            fhat = np.einsum("pij,pj->pi", Jinv, fv) * (det * W)[:, None]
            for m, (s2d, kvz, zscal) in enumerate(blocks):
                act2 = _active(s2d, box)
                if not act2:
                    continue
                v2 = np.stack([s2d.eval_anchor(a, pts2) for a in act2], axis=1)
                _, _, actz, vz, _ = _z_tables(kvz, zscal, za, zb, order)
                target = fhat[:, m].reshape(npt2, npz)
                local = v2.T @ (target @ vz)
                for bi, a in enumerate(act2):
                    for zi, iz in enumerate(actz):
                        out[offs[m] + iz * s2d.dim + a.index] += local[bi, zi]
    return out


# -- boundary conditions -------------------------------------------------------------


def dirichlet_dofs_2d(space, faces):
    """Constrained dof indices of a 2D space for the tagged faces."""
    out = set()
    for face in faces:
        out.update(space.clamped_dofs(face))
    return sorted(out)


def dirichlet_dofs_3d(cx3: Complex3D, faces):
    """Constrained X1 dofs: tangential components clamped on tagged faces.

    Faces are (axis, side) with axis 2 the vertical direction.
    """
    blocks = cx3.x1_blocks()
    offs = cx3.x1_offsets()
    out = set()
    for axis, side in faces:
        for m, (s2d, kvz, zscal) in enumerate(blocks):
            if m == axis:
                continue  # normal component is unconstrained
            if axis == 2:
                ks = kvz.knots
                p = kvz.degree
                for iz in range(kvz.n):
                    if _clamped_lkv(tuple(ks[iz : iz + p + 2]), p, side):
                        for a in range(s2d.dim):
                            out.add(offs[m] + iz * s2d.dim + a)
            else:
                for a in s2d.anchors:
                    lkv = (a.lkv1, a.lkv2)[axis]
                    if _clamped_lkv(lkv, s2d.degrees[axis], side):
                        for iz in range(kvz.n):
                            out.add(offs[m] + iz * s2d.dim + a.index)
    return sorted(out)


# -- port boundary -----------------------------------------------------------------


def port_trace_dofs(cx3: Complex3D, side):
    """Map 2D tangential-trace dofs onto 3D dofs at a z-face.

    Returns (dof3d array aligned with the Vector2D ordering of the section).
    """
    blocks = cx3.x1_blocks()
    offs = cx3.x1_offsets()
    kvz = cx3.kv_z
    ks = kvz.knots
    p = kvz.degree
    iz = None
    for i in range(kvz.n):
        if _clamped_lkv(tuple(ks[i : i + p + 2]), p, side):
            iz = i
    if iz is None:
        raise ValueError("no clamped vertical function at the port face")
    out = []
    for m in (0, 1):
        s2d = blocks[m][0]
        for a in range(s2d.dim):
            out.append(offs[m] + iz * s2d.dim + a)
    return np.asarray(out)


def assemble_port_boundary(cx3: Complex3D, section_geom, side, order=None):
    """Surface matrix of tangential traces on a z-port face.

    Returns (B, trace_map): B is the full-size 3D sparse matrix of
    int (n x E).(n x G) over the port, realized by the 2D mass matrix of the
    section scattered to the trace dofs; trace_map are those 3D dofs.
    """
    v2 = Vector2D(cx3.tcx.Y1[0], cx3.tcx.Y1[1])
    M2 = assemble_matrix_2d(v2, section_geom, "mass", order=order)
    tmap = port_trace_dofs(cx3, side)
    n = cx3.x1_dim()
    M2 = M2.tocoo()
    B = sp.coo_matrix((M2.data, (tmap[M2.row], tmap[M2.col])), shape=(n, n)).tocsr()
    return B, tmap


# -- error evaluation ----------------------------------------------------------------


def hcurl_error_3d(cx3: Complex3D, geom, coeffs, u_exact, curlu_exact, order=None):
    """H(curl) error of a discrete field against closed-form references.

    Returns (l2_err, curl_err) accumulated by quadrature on the extended
    mesh of one patch.
    """
    p = cx3.tcx.degree
    order = order or p + 2
    blocks = cx3.x1_blocks()
    offs = cx3.x1_offsets()
    ext = cx3.tcx.meshes.M0.extended()
    e_l2 = 0.0
    e_curl = 0.0
    for box in _element_boxes(ext):
        for (za, zb) in _z_elements(cx3.kv_z):
            pts2, w2 = gauss_points_2d(box, order)
            pz, wz = gauss_points_1d(za, zb, order)
            npt2, npz = len(w2), len(wz)
            P = np.concatenate(
                [np.repeat(pts2, npz, axis=0), np.tile(pz, npt2)[:, None]], axis=1
            )
            W = (w2[:, None] * wz[None, :]).reshape(-1)
            J, det = geom.jacobian_dets(P)
            val_hat = np.zeros((len(W), 3))
            curl_hat = np.zeros((len(W), 3))
            for m, (s2d, kvz, zscal) in enumerate(blocks):
                act2 = _active(s2d, box)
                if not act2:
                    continue
                _, _, actz, vz, dz = _z_tables(kvz, zscal, za, zb, order)
                v2 = np.stack([s2d.eval_anchor(a, pts2) for a in act2], axis=1)
                dx2 = np.stack([s2d.eval_anchor(a, pts2, dx=1) for a in act2], axis=1)
                dy2 = np.stack([s2d.eval_anchor(a, pts2, dy=1) for a in act2], axis=1)
                cloc = np.array(
                    [[coeffs[offs[m] + iz * s2d.dim + a.index] for iz in actz] for a in act2]
                )
                f = np.einsum("pa,az,qz->pq", v2, cloc, vz).reshape(-1)
                fdx = np.einsum("pa,az,qz->pq", dx2, cloc, vz).reshape(-1)
                fdy = np.einsum("pa,az,qz->pq", dy2, cloc, vz).reshape(-1)
                fdz = np.einsum("pa,az,qz->pq", v2, cloc, dz).reshape(-1)
                if m == 0:
                    val_hat[:, 0] += f
                    curl_hat[:, 1] += fdz
                    curl_hat[:, 2] += -fdy
                elif m == 1:
                    val_hat[:, 1] += f
                    curl_hat[:, 0] += -fdz
                    curl_hat[:, 2] += fdx
                else:
                    val_hat[:, 2] += f
                    curl_hat[:, 0] += fdy
                    curl_hat[:, 1] += -fdx
            Jinv = np.linalg.inv(J)
            u_h = np.einsum("pji,pj->pi", Jinv, val_hat)  # J^-T hat u
            curl_h = np.einsum("pij,pj->pi", J, curl_hat) / det[:, None]
            X = geom.eval(P)
            du = u_h - np.asarray(u_exact(X))
            dc = curl_h - np.asarray(curlu_exact(X))
            e_l2 += np.sum(W * det * np.sum(du * du, axis=1))
            e_curl += np.sum(W * det * np.sum(dc * dc, axis=1))
    return math.sqrt(e_l2), math.sqrt(e_curl)
