"""Two-dimensional T-spline de Rham complexes.

From one analysis-suitable T-mesh, four derived meshes carry the scalar,
vector, rotated-vector and top-form spaces.  For odd degree the vector
meshes add the first-bay face extensions of the horizontal/vertical
T-junctions; for even degree one boundary line repetition is dropped per
constrained direction (both falling out of re-rendering the same tiling at
the lowered degree).

Operator matrices are built column by column from the univariate derivative
decomposition.  The differentiated direction always yields +-1 entries in
the Curry-Schoenberg-scaled target basis.  In the transverse direction the
two windows are located by exact local-knot-vector matching; where the
derived mesh refines the transverse knot line (possible next to extension
bays) the source window is expanded by exact rational knot insertion
instead.  Matrices are therefore rational; they are stored as integer
matrices over one common denominator so compositions and ranks stay exact,
and they reduce bit-for-bit to the signed B-spline pattern on tensor input.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

from .bspline import derivative_decomposition
from .complexes import ExactnessReport, _merge_reports, verify_sequence
from .tmesh import RawTMesh, TMesh2D, TMeshError, TsplineSpace

__all__ = [
    "ComplexMeshes",
    "TsplineComplex",
    "derive_complex_meshes",
    "build_tspline_complex",
    "t_diff_matrix",
    "verify_t_exactness",
]


@dataclass
class ComplexMeshes:
    """The four derived T-meshes of one scalar mesh and degree."""

    degree: int
    M0: TMesh2D
    M11: TMesh2D
    M12: TMesh2D
    M2: TMesh2D

    def extended_meshes_agree(self) -> bool:
        """Set-equality of positive-length mesh lines of the four extended
        meshes (boundary repetitions collapse)."""
        ref = self.M0.extended().line_segments_by_value()
        return all(
            m.extended().line_segments_by_value() == ref
            for m in (self.M11, self.M12, self.M2)
        )


def derive_complex_meshes(raw: RawTMesh, p: int) -> ComplexMeshes:
    """Derive the meshes for the scalar, vector and top-form spaces.

    Requires an analysis-suitable input (checked); equal degree in both
    directions is assumed throughout.
    """
    if p < 1:
        raise ValueError("degree must be at least 1")
    M0 = TMesh2D.from_raw(raw, (p, p))
    ok, pair = M0.is_analysis_suitable()
    if not ok:
        raise TMeshError(f"input mesh is not analysis-suitable: {pair}")
    if p % 2 == 1:
        exts = M0.compute_extensions()
        segs_h = [_first_bay(M0, e) for e in exts if e.orientation == "h"]
        segs_v = [_first_bay(M0, e) for e in exts if e.orientation == "v"]
        M11 = M0.with_segments(segs_h, (p - 1, p))
        M12 = M0.with_segments(segs_v, (p, p - 1))
        M2 = M0.with_segments(segs_h + segs_v, (p - 1, p - 1))
    else:
        M11 = TMesh2D.from_raw(raw, (p - 1, p))
        M12 = TMesh2D.from_raw(raw, (p, p - 1))
        M2 = TMesh2D.from_raw(raw, (p - 1, p - 1))
    return ComplexMeshes(p, M0, M11, M12, M2)


def _first_bay(mesh: TMesh2D, ext):
    """Face-extension segment truncated to its first bay."""
    i, j, orientation = ext.junction
    start = i if orientation == "h" else j
    lo, hi = ext.face_range
    sense = 1 if hi > start else -1
    end = mesh._walk(orientation, ext.line_index, start, sense, 1)
    return (orientation, ext.line_index, min(start, end), max(start, end))


@dataclass
class TsplineComplex:
    """Spaces and operator matrices of the two T-spline sequences.

    ``operators`` holds float matrices; ``operators_int`` the same matrices
    scaled by ``denominators[name]`` to integers for exact arithmetic.
    """

    meshes: ComplexMeshes
    Y0: TsplineSpace
    Y1: tuple  # (component 1 on M11, component 2 on M12)
    Y2: TsplineSpace
    operators: dict
    operators_int: dict
    denominators: dict

    @property
    def degree(self) -> int:
        return self.meshes.degree

    def space_dim(self, j) -> int:
        if j == 0:
            return self.Y0.dim
        if j in (1, "1*"):
            return self.Y1[0].dim + self.Y1[1].dim
        return self.Y2.dim

    @property
    def dims(self):
        return (self.space_dim(0), self.space_dim(1), self.space_dim(2))

    @property
    def Y1star(self):
        """Rotated vector space: components of Y1 swapped."""
        return (self.Y1[1], self.Y1[0])


def _insert_knot_window(window, degree, z):
    """Split one B-spline by inserting z: N[window] = a N[w1] + b N[w2]."""
    q = degree
    t = list(window)
    pos = bisect.bisect_left(t, z)
    refined = t[:pos] + [z] + t[pos:]
    w1 = tuple(refined[: q + 2])
    w2 = tuple(refined[1:])
    if z >= t[q]:
        a = Fraction(1)
    else:
        a = (z - t[0]) / (t[q] - t[0])
    if z <= t[1]:
        b = Fraction(1)
    else:
        b = 1 - (z - t[1]) / (t[q + 1] - t[1])
    out = []
    if a != 0 and w1[-1] > w1[0]:
        out.append((w1, a))
    if b != 0 and w2[-1] > w2[0]:
        out.append((w2, b))
    return out


def _expand_window(window, degree, missing):
    """Cascade knot insertion: N[window] = sum c_w N[w] on the refined line."""
    chain = {tuple(window): Fraction(1)}
    for z in missing:
        new = {}
        for w, c in chain.items():
            if w[0] < z < w[-1]:
                for w2, a in _insert_knot_window(w, degree, z):
                    new[w2] = new.get(w2, Fraction(0)) + c * a
            else:
                new[w] = new.get(w, Fraction(0)) + c
        chain = new
    return chain


def _abscissa_locator(mesh: TMesh2D, axis, window, degree):
    """Locator of the anchor abscissa of a derivative-target window."""
    table = mesh.xs if axis == 0 else mesh.ys
    q = degree
    if q % 2 == 1:
        v = window[(q + 1) // 2]
        matches = [k for k in range(len(table)) if table[k] == v]
        if len(matches) != 1:
            raise TMeshError("ambiguous line abscissa for derivative target")
        return ("line", matches[0])
    lo, hi = window[q // 2], window[q // 2 + 1]
    if lo == hi:
        matches = [k for k in range(len(table) - 1) if table[k] == lo == table[k + 1]]
        if not matches:
            raise TMeshError("no zero-width span for degenerate abscissa")
        return ("span", matches[0])
    v = (lo + hi) / 2
    matches = [k for k in range(len(table)) if table[k] == v]
    if len(matches) == 1:
        return ("line", matches[0])
    if len(matches) > 1:
        raise TMeshError("derivative-target abscissa lies on a repeated line")
    m = bisect.bisect_right(table, v) - 1
    return ("span", m)


def _collect_hits(mesh: TMesh2D, t_axis, fixed_locator, lo, hi):
    """Values of lines in the transverse axis hit by the fixed ray, within
    the open interval (lo, hi); repeated lines counted with multiplicity."""
    table = mesh.xs if t_axis == 0 else mesh.ys
    out = []
    for k in range(len(table)):
        v = table[k]
        if not (lo < v < hi):
            continue
        hit = (
            mesh._vline_hits(k, fixed_locator)
            if t_axis == 0
            else mesh._hline_hits(k, fixed_locator)
        )
        if hit:
            out.append(v)
    return out


def _derivative_block(src: TsplineSpace, dst: TsplineSpace, direction: int):
    """Exact matrix of the partial derivative mapping src into dst.

    Returns (float_csr, int_csr, denominator).
    """
    p = src.degrees[direction]
    t_dir = 1 - direction
    t_deg = src.degrees[t_dir]
    src_t_scaling = src.scalings[t_dir]
    dst_t_scaling = dst.scalings[t_dir]
    rows, cols, vals = [], [], []
    for a in src.anchors:
        lkvs = (a.lkv1, a.lkv2)
        dec = derivative_decomposition(lkvs[direction], p)
        for sign, (target, coeff) in zip((1, -1), dec):
            if target is None or coeff == 0:
                continue
            T = lkvs[t_dir]
            key = (target, T) if direction == 0 else (T, target)
            tidx = dst.key_index.get(key)
            if tidx is not None:
                rows.append(tidx)
                cols.append(a.index)
                vals.append(Fraction(sign))
                continue
            # transverse window needs refinement on the derived mesh
            floc = _abscissa_locator(dst.mesh, direction, target, dst.degrees[direction])
            refined = _collect_hits(dst.mesh, t_dir, floc, T[0], T[-1])
            t_open = [t for t in T[1:-1] if T[0] < t < T[-1]]
            missing = _multiset_difference(refined, t_open)
            if missing is None:
                raise TMeshError(
                    f"derivative of anchor {a.index}: transverse knots {t_open} "
                    f"not visible on the derived mesh (non-AS input?)"
                )
            chain = _expand_window(T, t_deg, missing)
            for w, c in chain.items():
                key = (target, w) if direction == 0 else (w, target)
                tidx = dst.key_index.get(key)
                if tidx is None:
                    raise TMeshError(
                        f"derivative of anchor {a.index} has no target with "
                        f"local knot vectors {key} in the derived space"
                    )
                scale = c
                if src_t_scaling == "D" and dst_t_scaling == "D":
                    scale = c * (w[-1] - w[0]) / (T[-1] - T[0])
                elif src_t_scaling != dst_t_scaling:
                    raise TMeshError("mixed transverse scalings are not wired")
                rows.append(tidx)
                cols.append(a.index)
                vals.append(sign * scale)
    den = 1
    for v in vals:
        den = math.lcm(den, v.denominator)
    ints = np.array([int(v * den) for v in vals], dtype=np.int64)
    A = sp.coo_matrix((ints, (rows, cols)), shape=(dst.dim, src.dim), dtype=np.int64).tocsr()
    A.sum_duplicates()
    return A.astype(float) / den, A, den


def _multiset_difference(big, small):
    """Multiset big - small, or None if small is not contained in big."""
    big = sorted(big)
    for s in small:
        try:
            big.remove(s)
        except ValueError:
            return None
    return big


def build_tspline_complex(cm: ComplexMeshes) -> TsplineComplex:
    """Spaces with their B/D scalings and the four operator matrices."""
    Y0 = TsplineSpace(cm.M0, ("B", "B"))
    Y1c1 = TsplineSpace(cm.M11, ("D", "B"))
    Y1c2 = TsplineSpace(cm.M12, ("B", "D"))
    Y2 = TsplineSpace(cm.M2, ("D", "D"))
    G1, G1i, dG1 = _derivative_block(Y0, Y1c1, 0)
    G2, G2i, dG2 = _derivative_block(Y0, Y1c2, 1)
    R1, R1i, dR1 = _derivative_block(Y1c1, Y2, 1)
    R2, R2i, dR2 = _derivative_block(Y1c2, Y2, 0)

    def stack_v(a, b, da, db):
        den = math.lcm(da, db)
        return sp.vstack([a * (den // da), b * (den // db)]).tocsr(), den

    def stack_h(a, b, da, db):
        den = math.lcm(da, db)
        return sp.hstack([a * (den // da), b * (den // db)]).tocsr(), den

    grad_i, d_grad = stack_v(G1i, G2i, dG1, dG2)
    rot_i, d_rot = stack_h(-R1i, R2i, dR1, dR2)
    rotvec_i, d_rotvec = stack_v(G2i, -G1i, dG2, dG1)
    div_i, d_div = stack_h(R2i, R1i, dR2, dR1)
    ints = {"grad": grad_i, "rot": rot_i, "rotvec": rotvec_i, "div": div_i}
    dens = {"grad": d_grad, "rot": d_rot, "rotvec": d_rotvec, "div": d_div}
    ops = {k: ints[k].astype(float) / dens[k] for k in ints}
    return TsplineComplex(cm, Y0, (Y1c1, Y1c2), Y2, ops, ints, dens)


def t_diff_matrix(cx: TsplineComplex, which: str):
    """Operator matrix: which in {'grad', 'rot', 'rotvec', 'div'}.

    'rotvec' and 'div' act on the rotated space (components swapped): the
    column blocks of 'div' are ordered (component on M12, component on M11).
    """
    return cx.operators[which]


def verify_t_exactness(cx: TsplineComplex) -> ExactnessReport:
    """Certified rank identities for both T-spline sequences.

    Runs on the integer-scaled matrices (scaling changes no rank and no
    kernel); the constant's coefficient vector is all ones when the basis
    sums to one (checked exactly), otherwise an exact rational kernel vector
    is computed.
    """
    d0, d1, d2 = cx.dims
    oi = cx.operators_int
    rep = verify_sequence([oi["grad"], oi["rot"]], [d0, d1, d2])
    rep2 = verify_sequence([oi["rotvec"], oi["div"]], [d0, d1, d2], prefix="*")
    merged = _merge_reports(rep, rep2)
    merged.identities["dimY0+dimY2=dimY1+1"] = d0 + d2 == d1 + 1
    return merged
