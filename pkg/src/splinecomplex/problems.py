"""Ready-made benchmark problems: square eigenvalues, L-section, cylinder
sector source, straight-guide scattering.

These drivers wire meshes, geometries, glue, assembly and solvers together
and are what the command-line front end runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .assembly import (
    Complex3D,
    Scalar2D,
    Vector2D,
    assemble_load_3d,
    assemble_matrix_2d,
    assemble_matrix_3d,
    assemble_port_boundary,
    dirichlet_dofs_2d,
    dirichlet_dofs_3d,
    hcurl_error_3d,
)
from .benchmarks import (
    cylinder_section_raw_tmesh,
    cylinder_sector_patches,
    lsection_patches,
    lsection_raw_tmesh,
    prism_patch,
    square_geometry,
    square_raw_tmesh,
    waveguide_geometry,
)
from .bspline import KnotVector
from .multipatch import Interface, PatchSet, build_glue
from .solvers import EigenResult, compute_scattering, solve_generalized_eig, solve_port_mode, solve_source
from .tmesh import TMesh2D, TsplineSpace, tensor_raw_tmesh
from .tspline import build_tspline_complex, derive_complex_meshes

ALL_FACES_2D = ((0, 0), (0, 1), (1, 0), (1, 1))

__all__ = [
    "square_eigenproblem",
    "lsection_laplace_eigenproblem",
    "thick_l_eigenproblem",
    "cylinder_sector_source",
    "waveguide_scattering",
]


@dataclass
class EigenRun:
    dofs: int
    system_size: int
    result: EigenResult


def square_eigenproblem(level: int, degree: int = 3, count: int = None, threads: int = 1, zero_tol=None) -> EigenRun:
    """Maxwell cavity eigenvalues on (0, pi)^2 with the benchmark T-meshes.

    ``dofs`` reports the dimension of the rot-conforming space before the
    tangential boundary conditions are eliminated.
    """
    raw = square_raw_tmesh(level)
    tcx = build_tspline_complex(derive_complex_meshes(raw, degree))
    v2 = Vector2D.from_complex(tcx)
    geom = square_geometry()
    K = assemble_matrix_2d(v2, geom, "rotrot", threads=threads)
    M = assemble_matrix_2d(v2, geom, "mass", threads=threads)
    constrained = dirichlet_dofs_2d(v2, ALL_FACES_2D)
    free = np.setdiff1d(np.arange(v2.dim), constrained)
    res = solve_generalized_eig(K[np.ix_(free, free)], M[np.ix_(free, free)], count, zero_tol=zero_tol)
    return EigenRun(v2.dim, free.size, res)


def _lsection_patchset(level: int, degree: int):
    raw = lsection_raw_tmesh(level, degree)
    geoms = lsection_patches()
    spaces = [Scalar2D(TsplineSpace(TMesh2D.from_raw(raw, (degree, degree)))) for _ in geoms]
    interfaces = [
        Interface((0, (1, 0)), (1, (0, 0))),
        Interface((1, (1, 0)), (2, (0, 0))),
    ]
    dirichlet = {
        0: [(0, 0), (0, 1), (1, 1)],
        1: [(0, 1), (1, 1)],
        2: [(0, 1), (1, 0), (1, 1)],
    }
    return PatchSet(geoms, spaces, interfaces), dirichlet


def lsection_laplace_eigenproblem(level: int, degree: int = 4, count: int = 5, threads: int = 1, zero_tol=None) -> EigenRun:
    """Dirichlet Laplacian eigenvalues of the L-shaped section, three glued
    patches with corner-refined T-meshes (the first eigenvalue is the
    L-membrane benchmark value)."""
    ps, dirichlet = _lsection_patchset(level, degree)
    glue = build_glue(ps)
    Ks = [assemble_matrix_2d(s, g, "gradgrad", threads=threads) for s, g in zip(ps.spaces, ps.geoms)]
    Ms = [assemble_matrix_2d(s, g, "mass", threads=threads) for s, g in zip(ps.spaces, ps.geoms)]
    K = glue.global_matrix(Ks)
    M = glue.global_matrix(Ms)
    constrained = set()
    for k, faces in dirichlet.items():
        constrained.update(glue.global_dofs_for(k, dirichlet_dofs_2d(ps.spaces[k], faces)))
    free = np.setdiff1d(np.arange(glue.ndof), sorted(constrained))
    res = solve_generalized_eig(K[np.ix_(free, free)].toarray(), M[np.ix_(free, free)].toarray(), count, zero_tol=zero_tol)
    return EigenRun(glue.ndof, free.size, res)


def thick_l_eigenproblem(level: int, degree: int = 4, nz: int = None, count: int = 5, threads: int = 1, zero_tol=None) -> EigenRun:
    """Maxwell cavity eigenvalues of the thick L (section times (0,1))."""
    nz = nz or max(2, 2 ** (1 + level))
    raw = lsection_raw_tmesh(level, degree)
    kv_z = KnotVector.uniform(degree, nz)
    geoms = [prism_patch(_rot(k)) for k in range(3)]
    spaces = []
    for _ in range(3):
        tcx = build_tspline_complex(derive_complex_meshes(raw, degree))
        spaces.append(Complex3D(tcx, kv_z))
    interfaces = [
        Interface((0, (1, 0)), (1, (0, 0))),
        Interface((1, (1, 0)), (2, (0, 0))),
    ]
    ps = PatchSet(geoms, spaces, interfaces)
    glue = build_glue(ps)
    Ks = [assemble_matrix_3d(s, g, "curlcurl", threads=threads) for s, g in zip(spaces, geoms)]
    Ms = [assemble_matrix_3d(s, g, "mass", threads=threads) for s, g in zip(spaces, geoms)]
    K = glue.global_matrix(Ks)
    M = glue.global_matrix(Ms)
    dirichlet = {
        0: [(0, 0), (0, 1), (1, 1), (2, 0), (2, 1)],
        1: [(0, 1), (1, 1), (2, 0), (2, 1)],
        2: [(0, 1), (1, 0), (1, 1), (2, 0), (2, 1)],
    }
    constrained = set()
    for k, faces in dirichlet.items():
        constrained.update(glue.global_dofs_for(k, dirichlet_dofs_3d(spaces[k], faces)))
    free = np.setdiff1d(np.arange(glue.ndof), sorted(constrained))
    res = solve_generalized_eig(K[np.ix_(free, free)].toarray(), M[np.ix_(free, free)].toarray(), count, zero_tol=zero_tol)
    return EigenRun(glue.ndof, free.size, res)


def _rot(k):
    mats = [
        np.array([[0.0, -1.0], [1.0, 0.0]]),
        np.eye(2),
        np.array([[0.0, 1.0], [-1.0, 0.0]]),
    ]
    return mats[k]


# -- cylinder sector --------------------------------------------------------------


def _cyl_theta(x, y):
    t = np.arctan2(y, x)
    return np.where(t < -1e-12, t + 2 * np.pi, t)


def cyl_exact_field(X):
    """grad(r^(2/3) sin(2 theta/3) sin(pi z)) on the three-quarter cylinder."""
    x, y, z = X[:, 0], X[:, 1], X[:, 2]
    r = np.hypot(x, y)
    t = _cyl_theta(x, y)
    r = np.maximum(r, 1e-300)
    sz = np.sin(np.pi * z)
    ux = -(2.0 / 3.0) * r ** (-1.0 / 3.0) * np.sin(t / 3.0) * sz
    uy = (2.0 / 3.0) * r ** (-1.0 / 3.0) * np.cos(t / 3.0) * sz
    uz = np.pi * r ** (2.0 / 3.0) * np.sin(2.0 * t / 3.0) * np.cos(np.pi * z)
    return np.column_stack([ux, uy, uz])


def cyl_zero_curl(X):
    return np.zeros((X.shape[0], 3))


def cylinder_sector_source(level: int, degree: int = 3, nz: int = None, tensor: bool = False, threads: int = 1):
    """Curl-curl source problem on 3/4 of the cylinder with a singular exact
    gradient field; returns (total dofs, free dofs, H(curl) error).

    The vertical mesh refines with the level like the section does.
    """
    nz = nz or 2 ** (level + 1)
    raw = cylinder_section_raw_tmesh(level)
    if tensor:
        raw = tensor_raw_tmesh(raw.breakpoints_x, raw.breakpoints_y)
    kv_z = KnotVector.uniform(degree, nz)
    geoms = cylinder_sector_patches()
    spaces = []
    for _ in range(3):
        tcx = build_tspline_complex(derive_complex_meshes(raw, degree))
        spaces.append(Complex3D(tcx, kv_z))
    interfaces = [
        Interface((0, (1, 1)), (1, (1, 0))),
        Interface((1, (1, 1)), (2, (1, 0))),
    ]
    ps = PatchSet(geoms, spaces, interfaces)
    glue = build_glue(ps)
    Ks = [assemble_matrix_3d(s, g, "curlcurl", threads=threads) for s, g in zip(spaces, geoms)]
    Ms = [assemble_matrix_3d(s, g, "mass", threads=threads) for s, g in zip(spaces, geoms)]
    bs = [assemble_load_3d(s, g, cyl_exact_field, threads=threads) for s, g in zip(spaces, geoms)]
    A = glue.global_matrix([K + M for K, M in zip(Ks, Ms)])
    b = glue.global_vector(bs)
    dirichlet = {0: [(1, 0)], 2: [(1, 1)]}
    constrained = set()
    for k, faces in dirichlet.items():
        constrained.update(glue.global_dofs_for(k, dirichlet_dofs_3d(spaces[k], faces)))
    free = np.setdiff1d(np.arange(glue.ndof), sorted(constrained))
    x = np.zeros(glue.ndof)
    x[free] = solve_source(A[np.ix_(free, free)].tocsc(), b[free])
    err2 = 0.0
    for k in range(3):
        ck = glue.scatters[k] @ x
        e_l2, e_curl = hcurl_error_3d(spaces[k], geoms[k], ck, cyl_exact_field, cyl_zero_curl)
        err2 += e_l2**2 + e_curl**2
    return glue.ndof, free.size, math.sqrt(err2)


# -- straight waveguide ----------------------------------------------------------


def waveguide_scattering(k: float = 1.2, degree: int = 2, n_section: int = 3, nz: int = 2, length: float = 1.0, threads: int = 1):
    """TE10 pass-through on a straight guide with square section (0, pi)^2.

    Returns a dict with the port cutoff, reflection and transmission
    coefficients and the system size.
    """
    b = [i / n_section for i in range(n_section + 1)]
    raw = tensor_raw_tmesh(b, b)
    tcx = build_tspline_complex(derive_complex_meshes(raw, degree))
    kv_z = KnotVector.uniform(degree, nz)
    npatch = 2
    geoms = waveguide_geometry(length, npatch)
    section_geom = square_geometry()
    spaces = [Complex3D(tcx, kv_z) for _ in range(npatch)]
    interfaces = [Interface((0, (2, 1)), (1, (2, 0)))]
    ps = PatchSet(geoms, spaces, interfaces)
    glue = build_glue(ps)

    # port mode on the section
    v2 = Vector2D.from_complex(tcx)
    K2 = assemble_matrix_2d(v2, section_geom, "rotrot", threads=threads)
    M2 = assemble_matrix_2d(v2, section_geom, "mass", threads=threads)
    c2d = dirichlet_dofs_2d(v2, ALL_FACES_2D)
    free2 = np.setdiff1d(np.arange(v2.dim), c2d)
    k10sq, e_free = solve_port_mode(K2[np.ix_(free2, free2)].toarray(), M2[np.ix_(free2, free2)].toarray())
    e10 = np.zeros(v2.dim)
    e10[free2] = e_free
    beta = math.sqrt(k * k - k10sq)

    Ks = [assemble_matrix_3d(s, g, "curlcurl", threads=threads) for s, g in zip(spaces, geoms)]
    Ms = [assemble_matrix_3d(s, g, "mass", threads=threads) for s, g in zip(spaces, geoms)]
    K = glue.global_matrix(Ks)
    M = glue.global_matrix(Ms)
    B0, tmap0 = assemble_port_boundary(spaces[0], section_geom, 0)
    B1, tmap1 = assemble_port_boundary(spaces[1], section_geom, 1)
    Bg = glue.scatters[0].T @ B0 @ glue.scatters[0] + glue.scatters[1].T @ B1 @ glue.scatters[1]
    z1, z2 = 0.0, length
    Me = M2 @ e10
    load0 = np.zeros(spaces[0].x1_dim())
    load0[tmap0] = Me * np.exp(-1j * beta * z1).real  # z1 = 0
    bg = glue.scatters[0].T @ load0

    side_faces = [(0, 0), (0, 1), (1, 0), (1, 1)]
    constrained = set()
    for kk in range(npatch):
        constrained.update(glue.global_dofs_for(kk, dirichlet_dofs_3d(spaces[kk], side_faces)))
    free = np.setdiff1d(np.arange(glue.ndof), sorted(constrained))
    A = (K - k * k * M).astype(complex) + 1j * beta * Bg
    rhs = 2j * beta * bg
    x = np.zeros(glue.ndof, dtype=complex)
    sol = solve_source(A[np.ix_(free, free)].tocsc(), rhs[free], tol=1e-8)
    x[free] = sol

    c0 = (glue.scatters[0] @ x)[tmap0]
    c1 = (glue.scatters[1] @ x)[tmap1]
    I1 = complex(c0 @ Me)
    I2 = complex(c1 @ Me)
    norm = float(e10 @ Me)
    R, T = compute_scattering(I1, I2, norm, beta, z1, z2)
    return {
        "k10_squared": k10sq,
        "beta": beta,
        "R": R,
        "T": T,
        "dofs": glue.ndof,
        "free_dofs": int(free.size),
    }
