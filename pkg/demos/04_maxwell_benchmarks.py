#!/usr/bin/env python3
"""The desk-scale Maxwell benchmarks, end to end.

Square cavity eigenvalues on the T-meshed (0, pi)^2 (compare m^2 + n^2),
the L-section Dirichlet eigenvalue against the L-membrane reference, and
the straight-guide TE10 pass-through with reflection/transmission
coefficients.  Expect a couple of minutes in total.
"""

import numpy as np

from splinecomplex.problems import (
    lsection_laplace_eigenproblem,
    square_eigenproblem,
    waveguide_scattering,
)

print("== square cavity, degree 3 ==")
for level in (0, 1):
    run = square_eigenproblem(level)
    nz = run.result.nonzero[:8]
    print(f"level {level}: dofs {run.dofs}, zero modes {run.result.zero_count}")
    print("  first nonzero eigenvalues:", np.round(nz, 5))

print("\n== L-shaped section, degree 4, corner-refined T-meshes ==")
reference = 9.63972384472
for level in (0, 1, 2):
    run = lsection_laplace_eigenproblem(level)
    lam = float(run.result.values[0])
    print(f"level {level}: dofs {run.dofs}, lambda1 = {lam:.8f}, gap = {lam - reference:.2e}")

print("\n== straight waveguide pass-through ==")
res = waveguide_scattering()
print(f"port cutoff k10^2 = {res['k10_squared']:.6f}")
print(f"|R| = {abs(res['R']):.3e}   |T| = {abs(res['T']):.8f}")
