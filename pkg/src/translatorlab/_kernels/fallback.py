"""Vectorized numpy reference implementation of the stencil kernels.

The compiled Cython module mirrors these routines loop-for-loop with the same
operation ordering; ``translatorlab._kernels`` picks whichever is available.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"


def residual_interior(U: np.ndarray, hx: float, hy: float) -> np.ndarray:
    """Nondivergence translator residual on interior nodes, shape (nx-2, ny-2).

    R = (1+uy^2) uxx - 2 ux uy uxy + (1+ux^2) uyy + (1 + ux^2 + uy^2)
    with classical second-order central differences.
    """
    ux = (U[2:, 1:-1] - U[:-2, 1:-1]) / (2.0 * hx)
    uy = (U[1:-1, 2:] - U[1:-1, :-2]) / (2.0 * hy)
    uxx = (U[2:, 1:-1] - 2.0 * U[1:-1, 1:-1] + U[:-2, 1:-1]) / (hx * hx)
    uyy = (U[1:-1, 2:] - 2.0 * U[1:-1, 1:-1] + U[1:-1, :-2]) / (hy * hy)
    uxy = (U[2:, 2:] - U[2:, :-2] - U[:-2, 2:] + U[:-2, :-2]) / (4.0 * hx * hy)
    return (
        (1.0 + uy * uy) * uxx
        - 2.0 * ux * uy * uxy
        + (1.0 + ux * ux) * uyy
        + (1.0 + ux * ux + uy * uy)
    )


def flux_residual_interior(U: np.ndarray, hx: float, hy: float) -> np.ndarray:
    """Divergence-form residual Div(Du/s) + 1/s via midpoint flux differencing.

    Fluxes are evaluated at cell-edge midpoints with the transverse derivative
    averaged from the four surrounding nodes.  On an exact solution this form
    stays O(h^2) uniformly up to the strip edges because the saturating flux
    Du/s has bounded derivatives even where Du blows up.
    """
    px = (U[1:, :] - U[:-1, :]) / hx
    qx = (U[1:, 2:] + U[:-1, 2:] - U[1:, :-2] - U[:-1, :-2]) / (4.0 * hy)
    sx = np.sqrt(1.0 + px[:, 1:-1] ** 2 + qx**2)
    Fx = px[:, 1:-1] / sx

    qy = (U[:, 1:] - U[:, :-1]) / hy
    py = (U[2:, 1:] + U[2:, :-1] - U[:-2, 1:] - U[:-2, :-1]) / (4.0 * hx)
    sy = np.sqrt(1.0 + py**2 + qy[1:-1, :] ** 2)
    Fy = qy[1:-1, :] / sy

    ux = (U[2:, 1:-1] - U[:-2, 1:-1]) / (2.0 * hx)
    uy = (U[1:-1, 2:] - U[1:-1, :-2]) / (2.0 * hy)
    s = np.sqrt(1.0 + ux**2 + uy**2)
    return (Fx[1:, :] - Fx[:-1, :]) / hx + (Fy[:, 1:] - Fy[:, :-1]) / hy + 1.0 / s


def jacobian_triplets(U: np.ndarray, hx: float, hy: float):
    """COO triplets of the residual's exact Frechet derivative.

    Rows index interior nodes (k = i_int*(ny-2) + j_int); columns index all
    grid nodes (k = i*ny + j), so boundary coupling stays available to callers
    that apply the operator to full-grid perturbations.
    """
    nx, ny = U.shape
    ux = (U[2:, 1:-1] - U[:-2, 1:-1]) / (2.0 * hx)
    uy = (U[1:-1, 2:] - U[1:-1, :-2]) / (2.0 * hy)
    uxx = (U[2:, 1:-1] - 2.0 * U[1:-1, 1:-1] + U[:-2, 1:-1]) / (hx * hx)
    uyy = (U[1:-1, 2:] - 2.0 * U[1:-1, 1:-1] + U[1:-1, :-2]) / (hy * hy)
    uxy = (U[2:, 2:] - U[2:, :-2] - U[:-2, 2:] + U[:-2, :-2]) / (4.0 * hx * hy)

    A = 1.0 + uy * uy
    B = -2.0 * ux * uy
    C = 1.0 + ux * ux
    Dx = 2.0 * (ux * uyy - uy * uxy + ux)
    Dy = 2.0 * (uy * uxx - ux * uxy + uy)

    nix, niy = nx - 2, ny - 2
    I, J = np.meshgrid(np.arange(1, nx - 1), np.arange(1, ny - 1), indexing="ij")
    row = (I - 1) * niy + (J - 1)

    cxx = A / (hx * hx)
    cyy = C / (hy * hy)
    cxy = B / (4.0 * hx * hy)
    cx = Dx / (2.0 * hx)
    cy = Dy / (2.0 * hy)

    stencil = [
        (1, 0, cxx + cx),
        (-1, 0, cxx - cx),
        (0, 1, cyy + cy),
        (0, -1, cyy - cy),
        (0, 0, -2.0 * cxx - 2.0 * cyy),
        (1, 1, cxy),
        (-1, -1, cxy),
        (1, -1, -cxy),
        (-1, 1, -cxy),
    ]
    n = nix * niy
    rows = np.empty(9 * n, dtype=np.int64)
    cols = np.empty(9 * n, dtype=np.int64)
    vals = np.empty(9 * n, dtype=np.float64)
    for k, (di, dj, coef) in enumerate(stencil):
        sl = slice(k * n, (k + 1) * n)
        rows[sl] = row.ravel()
        cols[sl] = ((I + di) * ny + (J + dj)).ravel()
        vals[sl] = coef.ravel()
    return rows, cols, vals
