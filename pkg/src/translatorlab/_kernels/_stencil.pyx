# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled stencil kernels: translator residual, flux residual, Jacobian triplets.

Mirrors translatorlab._kernels.fallback with identical arithmetic ordering so
both backends agree to rounding noise.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

BACKEND_NAME = "compiled"


def residual_interior(cnp.ndarray[cnp.float64_t, ndim=2] U, double hx, double hy):
    cdef Py_ssize_t nx = U.shape[0], ny = U.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((nx - 2, ny - 2))
    cdef Py_ssize_t i, j
    cdef double ux, uy, uxx, uyy, uxy
    cdef double ihx2 = 1.0 / (2.0 * hx), ihy2 = 1.0 / (2.0 * hy)
    cdef double ihxx = 1.0 / (hx * hx), ihyy = 1.0 / (hy * hy)
    cdef double ihxy = 1.0 / (4.0 * hx * hy)
    for i in range(1, nx - 1):
        for j in range(1, ny - 1):
            ux = (U[i + 1, j] - U[i - 1, j]) * ihx2
            uy = (U[i, j + 1] - U[i, j - 1]) * ihy2
            uxx = (U[i + 1, j] - 2.0 * U[i, j] + U[i - 1, j]) * ihxx
            uyy = (U[i, j + 1] - 2.0 * U[i, j] + U[i, j - 1]) * ihyy
            uxy = (U[i + 1, j + 1] - U[i + 1, j - 1] - U[i - 1, j + 1] + U[i - 1, j - 1]) * ihxy
            out[i - 1, j - 1] = (
                (1.0 + uy * uy) * uxx
                - 2.0 * ux * uy * uxy
                + (1.0 + ux * ux) * uyy
                + (1.0 + ux * ux + uy * uy)
            )
    return out


def flux_residual_interior(cnp.ndarray[cnp.float64_t, ndim=2] U, double hx, double hy):
    cdef Py_ssize_t nx = U.shape[0], ny = U.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((nx - 2, ny - 2))
    cdef Py_ssize_t i, j
    cdef double pxr, qxr, pxl, qxl, qyt, pyt, qyb, pyb
    cdef double fxr, fxl, fyt, fyb, ux, uy, s
    for i in range(1, nx - 1):
        for j in range(1, ny - 1):
            pxr = (U[i + 1, j] - U[i, j]) / hx
            qxr = (U[i + 1, j + 1] + U[i, j + 1] - U[i + 1, j - 1] - U[i, j - 1]) / (4.0 * hy)
            fxr = pxr / sqrt(1.0 + pxr * pxr + qxr * qxr)
            pxl = (U[i, j] - U[i - 1, j]) / hx
            qxl = (U[i, j + 1] + U[i - 1, j + 1] - U[i, j - 1] - U[i - 1, j - 1]) / (4.0 * hy)
            fxl = pxl / sqrt(1.0 + pxl * pxl + qxl * qxl)
            qyt = (U[i, j + 1] - U[i, j]) / hy
            pyt = (U[i + 1, j + 1] + U[i + 1, j] - U[i - 1, j + 1] - U[i - 1, j]) / (4.0 * hx)
            fyt = qyt / sqrt(1.0 + pyt * pyt + qyt * qyt)
            qyb = (U[i, j] - U[i, j - 1]) / hy
            pyb = (U[i + 1, j] + U[i + 1, j - 1] - U[i - 1, j] - U[i - 1, j - 1]) / (4.0 * hx)
            fyb = qyb / sqrt(1.0 + pyb * pyb + qyb * qyb)
            ux = (U[i + 1, j] - U[i - 1, j]) / (2.0 * hx)
            uy = (U[i, j + 1] - U[i, j - 1]) / (2.0 * hy)
            s = sqrt(1.0 + ux * ux + uy * uy)
            out[i - 1, j - 1] = (fxr - fxl) / hx + (fyt - fyb) / hy + 1.0 / s
    return out


def jacobian_triplets(cnp.ndarray[cnp.float64_t, ndim=2] U, double hx, double hy):
    cdef Py_ssize_t nx = U.shape[0], ny = U.shape[1]
    cdef Py_ssize_t nix = nx - 2, niy = ny - 2
    cdef Py_ssize_t n = nix * niy
    cdef cnp.ndarray[cnp.int64_t, ndim=1] rows = np.empty(9 * n, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] cols = np.empty(9 * n, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] vals = np.empty(9 * n, dtype=np.float64)
    cdef Py_ssize_t i, j, k, row
    cdef double ux, uy, uxx, uyy, uxy, A, B, C, Dx, Dy, cxx, cyy, cxy, cx, cy
    cdef double ihx2 = 1.0 / (2.0 * hx), ihy2 = 1.0 / (2.0 * hy)
    cdef double ihxx = 1.0 / (hx * hx), ihyy = 1.0 / (hy * hy)
    cdef double ihxy = 1.0 / (4.0 * hx * hy)
    # neighbor order matches the fallback's stencil list
    cdef long di[9]
    cdef long dj[9]
    di[0] = 1; dj[0] = 0
    di[1] = -1; dj[1] = 0
    di[2] = 0; dj[2] = 1
    di[3] = 0; dj[3] = -1
    di[4] = 0; dj[4] = 0
    di[5] = 1; dj[5] = 1
    di[6] = -1; dj[6] = -1
    di[7] = 1; dj[7] = -1
    di[8] = -1; dj[8] = 1
    cdef double coef[9]
    for i in range(1, nx - 1):
        for j in range(1, ny - 1):
            ux = (U[i + 1, j] - U[i - 1, j]) * ihx2
            uy = (U[i, j + 1] - U[i, j - 1]) * ihy2
            uxx = (U[i + 1, j] - 2.0 * U[i, j] + U[i - 1, j]) * ihxx
            uyy = (U[i, j + 1] - 2.0 * U[i, j] + U[i, j - 1]) * ihyy
            uxy = (U[i + 1, j + 1] - U[i + 1, j - 1] - U[i - 1, j + 1] + U[i - 1, j - 1]) * ihxy
            A = 1.0 + uy * uy
            B = -2.0 * ux * uy
            C = 1.0 + ux * ux
            Dx = 2.0 * (ux * uyy - uy * uxy + ux)
            Dy = 2.0 * (uy * uxx - ux * uxy + uy)
            cxx = A * ihxx
            cyy = C * ihyy
            cxy = B * ihxy
            cx = Dx * ihx2
            cy = Dy * ihy2
            coef[0] = cxx + cx
            coef[1] = cxx - cx
            coef[2] = cyy + cy
            coef[3] = cyy - cy
            coef[4] = -2.0 * cxx - 2.0 * cyy
            coef[5] = cxy
            coef[6] = cxy
            coef[7] = -cxy
            coef[8] = -cxy
            row = (i - 1) * niy + (j - 1)
            for k in range(9):
                rows[k * n + row] = row
                cols[k * n + row] = (i + di[k]) * ny + (j + dj[k])
                vals[k * n + row] = coef[k]
    return rows, cols, vals
