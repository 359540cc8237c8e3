# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled twin of ``_npkernels``: same formulas, per-pair scalar loops.

Keep the per-element arithmetic in the same order as the NumPy code so the
two backends agree to the last few ulps.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport pow, sqrt

from .errors import DegenerateGeometryError

cnp.import_array()

BACKEND = "cython"

cdef double DEGENERATE2 = 1e-18  # (1e-9 m)^2
cdef double TWO_PI = 6.283185307179586476925286766559


def point_to_many(tx_pos, tx_normal, double m, double min_cos_tx,
                  rx_pos, rx_normals, rx_areas, double min_cos_rx,
                  bint zero_degenerate=False):
    cdef double[:, ::1] rp = np.ascontiguousarray(rx_pos, dtype=np.float64)
    cdef double[:, ::1] rn = np.ascontiguousarray(rx_normals, dtype=np.float64)
    cdef double[::1] ra = np.ascontiguousarray(rx_areas, dtype=np.float64)
    cdef double tx, ty, tz, nx, ny, nz
    tx, ty, tz = tx_pos[0], tx_pos[1], tx_pos[2]
    nx, ny, nz = tx_normal[0], tx_normal[1], tx_normal[2]
    cdef Py_ssize_t k, n = rp.shape[0]
    out_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double dx, dy, dz, d2, d, cphi, cpsi
    cdef bint degenerate = False
    for k in range(n):
        dx = rp[k, 0] - tx
        dy = rp[k, 1] - ty
        dz = rp[k, 2] - tz
        d2 = dx * dx + dy * dy + dz * dz
        if d2 < DEGENERATE2:
            if zero_degenerate:
                continue  # in-plane limit of a patch hosting the point
            degenerate = True
            break
        d = sqrt(d2)
        cphi = (dx * nx + dy * ny + dz * nz) / d
        cpsi = -(dx * rn[k, 0] + dy * rn[k, 1] + dz * rn[k, 2]) / d
        if cphi >= min_cos_tx and cpsi >= min_cos_rx:
            out[k] = (m + 1.0) * ra[k] / (TWO_PI * d2) * pow(cphi, m) * cpsi
    if degenerate:
        raise DegenerateGeometryError("emitter coincides with a receiver")
    return out_arr


def many_to_point(tx_pos, tx_normals, double m, double min_cos_tx,
                  rx_pos, rx_normal, double rx_area, double min_cos_rx,
                  bint zero_degenerate=False):
    cdef double[:, ::1] tp = np.ascontiguousarray(tx_pos, dtype=np.float64)
    cdef double[:, ::1] tn = np.ascontiguousarray(tx_normals, dtype=np.float64)
    cdef double rx, ry, rz, nx, ny, nz
    rx, ry, rz = rx_pos[0], rx_pos[1], rx_pos[2]
    nx, ny, nz = rx_normal[0], rx_normal[1], rx_normal[2]
    cdef Py_ssize_t k, n = tp.shape[0]
    out_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double dx, dy, dz, d2, d, cphi, cpsi
    cdef bint degenerate = False
    for k in range(n):
        dx = rx - tp[k, 0]
        dy = ry - tp[k, 1]
        dz = rz - tp[k, 2]
        d2 = dx * dx + dy * dy + dz * dz
        if d2 < DEGENERATE2:
            if zero_degenerate:
                continue
            degenerate = True
            break
        d = sqrt(d2)
        cphi = (dx * tn[k, 0] + dy * tn[k, 1] + dz * tn[k, 2]) / d
        cpsi = -(dx * nx + dy * ny + dz * nz) / d
        if cphi >= min_cos_tx and cpsi >= min_cos_rx:
            out[k] = (m + 1.0) * rx_area / (TWO_PI * d2) * pow(cphi, m) * cpsi
    if degenerate:
        raise DegenerateGeometryError("a receiver coincides with an emitter")
    return out_arr


def surface_coupling(centers, normals, areas):
    cdef double[:, ::1] c = np.ascontiguousarray(centers, dtype=np.float64)
    cdef double[:, ::1] nrm = np.ascontiguousarray(normals, dtype=np.float64)
    cdef double[::1] a = np.ascontiguousarray(areas, dtype=np.float64)
    cdef Py_ssize_t k, l, n = c.shape[0]
    out_arr = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double dx, dy, dz, d2, d, ce, cr, geom
    for k in range(n):
        # geometric factor is symmetric in (k, l); areas are not
        for l in range(k + 1, n):
            dx = c[k, 0] - c[l, 0]
            dy = c[k, 1] - c[l, 1]
            dz = c[k, 2] - c[l, 2]
            d2 = dx * dx + dy * dy + dz * dz
            d = sqrt(d2)
            ce = (dx * nrm[l, 0] + dy * nrm[l, 1] + dz * nrm[l, 2]) / d
            cr = -(dx * nrm[k, 0] + dy * nrm[k, 1] + dz * nrm[k, 2]) / d
            if ce > 0.0 and cr > 0.0:
                geom = ce * cr / (3.141592653589793 * d2)
                out[k, l] = a[k] * geom
                out[l, k] = a[l] * geom
    return out_arr
