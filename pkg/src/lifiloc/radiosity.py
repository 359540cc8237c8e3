"""Surface discretization and the infinite-reflection transfer operator.

The room's interior surfaces are tiled into K small patches that re-emit as
unit-order Lambertian sources over a 90-degree cone.  With E the K x K
patch-to-patch transfer matrix and G the diagonal reflectivity matrix, the
diffuse gain between an emitter vector t and a receiver vector r summed over
every reflection order is

    h = r^T G (I - E G)^{-1} t.

Factoring (I - E G) once makes each subsequent query a pair of triangular
solves (O(K^2)); reflectivities below 1 keep the spectral radius of E G
below 1, so the inverse exists and equals the bounce series.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import kernels
from .config import FACES, RoomConfig
from .errors import ConfigError, NumericsError


def discretize_room(config: RoomConfig):
    """Tile all six interior faces into square-ish patches.

    Returns (centers (K,3), normals (K,3), areas (K,), face_ids (K,)).
    Patches are squares of side element_res_m; edge rows/columns are clipped
    when the resolution does not divide a face.  Normals point into the room.
    """
    res = config.element_res_m
    l, w, h = config.l, config.w, config.h

    def axis_cells(length, offset):
        edges = np.append(np.arange(0.0, length, res), length)
        if edges[-1] - edges[-2] < 1e-12:  # res divides length exactly
            edges = edges[:-1].copy()
            edges[-1] = length
        centers = 0.5 * (edges[:-1] + edges[1:]) + offset
        widths = np.diff(edges)
        return centers, widths

    xc, xw = axis_cells(l, -l / 2)
    yc, yw = axis_cells(w, -w / 2)
    zc, zw = axis_cells(h, 0.0)

    def face_grid(u_c, u_w, v_c, v_w):
        cu, cv = np.meshgrid(u_c, v_c, indexing="ij")
        wu, wv = np.meshgrid(u_w, v_w, indexing="ij")
        return cu.ravel(), cv.ravel(), (wu * wv).ravel()

    centers, normals, areas, face_ids = [], [], [], []

    def add_face(name, cu, cv, cell_areas, fixed_axis, fixed_value, normal):
        n = len(cu)
        pts = np.empty((n, 3))
        axes = [0, 1, 2]
        axes.remove(fixed_axis)
        pts[:, axes[0]] = cu
        pts[:, axes[1]] = cv
        pts[:, fixed_axis] = fixed_value
        centers.append(pts)
        normals.append(np.tile(normal, (n, 1)))
        areas.append(cell_areas)
        face_ids.append(np.full(n, FACES.index(name)))

    gx, gy, ga = face_grid(xc, xw, yc, yw)
    add_face("floor", gx, gy, ga, 2, 0.0, [0.0, 0.0, 1.0])
    add_face("ceiling", gx, gy, ga, 2, h, [0.0, 0.0, -1.0])
    gy2, gz2, ga2 = face_grid(yc, yw, zc, zw)
    add_face("wall_xlo", gy2, gz2, ga2, 0, -l / 2, [1.0, 0.0, 0.0])
    add_face("wall_xhi", gy2, gz2, ga2, 0, l / 2, [-1.0, 0.0, 0.0])
    gx2, gz2, ga2 = face_grid(xc, xw, zc, zw)
    add_face("wall_ylo", gx2, gz2, ga2, 1, -w / 2, [0.0, 1.0, 0.0])
    add_face("wall_yhi", gx2, gz2, ga2, 1, w / 2, [0.0, -1.0, 0.0])

    centers = np.concatenate(centers)
    normals = np.concatenate(normals)
    areas = np.concatenate(areas)
    face_ids = np.concatenate(face_ids)
    if len(centers) > config.element_cap:
        raise ConfigError(
            f"discretization would produce {len(centers)} elements "
            f"(cap {config.element_cap}); coarsen element_res_m or raise the cap")
    return centers, normals, areas, face_ids


@dataclass
class RadiosityCache:
    """Immutable per-room reflection solver: elements + factored (I - E G)."""

    element_centers: np.ndarray
    element_normals: np.ndarray
    element_areas: np.ndarray
    element_zeta: np.ndarray
    coupling: np.ndarray          # E
    _lu: tuple                    # LU of (I - E G)

    @property
    def n_elements(self) -> int:
        return len(self.element_centers)

    def apply(self, t: np.ndarray) -> np.ndarray:
        """Map an emission vector t to G (I - E G)^{-1} t."""
        return self.element_zeta * scipy.linalg.lu_solve(self._lu, t)

    def receiver_row(self, r: np.ndarray) -> np.ndarray:
        """Vector u with u . t == r^T G (I - E G)^{-1} t for every t.

        Precomputing u per physical receiver turns each diffuse-gain query
        into a length-K dot product.
        """
        return scipy.linalg.lu_solve(self._lu, self.element_zeta * r, trans=1)

    def diffuse_gain(self, r: np.ndarray, t: np.ndarray) -> float:
        return float(r @ self.apply(t))


def build_radiosity_cache(config: RoomConfig) -> RadiosityCache:
    """Discretize the room and factor the infinite-bounce operator once."""
    centers, normals, areas, face_ids = discretize_room(config)
    zeta = config.zeta[face_ids]
    coupling = kernels.surface_coupling(centers, normals, areas)
    system = -coupling * zeta[None, :]
    np.fill_diagonal(system, system.diagonal() + 1.0)
    lu, piv = scipy.linalg.lu_factor(system, check_finite=False)
    diag = np.abs(np.diag(lu))
    if not np.all(np.isfinite(lu)) or diag.min() <= diag.max() * 1e-14:
        raise NumericsError("I - E*G is numerically singular; "
                            "check reflectivities (< 1) and the discretization")
    return RadiosityCache(
        element_centers=centers,
        element_normals=normals,
        element_areas=areas,
        element_zeta=zeta,
        coupling=coupling,
        _lu=(lu, piv),
    )
