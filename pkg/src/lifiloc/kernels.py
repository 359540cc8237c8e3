"""Backend selection for the pairwise-gain kernels.

At import time the compiled extension (``lifiloc._ckernels``) is preferred;
the NumPy twin is the fallback.  ``LIFILOC_KERNELS=py|c`` forces a backend
(``c`` raises if the extension is missing).  Both backends implement the same
three functions with identical semantics:

    point_to_many(tx_pos, tx_normal, m, min_cos_tx, rx_pos, rx_normals,
                  rx_areas, min_cos_rx) -> (K,) gains
    many_to_point(tx_pos, tx_normals, m, min_cos_tx, rx_pos, rx_normal,
                  rx_area, min_cos_rx) -> (K,) gains
    surface_coupling(centers, normals, areas) -> (K, K) element transfer matrix
"""

import os

from . import _npkernels

_forced = os.environ.get("LIFILOC_KERNELS", "auto").lower()

if _forced == "py":
    _impl = _npkernels
elif _forced == "c":
    from . import _ckernels as _impl  # ImportError here means: extension not built
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _npkernels

BACKEND = _impl.BACKEND
DEGENERATE_DISTANCE = _npkernels.DEGENERATE_DISTANCE

point_to_many = _impl.point_to_many
many_to_point = _impl.many_to_point
surface_coupling = _impl.surface_coupling


def available_backends():
    """Names of the kernel backends importable in this environment."""
    names = ["numpy"]
    try:
        from . import _ckernels  # noqa: F401
        names.append(_ckernels.BACKEND)
    except ImportError:
        pass
    return names
