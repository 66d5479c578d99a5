"""Kernel backend selection.

The compiled extension ``mttspo._kernels`` is used when it imports; otherwise
the pure-Python module takes over.  Set ``MTTSPO_PURE_PYTHON=1`` to force the
fallback (the test-suite and the kernel benchmark use this to compare both).
"""

import importlib
import os

_FORCE_PY = os.environ.get("MTTSPO_PURE_PYTHON", "").strip() not in ("", "0")


def load_backend(name=None):
    """Return the kernel module called ``name`` ("compiled" or "python")."""
    if name == "python":
        return importlib.import_module("mttspo._kernels_py")
    if name == "compiled":
        return importlib.import_module("mttspo._kernels")
    if name is not None:
        raise ValueError(f"unknown kernel backend {name!r}")
    if not _FORCE_PY:
        try:
            return importlib.import_module("mttspo._kernels")
        except ImportError:
            pass
    return importlib.import_module("mttspo._kernels_py")


def available_backends():
    names = ["python"]
    try:
        importlib.import_module("mttspo._kernels")
    except ImportError:
        pass
    else:
        names.insert(0, "compiled")
    return names


_impl = load_backend()

BACKEND = _impl.BACKEND
prepare_edges = _impl.prepare_edges
prepare_graph = _impl.prepare_graph
orient = _impl.orient
point_in_interior = _impl.point_in_interior
segment_is_free = _impl.segment_is_free
visible_mask = _impl.visible_mask
visible_intervals = _impl.visible_intervals
catch_window = _impl.catch_window
earliest_intercept = _impl.earliest_intercept
astar = _impl.astar
