import math
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mttspo import kernels  # noqa: E402
from mttspo.geometry import ObstacleSet, Point  # noqa: E402
from mttspo.model import Instance, TargetWindow  # noqa: E402


def square(x0, y0, x1, y1):
    return [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]


def obstacles(*rects):
    return ObstacleSet.from_polygons([square(*r) for r in rects])


def window(i, t0, tf, p0, vel=(0.0, 0.0)):
    return TargetWindow(i, float(t0), float(tf), Point(float(p0[0]), float(p0[1])),
                        (float(vel[0]), float(vel[1])))


def instance(targets, depot=(0.0, 0.0), obs=None, v_max=1.0, grid=None):
    """``targets`` is a list of window lists; ids are filled in by position."""
    wins = tuple(tuple(window(i, *w) for w in ws) for i, ws in enumerate(targets, start=1))
    return Instance(obs if obs is not None else ObstacleSet.empty(), Point(*depot),
                    float(v_max), wins, grid)


@pytest.fixture(params=kernels.available_backends())
def backend(request):
    return kernels.load_backend(request.param)


def close(a, b, tol=1e-9):
    return math.isclose(a, b, rel_tol=tol, abs_tol=tol)


# one line per acceptance criterion, printed after the run
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
