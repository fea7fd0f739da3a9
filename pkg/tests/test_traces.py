import math

import numpy as np
import pytest

from kdqlab.errors import GridTooSmall, NonUniformGrid
from kdqlab.traces import CharFnTrace, UGrid, trace_from_csv, trace_to_csv


def test_default_grid_resolution(drive):
    g = UGrid.default_for(drive.omega, endpoint=False)
    assert g.n == 128
    assert g.resolution == pytest.approx(drive.omega / 8)
    assert g.values[0] == 0 and g.values[-1] < g.u_max


def test_endpoint_grid_reaches_u_max(drive):
    g = UGrid.default_for(drive.omega)
    assert g.values[-1] == pytest.approx(16 * math.pi / drive.omega)
    assert g.step == pytest.approx(g.u_max / 127)


@pytest.mark.parametrize("endpoint", [True, False])
def test_refined_grid(endpoint):
    g = UGrid(16, 3.0, endpoint)
    r = g.refined()
    assert r.u_max == 6.0
    assert r.step == pytest.approx(g.step / 2)


def test_grid_too_small():
    with pytest.raises(GridTooSmall):
        UGrid(4, 1.0)
    with pytest.raises(GridTooSmall):
        UGrid(16, 0.0)
    with pytest.raises(GridTooSmall):
        CharFnTrace(np.arange(5.0), np.ones(5))


def test_nonuniform_grid():
    u = np.arange(10.0)
    u[4] += 0.01
    tr = CharFnTrace(u, np.ones(10))
    assert not tr.is_uniform()
    with pytest.raises(NonUniformGrid):
        tr.step


def test_uniform_within_rounding():
    u = np.arange(4096) * 0.1
    assert CharFnTrace(u, np.ones(4096)).is_uniform()


def test_shape_mismatch():
    with pytest.raises(ValueError):
        CharFnTrace(np.arange(10.0), np.ones(9))


def test_trace_is_read_only():
    tr = CharFnTrace(np.arange(10.0), np.ones(10))
    with pytest.raises(ValueError):
        tr.values[0] = 2


def test_csv_round_trip(tmp_path, rng):
    u = np.arange(20) * math.pi / 7
    g = rng.normal(size=20) + 1j * rng.normal(size=20)
    tr = CharFnTrace(u, g)
    text = trace_to_csv(tr, tmp_path / "t.csv")
    assert text.splitlines()[0] == "u,re_g,im_g"
    back = trace_from_csv(tmp_path / "t.csv")
    assert np.array_equal(back.u_values, u) and np.array_equal(back.values, g)
    assert back.source == "file"
    # at least 15 significant digits per number
    digits = text.splitlines()[2].split(",")[1].lstrip("-").replace(".", "").split("e")[0]
    assert len(digits.lstrip("0")) >= 15


def test_csv_bad_header():
    with pytest.raises(ValueError):
        trace_from_csv("x,y,z\n1,2,3\n")
