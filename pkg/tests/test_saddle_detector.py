import numpy as np
import pytest

from painleve_stokes.geometry import QuadraticDifferential, build_stokes_graph
from painleve_stokes.numeric_core import RationalFunction
from painleve_stokes.saddle_detector import (NotTwoSegments, adjacency_at_double,
                                             scan_parameter, winding_number)

from conftest import uplane_detection


def test_winding_number_of_circle():
    pts = 2 * np.exp(1j * np.linspace(0, 2 * np.pi, 50))
    assert winding_number(pts, 0.5) == 1
    assert winding_number(pts[::-1], 0.5) == -1
    assert winding_number(pts, 3) == 0


def test_synthetic_opposite_rays_are_not_adjacent():
    qd = QuadraticDifferential.from_rational(
        RationalFunction.from_factored(-1, [(0j, 2), (1, 1), (-1, 1)]))
    rep = adjacency_at_double(build_stokes_graph(qd))
    assert not rep.segments_adjacent
    assert len(rep.ray_angles) == 4


def test_adjacency_needs_a_double_point():
    qd = QuadraticDifferential.from_rational(RationalFunction.poly([0, 1]))
    with pytest.raises(NotTwoSegments):
        adjacency_at_double(build_stokes_graph(qd))


@pytest.mark.parametrize("c", [0.5j, 1j, 2j])
def test_P2_segments_between_distinct_turning_points(c):
    _, det = uplane_detection("II", c)
    assert len(det.segments) == 3
    pairs = {frozenset((s.endpoints[0].location, s.endpoints[1].location)) for s in det.segments}
    assert len(pairs) == 3 and all(len(p) == 2 for p in pairs)
    for s in det.segments:
        assert s.certified_residual < 1e-8


def test_D7_loop_encloses_double_pole():
    _, det = uplane_detection("D7", 1j)
    loops = [s for s in det.segments if s.kind == "loop"]
    assert len(loops) == 1
    assert loops[0].enclosed_poles == [1j]
    assert abs(loops[0].windings[1j]) == 1


def test_non_imaginary_c_has_no_certified_segment():
    # Re(2 pi i c) != 0 makes every connection's period complex
    _, det = uplane_detection("II", 1 + 1j)
    assert len(det.segments) == 0


def test_scan_records_and_json():
    recs = scan_parameter("II", "c", [0.5j, 1j, 1 + 1j])
    assert [r.count for r in recs] == [3, 3, 0]
    assert '"count": 3' in recs[0].to_json()
