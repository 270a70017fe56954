import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from painleve_stokes.geometry import (QuadraticDifferential, TraceOptions, build_stokes_graph,
                                      classify_turning_points, emit_rays, hausdorff,
                                      tplane_stokes_graph)
from painleve_stokes.numeric_core import RationalFunction
from painleve_stokes.painleve_catalog import PainleveInstance, PainleveTag


@pytest.mark.parametrize("order,nrays", [(1, 3), (2, 4), (3, 5)])
def test_ray_count_is_order_plus_two(order, nrays):
    qd = QuadraticDifferential.from_rational(RationalFunction.from_factored(1, [(0j, order)]))
    tp = classify_turning_points(qd)[0]
    ang = emit_rays(tp, qd)
    assert len(ang) == nrays
    assert np.allclose(np.diff(sorted(ang)), 2 * np.pi / nrays)


@settings(max_examples=20, deadline=None)
@given(st.floats(0, 2 * np.pi), st.floats(0.5, 3))
def test_airy_rays_follow_rotated_coefficient(phi, mod):
    # q = a z: rays at arg z = (2 pi k - arg a) / 3
    a = mod * np.exp(1j * phi)
    qd = QuadraticDifferential.from_rational(RationalFunction.poly([0, a]))
    ang = np.asarray(emit_rays(classify_turning_points(qd)[0], qd))
    want = (2 * np.pi * np.arange(3) - phi) / 3
    d = np.abs(np.angle(np.exp(1j * (ang[:, None] - want[None, :])))).min(axis=1)
    assert d.max() < 1e-9


def test_airy_trajectories_are_horizontal():
    qd = QuadraticDifferential.from_rational(RationalFunction.poly([0, 1]), "airy")
    g = build_stokes_graph(qd)
    assert len(g.trajectories) == 3
    for tr in g.trajectories:
        assert tr.terminus["kind"] == "escaped"
        # the principal branch is fine off the negative axis
        z = tr.points[1:]
        z = z[np.abs(np.angle(z)) < 3.0]
        zeta = 2 / 3 * z ** 1.5
        assert np.max(np.abs(zeta.imag) / np.maximum(np.abs(zeta), 1e-12)) < 1e-5
        assert tr.max_phase_drift < 1e-7


def test_synthetic_double_zero_connections():
    # q = z^2 (1 - z^2): [0, 1] and [-1, 0] are horizontal saddle connections
    qd = QuadraticDifferential.from_rational(
        RationalFunction.from_factored(-1, [(0j, 2), (1, 1), (-1, 1)]))
    g = build_stokes_graph(qd)
    ends = sorted({(round(g.trajectories[i].source.location.real), round(g.trajectories[i].end.real))
                   for i in g.connections})
    assert len(g.connections) == 2
    assert {frozenset(e) for e in ends} == {frozenset((0, 1)), frozenset((-1, 0))}
    json.dumps(g.to_json())


def test_hausdorff_polylines():
    a = np.array([0, 1, 2], dtype=complex)
    b = a + 0.1j
    assert abs(hausdorff(a, b) - 0.1) < 1e-15
    # vertices against segments: a refined copy is at distance 0
    assert hausdorff(a, np.linspace(0, 2, 7) + 0j) < 1e-15


def test_trace_options_defaults():
    o = TraceOptions()
    assert o.step_fraction > 0 and o.phase_tol > 0


@pytest.mark.slow
def test_tplane_graph_P4_periods_certify():
    inst = PainleveInstance(PainleveTag.IV, {"c0": 0.5j, "c_inf": 1j})
    g = tplane_stokes_graph(inst)
    assert len(g.turning_points) >= 8
    from painleve_stokes.saddle_detector import detect_segments

    det = detect_segments(g)
    assert det.segments
    for s in det.segments:
        # periods are integer multiples of pi/2 for these parameters
        k = s.period.real / (np.pi / 2)
        assert abs(k - round(k)) < 1e-7
