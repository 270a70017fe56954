import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from painleve_stokes.numeric_core import NumericError
from painleve_stokes.painleve_catalog import PainleveInstance, PainleveTag
from painleve_stokes.transform_builder import (_map_u, build_transform, certified_sides,
                                               match_constant)


@pytest.fixture(scope="module")
def p2_sides():
    return certified_sides(PainleveInstance(PainleveTag.II, {"c": 1j}))


def test_forward_and_backward_tracks_differ_by_the_period(p2_sides):
    side = p2_sides[0]
    n = len(side.fwd.nodes)
    diff = side.fwd.psi - side.bwd.psi[::-1]
    assert np.max(np.abs(diff - side.fwd.psi[-1])) < 1e-11
    assert abs(side.period - 2 * np.pi) < 1e-9 or abs(side.period + 2 * np.pi) < 1e-9
    assert n > 10


@pytest.mark.parametrize("c", [0.5j, 2j])
def test_match_constant_recovers_c(c):
    for side in certified_sides(PainleveInstance(PainleveTag.II, {"c": c})):
        assert abs(match_constant(side) - c) < 1e-9


@settings(max_examples=15, deadline=None)
@given(st.floats(0.15, 0.85))
def test_phi_inverse(p2_sides, frac):
    side = p2_sides[1]
    k = 1
    val = complex(frac * side.period * side.sigma)
    u = side.solve(k, val)
    assert abs(side.phi(k, u)[0] - val) < 1e-11


@settings(max_examples=10, deadline=None)
@given(st.floats(0.1, 0.9))
def test_t0_identity_on_self(p2_sides, frac):
    side = p2_sides[0]
    j = int(np.argmin(np.abs(side.fwd.psi.real - frac * side.period)))
    u = complex(side.fwd.nodes[j])
    assert abs(_map_u(side, side, u) - u) < 1e-10


def test_d6_segments_at_the_degenerate_point_are_rejected():
    inst = PainleveInstance(PainleveTag.III_D6, {"c0": 0.5j, "c_inf": 1j})
    # segments ending at the P-turning point near 0.04i have three SL segment rays
    with pytest.raises(NumericError):
        build_transform(inst, src_index=0, with_x0=True)


def test_transform_json_shape():
    top = build_transform(PainleveInstance(PainleveTag.II, {"c": 1j}), with_x0=False)
    d = top.to_json()
    assert set(d) >= {"c", "orientation", "t_star", "t0_anchors", "checks"}
    assert d["checks"]["phase_correspondence"] < 1e-10
