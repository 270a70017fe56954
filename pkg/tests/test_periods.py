import numpy as np
import pytest

from painleve_stokes.geometry import INF
from painleve_stokes.numeric_core import ComplexPath, RationalFunction
from painleve_stokes.painleve_catalog import (PainleveInstance, PainleveTag, build_Q0,
                                              lambda0_candidates)
from painleve_stokes.periods import (Cycle, IdentityCheck, OddOrderPole, half_period_check,
                                     residue_of_sqrtQ, segment_phase_identity, sqrt_period,
                                     table5_check)


def test_weber_large_circle():
    # sqrt(c - x^2/4) ~ +-(i x/2 - i c/x): residue +-i c, clockwise circle at infinity
    c = 1j
    q = RationalFunction.poly([c, 0, -0.25])
    r = residue_of_sqrtQ(q, INF)
    assert min(abs(r - 1j * c), abs(r + 1j * c)) < 1e-10
    per = sqrt_period(q, Cycle(ComplexPath.circle(0, 10), branch_seed=np.sqrt(q(10 + 0j))))
    assert min(abs(per - 2 * np.pi * c), abs(per + 2 * np.pi * c)) < 1e-9


def test_odd_order_pole_rejected():
    with pytest.raises(OddOrderPole):
        residue_of_sqrtQ(RationalFunction.pole_term(1, 0j, 3), 0j)


def test_cycle_must_be_closed():
    with pytest.raises(ValueError):
        Cycle(ComplexPath.polyline([0, 1]))


def test_V_residue_at_one_is_c1():
    # derived value at x = 1; the printed list has 2 c1 (see the acceptance suite)
    inst = PainleveInstance(PainleveTag.V, {"c0": 0.4 + 0.9j, "c_inf": 1.1 + 0.3j, "c1": 0.7 + 0.5j})
    t = 0.8 + 0.6j
    pot = build_Q0(inst, t, lambda0_candidates(inst, t)[0])
    r = residue_of_sqrtQ(pot.Q0, 1 + 0j)
    c1 = inst.p("c1")
    assert min(abs(r - c1), abs(r + c1)) < 1e-9


@pytest.mark.parametrize("tag", ["II", "D6", "D7", "IV", "VI"])
def test_table5_residues_single_draw(tag):
    rng = np.random.default_rng(1)
    from painleve_stokes.painleve_catalog import PARAMS

    J = PainleveTag.parse(tag)
    inst = PainleveInstance(J, {k: complex(*rng.uniform(0.3, 1.5, 2)) for k in PARAMS[J]})
    for ck in table5_check(inst, 0.9 + 0.4j):
        assert ck.passed, ck.to_json()


@pytest.mark.parametrize("t", [-6, 2j, 1 - 1j])
def test_half_period_P1_closed_form(t):
    inst = PainleveInstance(PainleveTag.I, {})
    lam0 = lambda0_candidates(inst, t)[0]
    ck = half_period_check(inst, t, lam0, -2 * lam0, 0j, 0j)
    assert ck.residual < 1e-10


def test_segment_phase_identity_sign_free():
    ck = segment_phase_identity(-2 * np.pi + 1e-9, 1j)
    assert ck.passed and isinstance(ck, IdentityCheck)
    assert '"pass": true' in ck.to_json()
