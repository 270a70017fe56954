import cmath

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from painleve_stokes.painleve_catalog import (PARAMS, F_lambda_derivs, PainleveInstance,
                                              PainleveTag, ZeroParameter, build_Q0,
                                              continue_lambda0, eval_F, lambda0_candidates,
                                              p_turning_points, rational_surface)

lam, t = sp.symbols("lambda t")
c, c0, ci, c1, ct = sp.symbols("c c0 c_inf c1 c_t")

# eta^2 coefficients transcribed from the equation table (independent of N/D)
ORACLE = {
    "I": 6 * lam ** 2 + t,
    "II": 2 * lam ** 3 + t * lam + c,
    "III_D6": lam ** 3 / t ** 2 - ci * lam ** 2 / t ** 2 + c0 / t - 1 / lam,
    "III_D7": -2 * lam ** 2 / t ** 2 + c / t - 1 / lam,
    "III_D8": lam ** 2 / t ** 2 - 1 / t,
    "IV": sp.Rational(3, 2) * lam ** 3 + 4 * t * lam ** 2 + (2 * t ** 2 - 2 * ci) * lam - 2 * c0 ** 2 / lam,
    "V": 2 * lam * (lam - 1) ** 2 / t ** 2 * (ci ** 2 / 4 - c0 ** 2 / (4 * lam ** 2)
                                            - c1 * t / (lam - 1) ** 2
                                            - t ** 2 / 4 * (lam + 1) / (lam - 1) ** 3),
    "VI": 2 * lam * (lam - 1) * (lam - t) / (t ** 2 * (t - 1) ** 2) * (
        ci ** 2 / 4 - c0 ** 2 / 4 * t / lam ** 2 + c1 ** 2 / 4 * (t - 1) / (lam - 1) ** 2
        - ct ** 2 / 4 * t * (t - 1) / (lam - t) ** 2),
}
SYM = {"c": c, "c0": c0, "c_inf": ci, "c1": c1, "c_t": ct}


def random_instance(tag, rng):
    return PainleveInstance(tag, {k: complex(*rng.uniform(0.3, 1.5, 2)) for k in PARAMS[tag]})


@pytest.mark.parametrize("tag", list(PainleveTag))
def test_F_matches_equation_table(tag):
    rng = np.random.default_rng(3)
    expr = ORACLE[tag.value]
    dexpr = sp.diff(expr, lam)
    for _ in range(3):
        inst = random_instance(tag, rng)
        subs = {SYM[k]: v for k, v in inst.params.items()}
        L, T = complex(*rng.uniform(-1.5, 1.5, 2)), complex(*rng.uniform(0.3, 1.5, 2))
        f = complex(expr.subs(subs).subs({lam: L, t: T}).evalf())
        df = complex(dexpr.subs(subs).subs({lam: L, t: T}).evalf())
        assert abs(eval_F(inst, L, T) - f) < 1e-11 * max(1, abs(f))
        assert abs(F_lambda_derivs(inst, L, T)[1] - df) < 1e-10 * max(1, abs(df))


@pytest.mark.parametrize("tag", ["I", "II", "D6", "D7", "D8"])
def test_rational_surface_parametrizes_lambda0(tag):
    rng = np.random.default_rng(5)
    inst = random_instance(PainleveTag.parse(tag), rng)
    surf = rational_surface(inst)
    for _ in range(5):
        u = complex(*rng.uniform(-1.5, 1.5, 2))
        T, L = complex(surf.t_of(u)), complex(surf.lam_of(u))
        F, F1, _ = F_lambda_derivs(inst, L, T)
        assert abs(F) < 1e-9 * max(1, abs(F1))
        # F1 dt^2 = q du^2
        q = complex(surf.qd.q(u))
        assert abs(F1 * complex(surf.dt_du(u)) ** 2 - q) < 1e-9 * max(1, abs(q))


def test_rational_surface_rejects_zero_parameter():
    with pytest.raises(ZeroParameter):
        rational_surface(PainleveInstance(PainleveTag.II, {"c": 0}))


@pytest.mark.parametrize("tag", ["I", "II", "D6", "D7", "IV", "V", "VI"])
def test_Q0_has_double_zero_at_lambda0(tag):
    rng = np.random.default_rng(11)
    inst = random_instance(PainleveTag.parse(tag), rng)
    T = complex(*rng.uniform(0.4, 1.4, 2))
    for L in lambda0_candidates(inst, T)[:2]:
        pot = build_Q0(inst, T, L)
        F1 = F_lambda_derivs(inst, L, T)[1]
        # sqrt(R(lambda0)) is identified with sqrt(F1)
        assert abs(pot.R(L) - F1) < 1e-8 * max(1, abs(F1))
        for x in (L + 0.3 + 0.1j, L - 0.7j):
            want = complex(pot.C(x)) ** 2 * (x - L) ** 2 * pot.R(x)
            assert abs(pot.Q0(x) - want) < 1e-9 * max(1, abs(want))


def test_p_turning_points_of_P2():
    # 4 u^3 = c with t = -3c/(2u), lambda = u
    cc = 1j
    inst = PainleveInstance(PainleveTag.II, {"c": cc})
    got = p_turning_points(inst)
    us = [cmath.rect(0.25 ** (1 / 3), (np.pi / 2 + 2 * np.pi * k) / 3) for k in range(3)]
    assert len(got) == 3
    for u in us:
        assert min(abs(tt - (-1.5 * cc / u)) + abs(ll - u) for tt, ll in got) < 1e-8


@settings(max_examples=15, deadline=None)
@given(st.floats(0.2, 1.5), st.floats(-1.0, 1.0))
def test_continue_lambda0_stays_on_F_zero(r, th):
    # branch points of lambda0 sit at |t| = 1.5 / 4^(-1/3) ~ 2.38; stay inside
    inst = PainleveInstance(PainleveTag.II, {"c": 1j})
    t0, t1 = 0.1 + 0j, 0.1 + cmath.rect(r, th)
    lam0 = lambda0_candidates(inst, t0)[0]
    lam1 = continue_lambda0(inst, t0, lam0, t1)
    assert abs(eval_F(inst, lam1, t1)) < 1e-10


def test_instance_json_round_trip():
    inst = PainleveInstance(PainleveTag.V, {"c0": 1j, "c_inf": 0.5, "c1": -0.2 + 0.1j})
    assert PainleveInstance.from_json(inst.to_json()) == inst
    with pytest.raises(ValueError):
        PainleveInstance(PainleveTag.V, {"c0": 1j})


@pytest.mark.parametrize("s,tag", [("P_II", "II"), ("P_III_D7", "III_D7"), ("D6", "III_D6"),
                                   ("P_III'(D8)", "III_D8"), ("vi", "VI")])
def test_tag_parse(s, tag):
    assert PainleveTag.parse(s) is PainleveTag(tag)
