"""Period integrals of sqrt(q), residues and the P-side/SL-side integral identities.

Every function takes or reports the sqrt branch it used; identity checks
accept either overall sign.
"""
from __future__ import annotations

import cmath
import json
from dataclasses import dataclass

import numpy as np

from .geometry import INF, QuadraticDifferential
from .numeric_core import (ComplexPath, NumericError,
                           RationalFunction, SqrtIntegrand,
                           path_integral, poly_roots)
from .painleve_catalog import (PainleveInstance, PainleveTag, PhaseInLambda,
                               build_Q0, lambda0_candidates)


class OddOrderPole(NumericError):
    pass


class BranchContinuationError(NumericError):
    pass


@dataclass
class Cycle:
    path: ComplexPath
    branch_seed: complex | None = None
    description: str = ""

    def __post_init__(self):
        if not self.path.closed:
            raise ValueError("a cycle must be closed")


@dataclass
class IdentityCheck:
    check: str
    lhs: complex
    rhs: complex
    residual: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.residual < self.tolerance

    def to_json(self) -> str:
        c = lambda z: [float(np.real(z)), float(np.imag(z))]
        return json.dumps({"check": self.check, "lhs": c(self.lhs), "rhs": c(self.rhs),
                           "residual": self.residual, "tolerance": self.tolerance,
                           "pass": self.passed})


def _q_of(q):
    return q.q if isinstance(q, QuadraticDifferential) else q


def sqrt_period(q, path, branch_seed=None, tol: float = 1e-12, mult=None) -> complex:
    """int sqrt(q) dz along path (or Cycle), sqrt continued from branch_seed."""
    if isinstance(path, Cycle):
        branch_seed = path.branch_seed if branch_seed is None else branch_seed
        path = path.path
    return path_integral(SqrtIntegrand(_q_of(q), mult), path, tol, seed=branch_seed)


# ------------------------------------------------------------------ residues


def _features(q: RationalFunction) -> list[complex]:
    pts = [complex(p) for p, _ in q.poles]
    if q.zeros is not None:
        pts += [complex(z) for z, _ in q.zeros]
    else:
        pts += [r for r, _ in q.root_list()]
    return pts


def residue_of_sqrtQ(q, p, branch_seed=None, radius: float | None = None) -> complex:
    """Residue of sqrt(q) dz at an even-order pole p (or 'infinity').

    Computed as a small-circle period over 2 pi i; at infinity the circle is
    large and traversed clockwise.  The branch is fixed by branch_seed, the
    value of sqrt(q) at the circle's starting point (angle 0).
    """
    q = _q_of(q)
    feats = _features(q)
    if p == INF or p == "inf":
        k = q.num.degree - sum(m for _, m in q.poles)
        if k % 2:
            raise OddOrderPole("sqrt(q) branches at infinity")
        R = radius or 2 * max([1.0] + [abs(f) for f in feats])
        path = ComplexPath.circle(0, R, ccw=False)
    else:
        p = complex(p)
        m = q.pole_order(p)
        if m == 0 or m % 2:
            raise OddOrderPole(f"{p} is not an even-order pole (order {m})")
        others = [abs(f - p) for f in feats if abs(f - p) > 1e-12 * max(1.0, abs(p))]
        rho = radius or 1e-3 * min(others, default=1.0)
        path = ComplexPath.circle(p, rho)
    seed = branch_seed if branch_seed is not None else cmath.sqrt(complex(q(path.start)))
    # tolerance relative to the size of the integrand on the circle, not to
    # the (much smaller) residue left after cancellation
    scale = abs(seed) * 2 * np.pi * (rho if p not in (INF, "inf") else R)
    val = path_integral(SqrtIntegrand(q), path, 1e-13 * max(scale, 1e-300), seed=seed)
    return val / (2j * np.pi)


# ------------------------------------------------------- P-side phase integral


def p_phase(inst: PainleveInstance, r: complex, lam_r: complex, t: complex, lam_t: complex,
            sqrt_F1_at_t: complex, lam_path=None, tol: float = 1e-12) -> complex:
    """int_r^t sqrt(F1) dt with sqrt(F1(t)) = sqrt_F1_at_t.

    Integrated in the lambda coordinate (good near a P-turning point, where
    t is not): along lam_path from lam_t back to lam_r (default: the straight
    chord), then negated.  The t reached at lam_r is checked against r.
    """
    pts = [complex(lam_t)] + ([complex(z) for z in lam_path[::-1][1:-1]] if lam_path is not None else []) + [complex(lam_r)]
    path = ComplexPath.polyline(pts, singular_end=2)
    f = PhaseInLambda(inst)
    val, (t_end, _) = path_integral(f, path, tol, seed=(complex(t), complex(sqrt_F1_at_t)),
                                    return_state=True)
    if abs(t_end - r) > 1e-5 * max(1.0, abs(r)):
        raise BranchContinuationError(f"lambda-path from {lam_t} reached t={t_end}, not r={r}")
    return -val


# ------------------------------------------------------------- SL-side integral


def sl_integral(inst: PainleveInstance, t: complex, lam0: complex, a: complex,
                sqrt_F1: complex, via=None, tol: float = 1e-12) -> complex:
    """int_a^{lam0} sqrt(Q0) dx with sqrt(Q0) = C (x - lam0) sqrt(R), sqrt(R(lam0)) = sqrt_F1.

    The path runs through the optional points ``via`` (listed from a to lam0).
    """
    pot = build_Q0(inst, t, lam0)
    R = RationalFunction(pot.R)
    C = pot.C
    mult = lambda x: C(x) * (x - lam0)
    pts = [complex(lam0)] + ([complex(z) for z in via[::-1]] if via is not None else []) + [complex(a)]
    path = ComplexPath.polyline(pts, singular_end=2)
    val = path_integral(SqrtIntegrand(R, mult), path, tol, seed=complex(sqrt_F1))
    return -val


def merging_turning_point(inst: PainleveInstance, ts, lams) -> list[complex]:
    """Follow the simple turning point a(t) that merges with lambda0 at ts[0].

    ``ts``/``lams`` trace a path starting at a P-turning point r (where
    R(lambda0) = 0); a is the root of R nearest lambda0 at the first step and
    is continued by nearest-root matching afterwards.
    """
    out = []
    a = None
    for t, lam in zip(ts[1:], lams[1:]):
        pot = build_Q0(inst, t, lam)
        roots = [r for r, m in poly_roots(pot.R) for _ in range(m)]
        ref = lam if a is None else a
        a = min(roots, key=lambda r: abs(r - ref))
        out.append(a)
    return out


def half_period_check(inst: PainleveInstance, t: complex, lam0: complex, a_t: complex,
                      r: complex, lam_r: complex, sqrt_F1: complex | None = None,
                      lam_path=None, sl_via=None) -> IdentityCheck:
    """int_a^{lam0} sqrt(Q0) dx against (1/2) int_r^t sqrt(F1) dt, same branch."""
    from .painleve_catalog import F_lambda_derivs

    if abs(t - r) < 1e-14 * max(1.0, abs(r)):
        return IdentityCheck("half-period", 0j, 0j, 0.0, 1e-6)
    F1 = F_lambda_derivs(inst, lam0, t)[1]
    s = sqrt_F1 if sqrt_F1 is not None else cmath.sqrt(F1)
    lhs = sl_integral(inst, t, lam0, a_t, s, via=sl_via)
    rhs = 0.5 * p_phase(inst, r, lam_r, t, lam0, s, lam_path)
    return IdentityCheck("half-period", lhs, rhs, abs(lhs - rhs), 1e-6)


def segment_sum_identity(inst: PainleveInstance, t: complex, lam0: complex,
                         gamma1: np.ndarray, gamma2: np.ndarray,
                         r1: complex, lam_r1: complex, r2: complex, lam_r2: complex,
                         sqrt_F1: complex | None = None, lam_path1=None, lam_path2=None
                         ) -> IdentityCheck:
    """int_{a1}^{a2} sqrt(Q0) dx against (1/2) int_{r1}^{r2} sqrt(F1) dt.

    gamma_k are SL-segment polylines from lam0 to a_k; the SL path is
    a1 -> lam0 -> a2 along them.  The P-side integral is phi(r2) - phi(r1)
    with phi(t) = int_r^t sqrt(F1), computed from each end separately.
    """
    from .painleve_catalog import F_lambda_derivs

    F1 = F_lambda_derivs(inst, lam0, t)[1]
    s = sqrt_F1 if sqrt_F1 is not None else cmath.sqrt(F1)
    g1, g2 = np.asarray(gamma1), np.asarray(gamma2)
    I1 = sl_integral(inst, t, lam0, g1[-1], s, via=g1[1:-1][::-1])
    I2 = sl_integral(inst, t, lam0, g2[-1], s, via=g2[1:-1][::-1])
    lhs = I1 - I2  # int_{a1}^{lam0} + int_{lam0}^{a2}
    p1 = p_phase(inst, r1, lam_r1, t, lam0, s, lam_path1)
    p2 = p_phase(inst, r2, lam_r2, t, lam0, s, lam_path2)
    rhs = 0.5 * (p1 - p2)
    return IdentityCheck("segment-sum", lhs, rhs, abs(lhs - rhs), 1e-7)


def segment_phase_identity(period: complex, c: complex, tol: float = 1e-7) -> IdentityCheck:
    """A P-segment (or loop) period equals +-2 pi i c."""
    target = 2j * np.pi * c
    res = min(abs(period - target), abs(period + target))
    return IdentityCheck("segment-phase", period, target, res, tol)


def table5_entries(inst: PainleveInstance) -> list[tuple[object, complex]]:
    """(pole, printed residue of S_odd dx at top order, eta stripped)."""
    T = PainleveTag
    J = inst.tag
    g = inst.p
    if J is T.II:
        return [(INF, g("c"))]
    if J is T.III_D7:
        return [(0j, g("c") / 2)]
    if J in (T.III_D6, T.IV):
        return [(0j, g("c0") / 2), (INF, g("c_inf") / 2)]
    if J is T.V:
        return [(INF, g("c_inf") / 2), (0j, g("c0") / 2), (1 + 0j, 2 * g("c1"))]
    if J is T.VI:
        return [(INF, g("c_inf") / 2), (0j, g("c0") / 2), (1 + 0j, g("c1") / 2), ("t", g("c_t") / 2)]
    raise ValueError(f"no residue table for {J.label}")


def table5_check(inst: PainleveInstance, t: complex, lam0: complex | None = None,
                 rtol: float = 1e-7) -> list[IdentityCheck]:
    """Residues of sqrt(Q0) at the even-order poles against the printed list (up to sign)."""
    if lam0 is None:
        lam0 = lambda0_candidates(inst, t)[0]
    pot = build_Q0(inst, t, lam0)
    out = []
    for p, want in table5_entries(inst):
        loc = complex(t) if p == "t" else p
        got = residue_of_sqrtQ(pot.Q0, loc)
        res = min(abs(got - want), abs(got + want)) / max(abs(want), 1e-300)
        name = f"residue {inst.tag.label} at {'infinity' if loc == INF else loc}"
        out.append(IdentityCheck(name, got, want, float(res), rtol))
    return out
