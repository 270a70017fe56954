"""The eight Painleve equations with a large parameter, at numeric parameters.

For each tag we store F = N(lambda; t) / D(lambda; t) (the eta^2 coefficient),
the leading-order potential Q0(x) of the associated Schrodinger equation and
the prefactor C(x, t) with Q0 = C^2 (x - lambda0)^2 R.
"""
from __future__ import annotations

import cmath
import enum
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .numeric_core import (NumericError, Polynomial, RationalFunction,
                           as_complex, poly_roots)


class PoleOfF(NumericError):
    pass


class PoleOfQ(NumericError):
    pass


class BranchPointCrossed(NumericError):
    pass


class ZeroParameter(ValueError):
    pass


class PainleveTag(str, enum.Enum):
    I = "I"
    II = "II"
    III_D6 = "III_D6"
    III_D7 = "III_D7"
    III_D8 = "III_D8"
    IV = "IV"
    V = "V"
    VI = "VI"

    @classmethod
    def parse(cls, s: str) -> "PainleveTag":
        s = s.strip()
        if s.upper().startswith("P_"):
            s = s[2:]
        s = s.replace("'", "").replace("(", "_").replace(")", "")
        alias = {"III_D6": "III_D6", "IIID6": "III_D6", "D6": "III_D6",
                 "III_D7": "III_D7", "IIID7": "III_D7", "D7": "III_D7",
                 "III_D8": "III_D8", "IIID8": "III_D8", "D8": "III_D8"}
        s = alias.get(s.upper(), s.upper())
        return cls(s)

    @property
    def label(self) -> str:
        return "P_" + self.value


PARAMS = {
    PainleveTag.I: (),
    PainleveTag.II: ("c",),
    PainleveTag.III_D6: ("c0", "c_inf"),
    PainleveTag.III_D7: ("c",),
    PainleveTag.III_D8: (),
    PainleveTag.IV: ("c0", "c_inf"),
    PainleveTag.V: ("c0", "c_inf", "c1"),
    PainleveTag.VI: ("c0", "c_inf", "c1", "c_t"),
}


@dataclass(frozen=True)
class PainleveInstance:
    tag: PainleveTag
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        tag = PainleveTag.parse(self.tag) if isinstance(self.tag, str) else self.tag
        object.__setattr__(self, "tag", tag)
        want = set(PARAMS[tag])
        got = set(self.params)
        if want != got:
            raise ValueError(f"{tag.label} needs parameters {sorted(want)}, got {sorted(got)}")
        object.__setattr__(self, "params", {k: as_complex(v) for k, v in self.params.items()})

    def __hash__(self):
        return hash((self.tag, tuple(sorted(self.params.items()))))

    def p(self, name: str) -> complex:
        return self.params[name]

    def to_json(self) -> dict:
        return {"tag": self.tag.label,
                "params": {k: [v.real, v.imag] for k, v in self.params.items()}}

    @classmethod
    def from_json(cls, d: dict) -> "PainleveInstance":
        return cls(PainleveTag.parse(d["tag"]),
                   {k: complex(v[0], v[1]) for k, v in d.get("params", {}).items()})

    # -- F = N / D --------------------------------------------------------
    def N_coeffs(self, t: complex) -> np.ndarray:
        """Ascending coefficients in lambda of the numerator N(lambda; t)."""
        J, t = self.tag, complex(t)
        T = PainleveTag
        if J is T.I:
            return np.array([t, 0, 6], dtype=complex)
        if J is T.II:
            return np.array([self.p("c"), t, 0, 2], dtype=complex)
        if J is T.III_D6:
            return np.array([-t * t, self.p("c0") * t, 0, -self.p("c_inf"), 1], dtype=complex)
        if J is T.III_D7:
            return np.array([-t * t, self.p("c") * t, 0, -2], dtype=complex)
        if J is T.III_D8:
            return np.array([-t, 0, 1], dtype=complex)
        if J is T.IV:
            c0, ci = self.p("c0"), self.p("c_inf")
            return np.array([-2 * c0 ** 2, 0, 2 * t * t - 2 * ci, 4 * t, 1.5], dtype=complex)
        x = Polynomial([0, 1])
        one = Polynomial([-1, 1])
        if J is T.V:
            c0, ci, c1 = self.p("c0"), self.p("c_inf"), self.p("c1")
            n = (ci ** 2 * x * x * one * one * one - c0 ** 2 * one * one * one
                 - 4 * c1 * t * x * x * one - t * t * x * x * Polynomial([1, 1]))
            return n.coeffs
        if J is T.VI:
            c0, ci, c1, ct = (self.p(k) for k in ("c0", "c_inf", "c1", "c_t"))
            xt = Polynomial([-t, 1])
            n = (ci ** 2 * x * x * one * one * xt * xt - c0 ** 2 * t * one * one * xt * xt
                 + c1 ** 2 * (t - 1) * x * x * xt * xt - ct ** 2 * t * (t - 1) * x * x * one * one)
            return n.coeffs
        raise AssertionError(J)

    def D_coeffs(self, t: complex) -> np.ndarray:
        J, t = self.tag, complex(t)
        T = PainleveTag
        if J in (T.I, T.II):
            return np.array([1], dtype=complex)
        if J in (T.III_D6, T.III_D7):
            return np.array([0, t * t], dtype=complex)
        if J is T.III_D8:
            return np.array([t * t], dtype=complex)
        if J is T.IV:
            return np.array([0, 1], dtype=complex)
        if J is T.V:
            return (Polynomial([0, 2 * t * t]) * Polynomial([-1, 1])).coeffs
        if J is T.VI:
            return (Polynomial([0, 2 * t * t * (t - 1) ** 2]) * Polynomial([-1, 1])
                    * Polynomial([-t, 1])).coeffs
        raise AssertionError(J)

    def bivariate(self) -> tuple[np.ndarray, np.ndarray]:
        """Coefficient matrices M[i, j] of lambda^i t^j for N and D.

        N and D are polynomials of degree < 8 in t, so sampling their lambda
        coefficients at 8 roots of unity and transforming is exact.
        """
        cached = self.__dict__.get("_bivariate")
        if cached is not None:
            return cached
        ts = np.exp(2j * np.pi * np.arange(8) / 8)
        out = []
        for fn in (self.N_coeffs, self.D_coeffs):
            rows = [fn(t) for t in ts]
            width = max(len(r) for r in rows)
            A = np.array([np.pad(r, (0, width - len(r))) for r in rows])  # (8, deg_lam + 1)
            M = (np.fft.fft(A, axis=0) / 8).T  # M[i, j] coefficient of lambda^i t^j
            M = np.where(np.abs(M) < 1e-14 * np.max(np.abs(M)), 0, M)
            out.append(M)
        object.__setattr__(self, "_bivariate", tuple(out))
        return self.__dict__["_bivariate"]

    def N_dt(self, lam: complex, t: complex) -> complex:
        """dN/dt at fixed lambda."""
        return complex(_bi_eval(self.bivariate()[0], lam, t, dt=1))


def eval_F(inst: PainleveInstance, lam, t) -> complex:
    lam, t = complex(lam), complex(t)
    d = Polynomial(inst.D_coeffs(t))(lam)
    if abs(d) == 0:
        raise PoleOfF(f"F has a pole at lambda={lam}, t={t}")
    return Polynomial(inst.N_coeffs(t))(lam) / d


def F_lambda_derivs(inst: PainleveInstance, lam, t) -> tuple[complex, complex, complex]:
    """(F, dF/dlambda, d2F/dlambda2) at (lam, t)."""
    N = Polynomial(inst.N_coeffs(t))
    D = Polynomial(inst.D_coeffs(t))
    n0, n1, n2 = N(lam), N.deriv()(lam), N.deriv().deriv()(lam)
    d0, d1, d2 = D(lam), D.deriv()(lam), D.deriv().deriv()(lam)
    if d0 == 0:
        raise PoleOfF(f"F has a pole at lambda={lam}")
    f0 = n0 / d0
    f1 = (n1 - f0 * d1) / d0
    f2 = (n2 - 2 * f1 * d1 - f0 * d2) / d0
    return f0, f1, f2


_BI_DERIV: dict = {}


def _bi_deriv(M: np.ndarray, dlam: int, dt: int) -> np.ndarray:
    key = (id(M), dlam, dt)
    hit = _BI_DERIV.get(key)
    if hit is not None and hit[0] is M:
        return hit[1]
    A = M
    for _ in range(dlam):
        A = A[1:] * np.arange(1, A.shape[0])[:, None]
    for _ in range(dt):
        A = A[:, 1:] * np.arange(1, A.shape[1])[None, :]
    _BI_DERIV[key] = (M, A, A.tolist())
    return A


def _bi_eval(M: np.ndarray, lam, t, dlam: int = 0, dt: int = 0):
    """d^dlam/dlambda^dlam d^dt/dt^dt of sum M[i, j] lambda^i t^j (vectorized)."""
    A = _bi_deriv(M, dlam, dt)
    if np.isscalar(lam) and np.isscalar(t) or (np.ndim(lam) == 0 and np.ndim(t) == 0):
        # scalar fast path: nested Horner on Python complex numbers
        rows = _BI_DERIV[(id(M), dlam, dt)][2]
        lam, t = complex(lam), complex(t)
        out = 0j
        for row in reversed(rows):
            ci = 0j
            for a in reversed(row):
                ci = ci * t + a
            out = out * lam + ci
        return np.complex128(out)
    lam = np.asarray(lam, dtype=complex)
    t = np.asarray(t, dtype=complex)
    if A.size == 0:
        return np.zeros(np.broadcast(lam, t).shape, dtype=complex)
    lp = lam[..., None] ** np.arange(A.shape[0])
    tp = t[..., None] ** np.arange(A.shape[1])
    return np.einsum("...i,ij,...j->...", lp, A, tp)


def F1_and_slope(inst: PainleveInstance, lam, t):
    """(F1, dt/dlambda) on F = 0, vectorized: F1 = N_lambda / D, dt/dlambda = -N_lambda / N_t."""
    Nm, Dm = inst.bivariate()
    Nl = _bi_eval(Nm, lam, t, dlam=1)
    return Nl / _bi_eval(Dm, lam, t), -Nl / _bi_eval(Nm, lam, t, dt=1)


def _newton_scalar(Nm, lam: complex, t: complex, in_lambda: int, iters: int) -> complex:
    for _ in range(iters):
        f = complex(_bi_eval(Nm, lam, t))
        if in_lambda:
            d = f / complex(_bi_eval(Nm, lam, t, dlam=1))
            lam -= d
            x = lam
        else:
            d = f / complex(_bi_eval(Nm, lam, t, dt=1))
            t -= d
            x = t
        if abs(d) <= 1e-14 * max(1.0, abs(x)):
            break
    return x


def newton_lambda_vec(inst: PainleveInstance, lam, t, iters: int = 30):
    """Newton on N(., t) = 0 from lam, elementwise."""
    Nm, _ = inst.bivariate()
    if np.ndim(lam) == 0 and np.ndim(t) == 0:
        return _newton_scalar(Nm, complex(lam), complex(t), 1, iters)
    lam = np.array(lam, dtype=complex)
    for _ in range(iters):
        d = _bi_eval(Nm, lam, t) / _bi_eval(Nm, lam, t, dlam=1)
        lam = lam - d
        if np.all(np.abs(d) <= 1e-14 * np.maximum(1.0, np.abs(lam))):
            break
    return lam


def newton_t_vec(inst: PainleveInstance, lam, t, iters: int = 30):
    """Newton on N(lambda, .) = 0 from t, elementwise."""
    Nm, _ = inst.bivariate()
    if np.ndim(lam) == 0 and np.ndim(t) == 0:
        return _newton_scalar(Nm, complex(lam), complex(t), 0, iters)
    t = np.array(t, dtype=complex)
    for _ in range(iters):
        d = _bi_eval(Nm, lam, t) / _bi_eval(Nm, lam, t, dt=1)
        t = t - d
        if np.all(np.abs(d) <= 1e-14 * np.maximum(1.0, np.abs(t))):
            break
    return t


class PhaseInLambda:
    """Integrand of int sqrt(F1) dt written in the lambda coordinate.

    Along a lambda-path, t(lambda) solves N(lambda, t) = 0 by Newton from the
    previous node, and the integrand is sqrt(F1) dt/dlambda.  The state is
    (t, sqrt F1) at the previous node.  lambda is a good coordinate at
    P-turning points and simple-pole-type points, where t is not.
    """

    def __init__(self, inst: PainleveInstance):
        self.inst = inst

    def continued(self, z, state, local=None):
        t, s_prev = state
        out = np.empty(len(z), dtype=complex)
        for i, lam in enumerate(z):
            t = complex(newton_t_vec(self.inst, lam, t))
            F1, slope = F1_and_slope(self.inst, lam, t)
            s = cmath.sqrt(complex(F1))
            if s_prev is not None and (s * s_prev.conjugate()).real < 0:
                s = -s
            s_prev = s
            out[i] = s * complex(slope)
        return out, (t, s_prev)


def lambda0_candidates(inst: PainleveInstance, t) -> list[complex]:
    """All roots lambda of F(lambda, t) = 0 (zeros of D excluded)."""
    N = Polynomial(inst.N_coeffs(t))
    D = Polynomial(inst.D_coeffs(t))
    out = []
    for r, m in poly_roots(N):
        if D.degree >= 1 and abs(D(r)) <= 1e-12 * max(1.0, D.scale_at(r)):
            continue
        out.extend([r] * m)
    return out


# -------------------------------------------------------------- lambda0 branch


@dataclass
class Lambda0Branch:
    """A holomorphic branch of lambda0(t), continued along straight steps."""

    instance: PainleveInstance
    basepoint: complex
    value_at_basepoint: complex
    anchors: list = field(default_factory=list)
    max_step: float = 0.05

    def __post_init__(self):
        self.basepoint = complex(self.basepoint)
        lam = _newton_lambda(self.instance, self.value_at_basepoint, self.basepoint)
        self.value_at_basepoint = lam
        if not self.anchors:
            self.anchors = [(self.basepoint, lam)]

    @classmethod
    def nearest(cls, inst: PainleveInstance, t, guess) -> "Lambda0Branch":
        cands = lambda0_candidates(inst, t)
        lam = min(cands, key=lambda r: abs(r - guess))
        return cls(inst, complex(t), lam)

    def _nearest_anchor(self, t):
        return min(self.anchors, key=lambda a: abs(a[0] - t))

    def at(self, t, cache: bool = True) -> complex:
        """lambda0(t), continued from the nearest anchor along a straight line."""
        t = complex(t)
        t_a, lam = self._nearest_anchor(t)
        lam = continue_lambda0(self.instance, t_a, lam, t, self.max_step)
        if cache and abs(t - t_a) > 1e-12:
            self.anchors.append((t, lam))
        return lam

    def along(self, ts) -> np.ndarray:
        """Continue through an ordered sequence of t values."""
        out = []
        t_prev, lam = self._nearest_anchor(complex(ts[0]))
        for t in ts:
            lam = continue_lambda0(self.instance, t_prev, lam, complex(t), self.max_step)
            out.append(lam)
            t_prev = complex(t)
        return np.array(out)


def _newton_lambda(inst, lam, t, iters: int = 50) -> complex:
    N = Polynomial(inst.N_coeffs(t))
    dN = N.deriv()
    lam = complex(lam)
    for _ in range(iters):
        d = dN(lam)
        if d == 0:
            break
        step = N(lam) / d
        lam -= step
        if abs(step) <= 1e-15 * max(1.0, abs(lam)):
            break
    return lam


def continue_lambda0(inst: PainleveInstance, t0, lam0, t1, max_step: float = 0.05,
                     min_step: float = 1e-10) -> complex:
    """Predictor-corrector continuation of a root of N(., t) from t0 to t1.

    A step is accepted only when the corrected root is clearly the one
    nearest the predictor (distance < 0.5 * gap to the next root).
    """
    t0, t1, lam = complex(t0), complex(t1), complex(lam0)
    if t0 == t1:
        return lam
    tcur, dlam_dt = t0, None
    remaining = t1 - t0
    h = min(abs(remaining), max_step * max(1.0, abs(t0)))
    while abs(t1 - tcur) > 0:
        d = t1 - tcur
        step = d if abs(d) <= h else d / abs(d) * h
        tn = tcur + step
        pred = lam + (dlam_dt * step if dlam_dt is not None else 0)
        roots = [r for r, m in poly_roots(Polynomial(inst.N_coeffs(tn))) for _ in range(m)]
        dist = sorted((abs(r - pred), r) for r in roots)
        near = dist[0][1]
        gap = min((abs(r - near) for r in roots if r is not near), default=np.inf)
        if dist[0][0] < 0.25 * gap or gap == np.inf:
            new = _newton_lambda(inst, near, tn)
            dlam_dt = (new - lam) / step
            lam, tcur = new, tn
            h = min(h * 1.5, max_step * max(1.0, abs(tcur)))
        else:
            h *= 0.5
            if h < min_step * max(1.0, abs(tcur)):
                raise BranchPointCrossed(f"lambda0 continuation stalled near t={tn}")
    return lam


def eval_F1(branch: Lambda0Branch, t) -> complex:
    lam = branch.at(t)
    return F_lambda_derivs(branch.instance, lam, t)[1]


# -------------------------------------------------------- Schrodinger potential


def _rf_sum(terms) -> RationalFunction:
    out = RationalFunction.const(0)
    for term in terms:
        out = out + term
    return out


def _pole(coef, p, m) -> RationalFunction:
    return RationalFunction.pole_term(coef, p, m)


def potential_U(inst: PainleveInstance, t) -> RationalFunction | None:
    """U(x) with Q0 = U(x) + h(x) K; None for tags I, II."""
    J, t = inst.tag, complex(t)
    T = PainleveTag
    if J is T.III_D6:
        c0, ci = inst.p("c0"), inst.p("c_inf")
        return _rf_sum([_pole(t * t / 4, 0, 4), _pole(-c0 * t / 2, 0, 3),
                        _pole(-ci / 2, 0, 1), RationalFunction.const(0.25)])
    if J is T.III_D7:
        c = inst.p("c")
        return _rf_sum([_pole(t * t / 4, 0, 4), _pole(-c * t / 2, 0, 3),
                        _pole(c * c / 4, 0, 2), _pole(-1, 0, 1)])
    if J is T.III_D8:
        return _rf_sum([_pole(t / 2, 0, 3), _pole(0.5, 0, 1)])
    if J is T.IV:
        c0, ci = inst.p("c0"), inst.p("c_inf")
        return _rf_sum([_pole(c0 ** 2 / 4, 0, 2),
                        RationalFunction.poly([-ci / 4 + t * t / 4, t / 4, 1 / 16])])
    if J is T.V:
        c0, ci, c1 = inst.p("c0"), inst.p("c_inf"), inst.p("c1")
        return _rf_sum([_pole(c0 ** 2 / 4, 0, 2), _pole(t * t / 4, 1, 4),
                        _pole(c1 * t, 1, 3), _pole((ci ** 2 - c0 ** 2) / 4, 1, 2)])
    if J is T.VI:
        c0, ci, c1, ct = (inst.p(k) for k in ("c0", "c_inf", "c1", "c_t"))
        e = (ci ** 2 - c0 ** 2 - c1 ** 2 - ct ** 2) / 4
        # 1/(x(x-1)) = 1/(x-1) - 1/x
        return _rf_sum([_pole(c0 ** 2 / 4, 0, 2), _pole(c1 ** 2 / 4, 1, 2),
                        _pole(ct ** 2 / 4, t, 2), _pole(e, 1, 1), _pole(-e, 0, 1)])
    return None


def _h_factor(inst, t) -> RationalFunction:
    J, t = inst.tag, complex(t)
    T = PainleveTag
    if J in (T.III_D6, T.III_D7, T.III_D8):
        return _pole(t, 0, 2)
    if J is T.IV:
        return _pole(0.5, 0, 1)
    if J is T.V:
        return RationalFunction(Polynomial.const(t), ((0j, 1), (1 + 0j, 2)), ())
    if J is T.VI:
        return RationalFunction(Polynomial.const(t * (t - 1)), ((0j, 1), (1 + 0j, 1), (t, 1)), ())
    raise AssertionError(J)


def _g_factor(inst, lam, t) -> complex:
    J = inst.tag
    T = PainleveTag
    if J in (T.III_D6, T.III_D7, T.III_D8):
        return lam * lam / t
    if J is T.IV:
        return 2 * lam
    if J is T.V:
        return lam * (lam - 1) ** 2 / t
    if J is T.VI:
        return lam * (lam - 1) * (lam - t) / (t * (t - 1))
    raise AssertionError(J)


def hamiltonian_K(inst: PainleveInstance, lam, t) -> complex:
    """Leading-order K_J(t, lambda, nu = 0)."""
    lam, t = complex(lam), complex(t)
    J = inst.tag
    if J is PainleveTag.I:
        return -0.5 * (4 * lam ** 3 + 2 * t * lam)
    if J is PainleveTag.II:
        c = inst.p("c")
        return -0.5 * (lam ** 4 + t * lam ** 2 + 2 * c * lam)
    return -_g_factor(inst, lam, t) * potential_U(inst, t)(lam)


def C_factor(inst: PainleveInstance, x, t):
    J, t = inst.tag, complex(t)
    x = np.asarray(x, dtype=complex)
    T = PainleveTag
    if J in (T.I, T.II):
        out = np.ones_like(x)
    elif J in (T.III_D6, T.III_D7, T.III_D8):
        out = t / (2 * x * x)
    elif J is T.IV:
        out = 1 / (4 * x)
    elif J is T.V:
        out = t / (2 * x * (x - 1) ** 2)
    else:
        out = t * (t - 1) / (2 * x * (x - 1) * (x - t))
    return out if out.ndim else complex(out)


def C_factor_rf(inst: PainleveInstance, t) -> RationalFunction:
    J, t = inst.tag, complex(t)
    T = PainleveTag
    if J in (T.I, T.II):
        return RationalFunction.const(1)
    if J in (T.III_D6, T.III_D7, T.III_D8):
        return _pole(t / 2, 0, 2)
    if J is T.IV:
        return _pole(0.25, 0, 1)
    if J is T.V:
        return RationalFunction(Polynomial.const(t / 2), ((0j, 1), (1 + 0j, 2)), ())
    return RationalFunction(Polynomial.const(t * (t - 1) / 2), ((0j, 1), (1 + 0j, 1), (t, 1)), ())


@dataclass(frozen=True)
class SLPotential:
    """Q0(x) = C(x)^2 (x - lambda0)^2 R(x) at fixed (t, lambda0)."""

    instance: PainleveInstance
    t: complex
    lam0: complex
    Q0: RationalFunction
    R: Polynomial
    C: RationalFunction

    @property
    def simple_turning_points(self) -> list[complex]:
        if self.R.degree < 1:
            return []
        return [r for r, m in poly_roots(self.R) for _ in range(m)]


def build_Q0(inst: PainleveInstance, t, lam0) -> SLPotential:
    """Leading-order potential of SL_J with K_J evaluated at (lambda0, nu=0)."""
    t, lam = complex(t), complex(lam0)
    J = inst.tag
    if J is PainleveTag.I:
        Q = RationalFunction.poly([2 * hamiltonian_K(inst, lam, t), 2 * t, 0, 4])
    elif J is PainleveTag.II:
        c = inst.p("c")
        Q = RationalFunction.poly([2 * hamiltonian_K(inst, lam, t), 2 * c, t, 0, 1])
    else:
        U = potential_U(inst, t)
        Q = U + _h_factor(inst, t) * hamiltonian_K(inst, lam, t)
    C = C_factor_rf(inst, t)
    # R = Q / (C^2 (x - lam)^2): C^-2 is a polynomial times a constant
    Cinv2 = C.reciprocal() * C.reciprocal()
    if Cinv2.poles:
        raise AssertionError("C^-2 should be polynomial")
    # Q = num / prod(x - p)^m ; multiply out explicitly
    num = Q.num * Cinv2.num
    # cancel the pole factors of Q against C^-2 (which vanishes on them)
    Rr = RationalFunction(num, Q.poles).reduced(1e-8)
    if Rr.poles:
        raise NumericError(f"R_J not polynomial (left poles {Rr.poles})")
    R = Rr.num
    scale = np.max(np.abs(R.coeffs))
    for _ in range(2):
        R, rem = R.deflate(lam)
        if abs(rem) > 1e-7 * max(scale, 1.0) * max(1.0, abs(lam)) ** (R.degree + 2):
            raise NumericError(f"lambda0 is not a double zero of Q0 (remainder {abs(rem):.2e});"
                               " is F(lambda0, t) = 0?")
    R = Polynomial(np.where(np.abs(R.coeffs) <= 1e-15 * scale, 0, R.coeffs))
    # rebuild Q0 in factored form so its zeros are exact
    zeros = [(lam, 2)] + [(r, m) for r, m in (poly_roots(R) if R.degree >= 1 else [])]
    Cz = C * C
    lead = R.lead * Cz.num.lead
    Qf = RationalFunction.from_factored(lead, zeros, Cz.poles)
    return SLPotential(inst, t, lam, Qf, R, C)


def eval_Q0(branch: Lambda0Branch, x, t):
    pot = build_Q0(branch.instance, t, branch.at(t))
    x = np.asarray(x, dtype=complex)
    for p, _ in pot.Q0.poles:
        if np.any(x == p):
            raise PoleOfQ(f"x = {p} is a pole of Q0")
    return pot.Q0(x)


def eval_RJ(branch: Lambda0Branch, x, t):
    return build_Q0(branch.instance, t, branch.at(t)).R(x)


# ---------------------------------------------------------------- u-plane
#
# For I, II, III_D6, III_D7 and III_D8 the lambda0-surface is rational: there
# is a coordinate u with t(u), lambda0(u) rational, and F1(t) dt^2 pulls back
# to a rational quadratic differential q(u) du^2.  P-turning points become
# zeros of order 3 and simple-pole-type points become simple poles.


def quad_II(u, c):
    u = np.asarray(u, dtype=complex)
    return (4 * u ** 3 - c) ** 3 / u ** 5


def quad_D7(u, c):
    u = np.asarray(u, dtype=complex)
    return (3 * u - 2 * c) ** 3 / (u * (u - c) ** 2)


@dataclass
class RationalSurface:
    """u-coordinate on the lambda0-surface of a tag with rational parametrization."""

    instance: PainleveInstance
    qd: object  # geometry.QuadraticDifferential
    t_of: Callable
    lam_of: Callable
    dt_du: Callable

    def u_of(self, t, guess) -> complex:
        """Newton solve of t(u) = t from guess."""
        u = complex(guess)
        for _ in range(60):
            du = (complex(self.t_of(u)) - t) / complex(self.dt_du(u))
            u -= du
            if abs(du) <= 1e-15 * max(1.0, abs(u)):
                break
        return u

    def sqrt_F1(self, u, s_u):
        """sqrt(F1) at t(u) consistent with the u-plane branch s_u = sqrt(q(u))."""
        return s_u / self.dt_du(u)


def _d6_surface(inst):
    c0, ci = inst.p("c0"), inst.p("c_inf")
    zeros = [r for r, _ in poly_roots(Polynomial([c0 ** 3 + c0 ** 2 * ci - c0 * ci ** 2,
                                                  3 * ci ** 2, 3 * ci, 1]))]
    poles = [(-c0, 1), (c0, 2), (-ci, 4), (-c0 - 2 * ci, 2)]
    t_of = lambda v: -(v - c0) * (v + c0) ** 2 * (v + c0 + 2 * ci) / (16 * (v + ci) ** 2)
    lam_of = lambda v: -(v - c0) * (v + c0) / (4 * (v + ci))

    def dt_du(v):
        f = (v - c0) * (v + c0) ** 2 * (v + c0 + 2 * ci)
        df = ((v + c0) ** 2 * (v + c0 + 2 * ci) + 2 * (v - c0) * (v + c0) * (v + c0 + 2 * ci)
              + (v - c0) * (v + c0) ** 2)
        return -(df * (v + ci) - 2 * f) / (16 * (v + ci) ** 3)

    return zeros, poles, 1.0, t_of, lam_of, dt_du


def rational_surface(inst: PainleveInstance) -> RationalSurface:
    from .geometry import INF, QuadraticDifferential

    T = PainleveTag
    J = inst.tag
    if J is T.I:
        zeros, poles, lead = [0j], [], 1728.0
        t_of, lam_of, dt_du = (lambda u: -6 * u * u), (lambda u: u), (lambda u: -12 * u)
    elif J is T.II:
        c = inst.p("c")
        if c == 0:
            raise ZeroParameter("c must be nonzero")
        zeros = [r for r, _ in poly_roots(Polynomial([-c, 0, 0, 4]))]
        poles, lead = [(0j, 5)], 64.0
        t_of = lambda u: -(2 * u ** 3 + c) / u
        lam_of = lambda u: u
        dt_du = lambda u: -(4 * u ** 3 - c) / (u * u)
    elif J is T.III_D7:
        c = inst.p("c")
        if c == 0:
            raise ZeroParameter("c must be nonzero")
        # u = 2 lam^2 / (c lam - t)
        zeros, poles, lead = [2 * c / 3], [(0j, 1), (c, 2)], 27.0
        t_of = lambda u: -u * u * (u - c) / 2
        lam_of = lambda u: -u * (u - c) / 2
        dt_du = lambda u: -u * (3 * u - 2 * c) / 2
    elif J is T.III_D6:
        if inst.p("c0") == 0 or inst.p("c_inf") == 0:
            raise ZeroParameter("c0 and c_inf must be nonzero")
        zeros, poles, lead, t_of, lam_of, dt_du = _d6_surface(inst)
    elif J is T.III_D8:
        zeros, poles, lead = [], [(0j, 1)], 8.0
        t_of, lam_of, dt_du = (lambda u: u * u), (lambda u: u), (lambda u: 2 * u)
    else:
        raise ValueError(f"no rational parametrization for {J.label}")
    q = RationalFunction.from_factored(lead, [(z, 3) for z in zeros], poles)
    inf_order = 4 - q.order_at_infinity()
    all_poles = list(poles) + ([(INF, inf_order)] if inf_order > 0 else [])
    qd = QuadraticDifferential(q, zeros=[(complex(z), 3) for z in zeros], poles=all_poles,
                               label=f"{J.label} u-plane {inst.to_json()['params']}",
                               p_simple={complex(z) for z in zeros})
    return RationalSurface(inst, qd, t_of, lam_of, dt_du)


def uplane_quadratic(tag, c):
    """QuadraticDifferential on the u-plane for tags II and III_D7."""
    tag = PainleveTag.parse(tag) if isinstance(tag, str) else tag
    if tag not in (PainleveTag.II, PainleveTag.III_D7):
        raise ValueError(f"uplane_quadratic takes II or III_D7, not {tag.label}")
    return rational_surface(PainleveInstance(tag, {"c": c})).qd


def t_of_u(tag: PainleveTag, u, c):
    return rational_surface(PainleveInstance(tag, {"c": c})).t_of(np.asarray(u, dtype=complex))


def lambda0_of_u(tag: PainleveTag, u, c):
    return rational_surface(PainleveInstance(tag, {"c": c})).lam_of(np.asarray(u, dtype=complex))


def u_of_lambda0(tag: PainleveTag, lam, t, c):
    if tag is PainleveTag.II:
        return lam
    return 2 * lam * lam / (c * lam - t)


# ------------------------------------------------------------- singular points


@dataclass(frozen=True)
class SingularPoint:
    location: object  # complex or "infinity"
    simple_pole_type: bool


def singular_points(inst: PainleveInstance) -> list[SingularPoint]:
    T = PainleveTag
    J = inst.tag
    inf = SingularPoint("infinity", J is T.VI)
    if J in (T.I, T.II, T.IV):
        return [inf]
    if J in (T.III_D6, T.III_D7, T.III_D8, T.V):
        return [SingularPoint(0j, True), inf]
    return [SingularPoint(0j, True), SingularPoint(1 + 0j, True), inf]


# ---------------------------------------------------------- P-turning points


def p_turning_points(inst: PainleveInstance, *, radius: float | None = None,
                     tol: float = 1e-9) -> list[tuple[complex, complex]]:
    """(t, lambda) pairs with F = dF/dlambda = 0, t outside Sing_J.

    The resultant in lambda of N and dN/dlambda is sampled on a circle and
    interpolated (it is a polynomial in t); candidate roots are polished by
    Newton on the 2x2 system.
    """
    deg_bound = _resultant_degree_bound(inst)
    rho = radius or 1.0
    n = deg_bound + 1
    ts = rho * np.exp(2j * np.pi * np.arange(n) / n)
    vals = np.array([_resultant(inst, t) for t in ts])
    coeffs = np.fft.fft(vals) / n
    coeffs = coeffs / rho ** np.arange(n)
    poly = Polynomial(np.where(np.abs(coeffs) < 1e-12 * np.max(np.abs(coeffs)), 0, coeffs))
    sing = [s.location for s in singular_points(inst) if s.location != "infinity"]
    out: list[tuple[complex, complex]] = []
    if poly.degree < 1:
        return out
    for t_c, _ in poly_roots(poly, 1e-10):
        if any(abs(t_c - s) < 1e-8 for s in sing):
            continue
        cands = lambda0_candidates(inst, t_c)
        if not cands:
            continue
        for lam_c in cands:
            sol = _polish_turning_point(inst, t_c, lam_c)
            if sol is None:
                continue
            t_r, lam_r = sol
            if any(abs(t_r - s) < 1e-8 for s in sing):
                continue
            if any(abs(t_r - a) < 1e-7 and abs(lam_r - b) < 1e-5 for a, b in out):
                continue
            out.append((t_r, lam_r))
    return out


def _resultant_degree_bound(inst) -> int:
    # generous: total degree in (lambda, t) of N squared
    nl = len(inst.N_coeffs(1.234 + 0.5j)) - 1
    return 4 * nl * 2 + 4


def _resultant(inst, t) -> complex:
    N = inst.N_coeffs(t)
    dN = Polynomial(N).deriv().coeffs
    return _sylvester_det(N, dN)


def _sylvester_det(a: np.ndarray, b: np.ndarray) -> complex:
    a = a[::-1]  # descending
    b = b[::-1]
    m, n = len(a) - 1, len(b) - 1
    S = np.zeros((m + n, m + n), dtype=complex)
    for i in range(n):
        S[i, i:i + m + 1] = a
    for i in range(m):
        S[n + i, i:i + n + 1] = b
    return complex(np.linalg.det(S))


def _polish_turning_point(inst, t, lam, iters: int = 60):
    t, lam = complex(t), complex(lam)
    for _ in range(iters):
        N = Polynomial(inst.N_coeffs(t))
        Nl = N.deriv()
        f = np.array([N(lam), Nl(lam)])
        h = 1e-7 * max(1.0, abs(t))
        Np = Polynomial(inst.N_coeffs(t + h))
        Nm = Polynomial(inst.N_coeffs(t - h))
        Nt = (Np(lam) - Nm(lam)) / (2 * h)
        Nlt = (Np.deriv()(lam) - Nm.deriv()(lam)) / (2 * h)
        Jm = np.array([[Nl(lam), Nt], [Nl.deriv()(lam), Nlt]])
        try:
            d = np.linalg.solve(Jm, -f)
        except np.linalg.LinAlgError:
            return None
        lam += d[0]
        t += d[1]
        if abs(d[0]) + abs(d[1]) < 1e-14 * (1 + abs(lam) + abs(t)):
            break
    N = Polynomial(inst.N_coeffs(t))
    if abs(N(lam)) > 1e-9 * max(1.0, N.scale_at(lam)) or abs(N.deriv()(lam)) > 1e-7 * max(1.0, N.deriv().scale_at(lam)):
        return None
    D = Polynomial(inst.D_coeffs(t))
    if D.degree >= 1 and abs(D(lam)) <= 1e-10 * max(1.0, D.scale_at(lam)):
        return None
    return t, lam


def is_simple_p_turning_point(inst, t, lam, tol: float = 1e-8) -> bool:
    f0, f1, f2 = F_lambda_derivs(inst, lam, t)
    return abs(f2) > tol
