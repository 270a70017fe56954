"""Riccati recursion for WKB series of graded potentials in the ring Q(x)[sqrt Q0].

Grades are counted in half-units: grade g carries eta^(-g/2).  The potential
is eta^2 Q with Q = sum_j eta^(-j/2) Q_j (j >= 0), the Riccati equation is
S^2 + S' = eta^2 Q and S = sum_{g >= -2} eta^(-g/2) S_g, so S_{-2} = +-sqrt(Q0)
is the eta^(+1) term, S_0 the eta^0 term and S_2 the eta^(-1) term.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .numeric_core import (NumericError, RationalFunction, SqrtRing, SqrtRingElement,
                           ring_derivative, ring_residue_at)

INF = "infinity"


class GradeMismatch(NumericError):
    pass


def eta_power(grade: int) -> float:
    return -grade / 2


@dataclass
class GradedPotential:
    """Q = sum_j eta^(-j/2) terms[j]; terms[0] is the leading potential Q0."""

    terms: dict
    label: str = ""

    def __post_init__(self):
        self.terms = {int(j): (t if isinstance(t, RationalFunction) else RationalFunction.poly(t))
                      for j, t in self.terms.items() if j >= 0}
        if 0 not in self.terms or self.terms[0].is_zero():
            raise ValueError("Q0 must be nonzero")
        self.terms = {j: t for j, t in self.terms.items() if j == 0 or not t.is_zero()}

    @property
    def Q0(self) -> RationalFunction:
        return self.terms[0]

    def term(self, j: int) -> RationalFunction:
        return self.terms.get(j, RationalFunction.const(0))

    @property
    def integer_graded(self) -> bool:
        return all(j % 2 == 0 for j in self.terms)

    def __call__(self, x, eta: float):
        return sum(eta ** (-j / 2) * np.asarray(q(x)) for j, q in self.terms.items())

    # -- named potentials
    @classmethod
    def airy(cls) -> "GradedPotential":
        return cls({0: RationalFunction.x()}, "airy")

    @classmethod
    def weber(cls, c) -> "GradedPotential":
        c = complex(c)
        # c - x^2/4 = -(x - 2 sqrt c)(x + 2 sqrt c)/4
        r = 2 * np.sqrt(c + 0j)
        return cls({0: RationalFunction.from_factored(-0.25, [(r, 1), (-r, 1)])}, "weber")

    @classmethod
    def bessel(cls, c, regular: bool = False) -> "GradedPotential":
        """(x - c^2)/x^2; ``regular`` adds the eta^(-2) term -1/(4 x^2) that makes
        x = 0 a regular singular point of the full equation."""
        c = complex(c)
        terms = {0: RationalFunction.from_factored(1.0, [(c * c, 1)], [(0j, 2)])}
        if regular:
            terms[4] = RationalFunction.pole_term(-0.25, 0j, 2)
        return cls(terms, "bessel" + (" regular" if regular else ""))

    @classmethod
    def constant(cls, a) -> "GradedPotential":
        return cls({0: RationalFunction.const(a)}, "constant")

    @classmethod
    def from_instance(cls, inst, t, lam0, apparent: bool = False) -> "GradedPotential":
        """Leading SL potential of a Painleve instance at (t, lambda0), nu = 0.

        With ``apparent`` the eta^(-2) term 3/(4 (x - lambda0)^2) is added at
        grade 4; the eta^(-1) term vanishes at nu = 0.
        """
        from .painleve_catalog import build_Q0

        pot = build_Q0(inst, t, lam0)
        terms = {0: pot.Q0}
        if apparent:
            terms[4] = RationalFunction.pole_term(0.75, complex(lam0), 2)
        return cls(terms, f"{inst.tag.label} t={complex(t)}")


@dataclass
class WkbSeries:
    """S_terms[g] in the ring over Q0; sign is the choice S_{-2} = sign * sqrt(Q0)."""

    ring: SqrtRing
    S_terms: dict
    computed_up_to: int
    sign: int = 1

    def __getitem__(self, g: int) -> SqrtRingElement:
        if g > self.computed_up_to:
            raise GradeMismatch(f"grade {g} not computed (up to {self.computed_up_to})")
        return self.S_terms.get(g, self.ring.element())

    def grades(self) -> list[int]:
        return [g for g in range(-2, self.computed_up_to + 1)]

    def evaluate(self, x, sqrt_q0, eta: float, up_to: int | None = None, deriv: bool = False):
        """Truncated sum sum_{g <= up_to} eta^(-g/2) S_g (or its x-derivative)."""
        up_to = self.computed_up_to if up_to is None else up_to
        out = 0j
        for g in range(-2, up_to + 1):
            e = self[g]
            if e.is_zero():
                continue
            if deriv:
                e = ring_derivative(e)
            out = out + eta ** (-g / 2) * e(x, sqrt_q0)
        return out

    def to_json(self) -> dict:
        rf = lambda f: {"num": [[complex(c).real, complex(c).imag] for c in f.num.coeffs],
                        "poles": [[p.real, p.imag, m] for p, m in f.poles]}
        return {"sign": self.sign, "computed_up_to": self.computed_up_to,
                "terms": [{"grade": g, "eta_power": eta_power(g), "a": rf(self[g].a), "b": rf(self[g].b)}
                          for g in self.grades()]}


def new_series(pot: GradedPotential, sign: int = 1, ring: SqrtRing | None = None) -> WkbSeries:
    ring = ring or SqrtRing(pot.Q0)
    return WkbSeries(ring, {-2: ring.element(0, sign)}, -2, sign)


def _div_2sqrt(e: SqrtRingElement) -> SqrtRingElement:
    """(a + b sqrtQ) / (2 sqrtQ) = b/2 + a/(2Q) sqrtQ."""
    return SqrtRingElement(e.b * 0.5, e.a * e.ring.inv_base * 0.5, e.ring)


def riccati_extend(pot: GradedPotential, series: WkbSeries, up_to: int = 6) -> WkbSeries:
    """Extend S through grade up_to by
    S_{m+2} = (Q_{m+4} - S_m' - sum_{k1+k2=m, -1<=k<=m+1} S_k1 S_k2) / (2 S_{-2})."""
    if series.ring.base is not pot.Q0:
        raise ValueError("series was not built on this potential")
    S = dict(series.S_terms)
    ring = series.ring
    zero = ring.element()
    get = lambda g: S.get(g, zero)
    for n in range(series.computed_up_to + 1, up_to + 1):
        m = n - 2
        rhs = ring.element(pot.term(m + 4))
        if m >= -2:
            sm = get(m)
            if not sm.is_zero():
                rhs = rhs - ring_derivative(sm)
        for k1 in range(-1, m + 2):
            k2 = m - k1
            if k2 < -1 or k2 > m + 1:
                continue
            a, b = get(k1), get(k2)
            if a.is_zero() or b.is_zero():
                continue
            rhs = rhs - a * b
        # 1/(2 S_{-2}) = sign/(2 sqrtQ)
        new = _div_2sqrt(rhs) * series.sign if not rhs.is_zero() else zero
        S[n] = new
    return WkbSeries(ring, S, max(up_to, series.computed_up_to), series.sign)


def wkb_pair(pot: GradedPotential, up_to: int = 6) -> tuple[WkbSeries, WkbSeries]:
    """(S^+, S^-) extended through up_to."""
    ring = SqrtRing(pot.Q0)
    return (riccati_extend(pot, new_series(pot, +1, ring), up_to),
            riccati_extend(pot, new_series(pot, -1, ring), up_to))


def odd_part(series: WkbSeries, mirror: WkbSeries, tol: float = 1e-12) -> WkbSeries:
    """(S^+ - S^-)/2 termwise; terms that cancel to below tol are dropped."""
    if series.ring is not mirror.ring or series.computed_up_to != mirror.computed_up_to:
        raise GradeMismatch("series and mirror differ in ring or grades")
    if series.sign == mirror.sign:
        raise GradeMismatch("mirror must use the opposite sign of sqrt(Q0)")
    plus, minus = (series, mirror) if series.sign > 0 else (mirror, series)
    out = {}
    for g in plus.grades():
        d = (plus[g] - minus[g]) * 0.5
        d = SqrtRingElement(_chop(d.a, tol), _chop(d.b, tol), d.ring)
        if not d.is_zero():
            out[g] = d
    return WkbSeries(plus.ring, out, plus.computed_up_to, 1)


def _chop(f: RationalFunction, tol: float) -> RationalFunction:
    c = f.num.coeffs
    if f.is_zero() or np.max(np.abs(c)) <= tol:
        return RationalFunction.const(0)
    return f


def sodd_residue(series_odd: WkbSeries, p, per_grade: bool = True, branch_sign: int = 1):
    """Residue of S_g dx at p (point or "infinity") for each stored grade."""
    p = INF if isinstance(p, str) else complex(p)
    out = []
    for g in series_odd.grades():
        e = series_odd[g]
        out.append((g, 0j if e.is_zero() else complex(ring_residue_at(e, p, branch_sign))))
    if per_grade:
        return out
    return sum(r for _, r in out)


# -------------------------------------------------------------- verification


def recursion_residuals(pot: GradedPotential, series: WkbSeries, xs, sqrt_q0=None) -> dict:
    """Max relative residual of each grade equation at the points xs.

    Equation m: sum_{k1+k2=m} S_k1 S_k2 + S_m' - Q_{m+4} = 0 for -4 <= m <= up_to - 2.
    """
    xs = np.asarray(xs, dtype=complex)
    sq = np.sqrt(pot.Q0(xs).astype(complex)) if sqrt_q0 is None else np.asarray(sqrt_q0)
    vals = {g: series[g](xs, sq) for g in series.grades()}
    ders = {g: ring_derivative(series[g])(xs, sq) if not series[g].is_zero() else 0 * xs
            for g in series.grades()}
    out = {}
    for m in range(-4, series.computed_up_to - 1):
        acc = np.zeros(len(xs), dtype=complex)
        scale = np.zeros(len(xs))
        for k1 in range(-2, m + 3):
            k2 = m - k1
            if k2 in vals:
                term = vals[k1] * vals[k2]
                acc += term
                scale = np.maximum(scale, np.abs(term))
        if m in ders:
            acc += ders[m]
            scale = np.maximum(scale, np.abs(ders[m]))
        q = pot.term(m + 4)(xs) if not pot.term(m + 4).is_zero() else 0 * xs
        acc -= q
        scale = np.maximum(np.maximum(scale, np.abs(q)), 1e-300)
        out[m] = float(np.max(np.abs(acc) / scale))
    return out


def riccati_residual(pot: GradedPotential, series: WkbSeries, x, eta: float, N: int,
                     sqrt_q0=None) -> complex:
    """S_N^2 + S_N' - eta^2 Q at x for the truncation S_N = sum_{g <= N}."""
    sq = np.sqrt(complex(pot.Q0(x))) if sqrt_q0 is None else sqrt_q0
    s = series.evaluate(x, sq, eta, N)
    ds = series.evaluate(x, sq, eta, N, deriv=True)
    return s * s + ds - eta ** 2 * complex(pot(x, eta))


def predicted_slope(N: int, integer_graded: bool = True) -> float:
    """Expected log-log slope of the truncation residual in eta.

    The first unmatched equation has grade N - 1, giving eta^(-(N-1)/2); for
    integer-graded potentials odd-grade equations vanish identically, so an
    even N gains a further half power.
    """
    if integer_graded and N % 2 == 0:
        return -N / 2
    return -(N - 1) / 2


@dataclass
class RichardsonReport:
    N: int
    etas: tuple
    residuals: list
    slope: float
    predicted: float
    tol: float = 0.3

    @property
    def passed(self) -> bool:
        return abs(self.slope - self.predicted) <= self.tol


def richardson_slope(pot: GradedPotential, series: WkbSeries, N: int, xs,
                     etas=(10.0, 20.0, 40.0)) -> RichardsonReport:
    """Least-squares slope of log max_x |residual| against log eta."""
    res = [max(abs(riccati_residual(pot, series, x, eta, N)) for x in xs) for eta in etas]
    slope = float(np.polyfit(np.log(etas), np.log(res), 1)[0])
    return RichardsonReport(N, tuple(etas), res, slope, predicted_slope(N, pot.integer_graded))


def dump_json(series: WkbSeries) -> str:
    return json.dumps(series.to_json())
