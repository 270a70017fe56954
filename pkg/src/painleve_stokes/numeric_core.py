"""Complex arithmetic substrate.

Polynomials and rational functions with complex float coefficients, an
Aberth-Ehrlich root finder, adaptive Gauss-Kronrod quadrature along complex
paths with branch continuation, and the ring of elements ``a + b*sqrt(Q0)``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

EPS = np.finfo(float).eps


class NumericError(Exception):
    """Base class for numeric failures."""


class NonConvergence(NumericError):
    pass


class ToleranceNotMet(NumericError):
    pass


class SingularOnPath(NumericError):
    pass


class BranchPointAt(NumericError):
    def __init__(self, where):
        super().__init__(f"odd-order zero/pole of the base at {where}")
        self.where = where


class RingDivisionFailure(NumericError):
    pass


def as_complex(z) -> complex:
    """Coerce to a finite python complex."""
    w = complex(z)
    if not (math.isfinite(w.real) and math.isfinite(w.imag)):
        raise ValueError(f"non-finite complex value {z!r}")
    return w


# ---------------------------------------------------------------- polynomials


def _trim(c: np.ndarray, rel: float = 0.0) -> np.ndarray:
    c = np.asarray(c, dtype=complex)
    if c.size == 0:
        return np.zeros(1, dtype=complex)
    thresh = rel * np.max(np.abs(c)) if rel > 0 else 0.0
    n = c.size
    while n > 1 and abs(c[n - 1]) <= thresh:
        n -= 1
    return c[:n].copy()


@dataclass(frozen=True, eq=False)
class Polynomial:
    """Ascending-order complex coefficients."""

    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _trim(self.coeffs))

    @classmethod
    def from_roots(cls, roots: Iterable, lead: complex = 1.0) -> "Polynomial":
        c = np.array([lead], dtype=complex)
        for r in roots:
            c = np.concatenate([[0], c]) - np.concatenate([c * r, [0]])
        return cls(c)

    @classmethod
    def const(cls, a) -> "Polynomial":
        return cls(np.array([a], dtype=complex))

    @property
    def degree(self) -> int:
        return -1 if self.is_zero() else len(self.coeffs) - 1

    @property
    def lead(self) -> complex:
        return complex(self.coeffs[-1])

    def is_zero(self) -> bool:
        return len(self.coeffs) == 1 and self.coeffs[0] == 0

    def __call__(self, x):
        x = np.asarray(x, dtype=complex)
        acc = np.zeros_like(x) + self.coeffs[-1]
        for a in self.coeffs[-2::-1]:
            acc = acc * x + a
        return acc if acc.ndim else complex(acc)

    def scale_at(self, x) -> float:
        """sum |a_k| |x|^k, the natural size for backward-error tests."""
        r = np.abs(np.asarray(x, dtype=complex))
        return np.polynomial.polynomial.polyval(r, np.abs(self.coeffs))

    def __add__(self, other):
        other = _as_poly(other)
        n = max(len(self.coeffs), len(other.coeffs))
        c = np.zeros(n, dtype=complex)
        c[: len(self.coeffs)] += self.coeffs
        c[: len(other.coeffs)] += other.coeffs
        return Polynomial(c)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(-self.coeffs)

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            return Polynomial(np.convolve(self.coeffs, other.coeffs))
        return Polynomial(self.coeffs * complex(other))

    __rmul__ = __mul__

    def deriv(self) -> "Polynomial":
        if len(self.coeffs) == 1:
            return Polynomial.const(0)
        return Polynomial(self.coeffs[1:] * np.arange(1, len(self.coeffs)))

    def deflate(self, root: complex) -> tuple["Polynomial", complex]:
        """Synthetic division by (x - root); returns quotient and remainder."""
        c = self.coeffs
        if len(c) == 1:
            return Polynomial.const(0), complex(c[0])
        q = np.zeros(len(c) - 1, dtype=complex)
        acc = c[-1]
        for k in range(len(c) - 2, -1, -1):
            q[k] = acc
            acc = c[k] + acc * root
        return Polynomial(q), complex(acc)

    def shifted(self, p: complex) -> np.ndarray:
        """Taylor coefficients of self(p + h) in h (ascending)."""
        c = self.coeffs.astype(complex).copy()
        n = len(c)
        # repeated synthetic division (Horner shift)
        for i in range(n - 1):
            for k in range(n - 2, i - 1, -1):
                c[k] += p * c[k + 1]
        return c

    def __repr__(self):
        return f"Polynomial({np.array2string(self.coeffs, precision=6)})"


def _as_poly(x) -> Polynomial:
    return x if isinstance(x, Polynomial) else Polynomial.const(x)


# ---------------------------------------------------------------- root finding


def _aberth(c: np.ndarray, z: np.ndarray, maxit: int) -> tuple[np.ndarray, bool]:
    p = Polynomial(c)
    dp = p.deriv()
    absc = np.abs(c)
    n = len(z)
    done = np.zeros(n, dtype=bool)
    for _ in range(maxit):
        pz = p(z)
        bound = 64 * EPS * np.polynomial.polynomial.polyval(np.abs(z), absc)
        done = np.abs(pz) <= bound
        if done.all():
            return z, True
        dpz = dp(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = pz / dpz
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            inv = 1.0 / diff
            np.fill_diagonal(inv, 0.0)
            s = inv.sum(axis=1)
            w = ratio / (1.0 - ratio * s)
        w = np.where(done | ~np.isfinite(w), 0.0, w)
        z = z - w
        if np.all(np.abs(w) <= 4 * EPS * np.maximum(np.abs(z), 1e-300)):
            pz = p(z)
            bound = 1e3 * EPS * np.polynomial.polynomial.polyval(np.abs(z), absc)
            return z, bool(np.all(np.abs(pz) <= bound))
    return z, False


def _cluster(z: np.ndarray, tol: float) -> list[tuple[complex, int]]:
    """Group approximations of multiple roots: a cluster of size m must fit
    within max(1, |mean|) * tol**(1/m) of its mean."""
    left = [complex(w) for w in z]
    out = []
    while left:
        seed = left.pop(0)
        order = sorted(range(len(left)), key=lambda i: abs(left[i] - seed))
        best = [seed]
        for m in range(len(left) + 1, 1, -1):
            members = [seed] + [left[i] for i in order[: m - 1]]
            centre = np.mean(members)
            radius = max(1.0, abs(centre)) * tol ** (1.0 / m)
            if all(abs(w - centre) <= radius for w in members):
                best = members
                for i in sorted(order[: m - 1], reverse=True):
                    left.pop(i)
                break
        out.append((complex(np.mean(best)), len(best)))
    return out


def poly_roots(p: Polynomial, tol: float = 1e-12, *, maxit: int = 500,
               seed: int = 0) -> list[tuple[complex, int]]:
    """Roots of ``p`` with multiplicities (Aberth-Ehrlich + clustering).

    Multiplicities come from clustering simple approximations within
    ``tol**(1/m)`` of each other (relative to max(1, |root|)).
    """
    if p.is_zero() or p.degree < 1:
        raise ValueError("poly_roots needs a nonzero polynomial of degree >= 1")
    c = p.coeffs / p.lead
    # exact zero roots first
    k0 = 0
    while abs(c[k0]) == 0:
        k0 += 1
    c = c[k0:]
    roots: list[complex] = [0j] * k0
    n = len(c) - 1
    if n == 1:
        roots.append(complex(-c[0]))
    elif n > 1:
        rng = np.random.default_rng(seed)
        centre = -c[n - 1] / n
        shifted = Polynomial(c).shifted(centre)
        # radius from the shifted coefficients (geometric mean bound)
        rad = max(abs(shifted[k]) ** (1.0 / (n - k)) for k in range(n)) or 1.0
        ok = False
        for attempt in range(6):
            ang = 2 * np.pi * np.arange(n) / n + 0.4 + rng.uniform(0, 2 * np.pi) * (attempt > 0)
            z0 = centre + rad * (1 + 0.1 * attempt) * np.exp(1j * ang)
            z, ok = _aberth(c, z0, maxit)
            if ok:
                break
        if not ok:
            raise NonConvergence(f"Aberth iteration did not converge for degree {n}")
        roots.extend(complex(r) for r in z)
    return _cluster(np.array(roots), tol)


# ---------------------------------------------------------- rational functions


def _merge_poles(*lists) -> dict:
    out: dict = {}
    for lst in lists:
        for p, m in lst:
            out[p] = out.get(p, 0) + m
    return out


def _poles_poly(poles: Sequence[tuple[complex, int]]) -> Polynomial:
    roots = [p for p, m in poles for _ in range(m)]
    return Polynomial.from_roots(roots)


@dataclass(frozen=True, eq=False)
class RationalFunction:
    """num(x) / prod (x - p)^m, denominator kept factored.

    ``zeros`` optionally caches the roots of ``num`` (with multiplicities and
    the leading coefficient implied by ``num``); it is used when a reciprocal
    is needed and is propagated only where it is still valid.
    """

    num: Polynomial
    poles: tuple = ()
    zeros: tuple | None = field(default=None, compare=False)

    # -- construction
    @classmethod
    def poly(cls, coeffs) -> "RationalFunction":
        return cls(Polynomial(np.asarray(coeffs, dtype=complex)))

    @classmethod
    def const(cls, a) -> "RationalFunction":
        return cls(Polynomial.const(a))

    @classmethod
    def x(cls) -> "RationalFunction":
        return cls(Polynomial(np.array([0, 1], dtype=complex)), (), ((0j, 1),))

    @classmethod
    def from_factored(cls, lead, zeros: Sequence[tuple[complex, int]],
                      poles: Sequence[tuple[complex, int]] = ()) -> "RationalFunction":
        num = Polynomial.from_roots([z for z, m in zeros for _ in range(m)], lead)
        return cls(num, tuple((complex(p), int(m)) for p, m in poles if m > 0),
                   tuple((complex(z), int(m)) for z, m in zeros if m > 0))

    @classmethod
    def pole_term(cls, coef, p, m: int) -> "RationalFunction":
        """coef / (x - p)^m."""
        return cls(Polynomial.const(coef), ((complex(p), m),), ())

    @classmethod
    def from_polys(cls, num: Polynomial, den: Polynomial,
                   tol: float = 1e-12) -> "RationalFunction":
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        poles = tuple(poly_roots(den, tol)) if den.degree >= 1 else ()
        return cls(num * (1.0 / den.lead), poles).reduced()

    # -- properties
    @property
    def den(self) -> Polynomial:
        return _poles_poly(self.poles)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def pole_order(self, p) -> int:
        for q, m in self.poles:
            if q == p:
                return m
        return 0

    def order_at_infinity(self) -> int:
        """Order of vanishing at infinity (negative for a pole)."""
        return sum(m for _, m in self.poles) - self.num.degree

    def __call__(self, x):
        x = np.asarray(x, dtype=complex)
        if self.zeros is not None and sum(m for _, m in self.zeros) == self.num.degree:
            # product form keeps relative accuracy next to multiple zeros
            val = np.full(x.shape, self.num.lead, dtype=complex)
            for z, m in self.zeros:
                val = val * (x - z) ** m
        else:
            val = self.num(x)
        for p, m in self.poles:
            val = val / (x - p) ** m
        return val if np.ndim(val) else complex(val)

    def eval_offset(self, anchor: complex, w):
        """Value at anchor + w, with factors formed as (anchor - r) + w.

        A zero or pole sitting exactly at ``anchor`` then contributes w
        without the rounding of forming anchor + w first.
        """
        w = np.asarray(w, dtype=complex)
        if self.zeros is None or sum(m for _, m in self.zeros) != self.num.degree:
            val = np.asarray(self.num(anchor + w), dtype=complex)
        else:
            val = np.full(w.shape, self.num.lead, dtype=complex)
            for z, m in self.zeros:
                val = val * ((anchor - z) + w) ** m
        for p, m in self.poles:
            val = val / ((anchor - p) + w) ** m
        return val

    # -- reduction
    def reduced(self, tol: float = 1e-9) -> "RationalFunction":
        num = Polynomial(_trim(self.num.coeffs, 1e-14))
        if np.max(np.abs(num.coeffs)) == 0:
            return RationalFunction(Polynomial.const(0))
        poles = []
        zeros = list(self.zeros) if self.zeros is not None else None
        for p, m in self.poles:
            while m > 0 and num.degree >= 1:
                if abs(num(p)) > tol * num.scale_at(p):
                    break
                num, _ = num.deflate(p)
                m -= 1
                if zeros is not None:
                    zeros = _drop_zero(zeros, p)
            if m > 0:
                poles.append((p, m))
        return RationalFunction(num, tuple(poles),
                                tuple(zeros) if zeros is not None else None)

    # -- arithmetic
    def _lift(self, target: dict) -> Polynomial:
        extra = [(p, target[p] - m) for p, m in self.poles]
        have = {p for p, _ in self.poles}
        extra += [(p, m) for p, m in target.items() if p not in have]
        return self.num * _poles_poly([(p, m) for p, m in extra if m > 0])

    def __add__(self, other):
        other = _as_rf(other)
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        target: dict = {}
        for p, m in self.poles + other.poles:
            target[p] = max(target.get(p, 0), m)
        num = self._lift(target) + other._lift(target)
        return RationalFunction(num, tuple(target.items())).reduced()

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.num, self.poles, self.zeros)

    def __sub__(self, other):
        return self + (-_as_rf(other))

    def __rsub__(self, other):
        return _as_rf(other) - self

    def __mul__(self, other):
        if not isinstance(other, RationalFunction):
            a = complex(other)
            if a == 0:
                return RationalFunction.const(0)
            return RationalFunction(self.num * a, self.poles, self.zeros)
        if self.is_zero() or other.is_zero():
            return RationalFunction.const(0)
        poles = tuple(_merge_poles(self.poles, other.poles).items())
        zeros = None
        if self.zeros is not None and other.zeros is not None:
            zeros = tuple(_merge_poles(self.zeros, other.zeros).items())
        return RationalFunction(self.num * other.num, poles, zeros).reduced()

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, RationalFunction):
            return self * other.reciprocal()
        return self * (1.0 / complex(other))

    def __pow__(self, n: int):
        out = RationalFunction.const(1)
        for _ in range(n):
            out = out * self
        return out

    def root_list(self, tol: float = 1e-12) -> tuple:
        if self.zeros is not None:
            return self.zeros
        if self.num.degree < 1:
            return ()
        return tuple(poly_roots(self.num, tol))

    def reciprocal(self) -> "RationalFunction":
        if self.is_zero():
            raise ZeroDivisionError("reciprocal of zero rational function")
        zeros = self.root_list()
        num = _poles_poly(self.poles) * (1.0 / self.num.lead)
        return RationalFunction(num, tuple(zeros), self.poles).reduced()

    def deriv(self) -> "RationalFunction":
        if not self.poles:
            return RationalFunction(self.num.deriv())
        L = _poles_poly([(p, 1) for p, _ in self.poles])
        acc = self.num.deriv() * L
        for p, m in self.poles:
            Lp, _ = L.deflate(p)
            acc = acc - self.num * Lp * m
        poles = tuple((p, m + 1) for p, m in self.poles)
        return RationalFunction(acc, poles).reduced()

    # -- Laurent expansions
    def laurent(self, p, nterms: int) -> tuple[int, np.ndarray]:
        """Laurent data at ``p`` (complex or "infinity").

        Returns (k0, c) with f = sum_j c[j] h^(k0 + j), h = x - p, or
        h = 1/x at infinity.  Coefficients are not trimmed of leading zeros.
        """
        if isinstance(p, str):
            n = self.num.degree if not self.is_zero() else 0
            d = sum(m for _, m in self.poles)
            numc = self.num.coeffs[::-1]
            den = np.array([1], dtype=complex)
            for q, m in self.poles:
                for _ in range(m):
                    den = np.convolve(den, [1, -q])
            return d - n, _series_div(numc, den, nterms)
        p = complex(p)
        m = 0
        den = np.array([1], dtype=complex)
        for q, mq in self.poles:
            if q == p:
                m = mq
                continue
            for _ in range(mq):
                den = np.convolve(den, [p - q, 1])
        numc = self.num.shifted(p)
        return -m, _series_div(numc, den, nterms)

    def __repr__(self):
        return f"RationalFunction(num={self.num!r}, poles={self.poles})"


def _drop_zero(zeros: list, p) -> list:
    out = []
    done = False
    for z, m in zeros:
        if not done and abs(z - p) <= 1e-7 * max(1.0, abs(p)):
            done = True
            if m > 1:
                out.append((z, m - 1))
        else:
            out.append((z, m))
    return out


def _as_rf(x) -> RationalFunction:
    if isinstance(x, RationalFunction):
        return x
    if isinstance(x, Polynomial):
        return RationalFunction(x)
    return RationalFunction.const(x)


def _series_div(num: np.ndarray, den: np.ndarray, n: int) -> np.ndarray:
    """First n Taylor coefficients of num/den, den[0] != 0."""
    a = np.zeros(n, dtype=complex)
    b = np.zeros(n, dtype=complex)
    a[: min(n, len(num))] = num[:n]
    b[: min(n, len(den))] = den[:n]
    if b[0] == 0:
        raise ZeroDivisionError("series division by a series vanishing at 0")
    out = np.zeros(n, dtype=complex)
    for k in range(n):
        out[k] = (a[k] - np.dot(out[:k], b[k:0:-1])) / b[0]
    return out


def series_sqrt(c: np.ndarray, sign: int = 1) -> np.ndarray:
    """Taylor coefficients of sqrt(sum c_k h^k) with c_0 != 0."""
    s0 = sign * cmath.sqrt(c[0])
    f = c / c[0]
    g = np.zeros(len(c), dtype=complex)
    g[0] = 1.0
    for k in range(1, len(c)):
        g[k] = (f[k] - np.dot(g[1:k], g[k - 1:0:-1])) / 2.0
    return s0 * g


# ---------------------------------------------------------------- sqrt ring


class SqrtRing:
    """Shared data for the ring of a + b*sqrt(base)."""

    def __init__(self, base: RationalFunction):
        if base.is_zero():
            raise ValueError("base must be nonzero")
        self.base = base
        self.inv_base = base.reciprocal()
        # (sqrt Q)' = Q'/(2Q) sqrt Q
        self.dlog_half = base.deriv() * self.inv_base * 0.5

    def element(self, a=0, b=0) -> "SqrtRingElement":
        return SqrtRingElement(_as_rf(a), _as_rf(b), self)

    def sqrt(self) -> "SqrtRingElement":
        return self.element(0, 1)


@dataclass(frozen=True, eq=False)
class SqrtRingElement:
    a: RationalFunction
    b: RationalFunction
    ring: SqrtRing

    @property
    def base(self) -> RationalFunction:
        return self.ring.base

    def _check(self, other):
        if other.ring is not self.ring:
            raise ValueError("elements belong to different rings")

    def __add__(self, other):
        if not isinstance(other, SqrtRingElement):
            return SqrtRingElement(self.a + other, self.b, self.ring)
        self._check(other)
        return SqrtRingElement(self.a + other.a, self.b + other.b, self.ring)

    __radd__ = __add__

    def __neg__(self):
        return SqrtRingElement(-self.a, -self.b, self.ring)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, SqrtRingElement):
            return SqrtRingElement(self.a * other, self.b * other, self.ring)
        self._check(other)
        a = self.a * other.a + self.b * other.b * self.base
        b = self.a * other.b + self.b * other.a
        return SqrtRingElement(a, b, self.ring)

    __rmul__ = __mul__

    def reciprocal(self) -> "SqrtRingElement":
        if self.a.is_zero():
            if self.b.is_zero():
                raise RingDivisionFailure("reciprocal of zero")
            # 1/(b sqrtQ) = sqrtQ / (b Q)
            return SqrtRingElement(RationalFunction.const(0),
                                   self.b.reciprocal() * self.ring.inv_base, self.ring)
        norm = self.a * self.a - self.b * self.b * self.base
        if norm.is_zero():
            raise RingDivisionFailure("a^2 - b^2 Q vanishes identically")
        inv = norm.reciprocal()
        return SqrtRingElement(self.a * inv, -self.b * inv, self.ring)

    def __truediv__(self, other):
        if isinstance(other, SqrtRingElement):
            return self * other.reciprocal()
        return self * (1.0 / complex(other))

    def is_zero(self) -> bool:
        return self.a.is_zero() and self.b.is_zero()

    def __call__(self, x, sqrt_base):
        """Evaluate at x given the chosen value(s) of sqrt(base(x))."""
        return self.a(x) + self.b(x) * sqrt_base


def ring_derivative(e: SqrtRingElement) -> SqrtRingElement:
    """d/dx of a + b sqrtQ = a' + (b' + b Q'/(2Q)) sqrtQ."""
    b = e.b.deriv() + e.b * e.ring.dlog_half if not e.b.is_zero() else e.b
    return SqrtRingElement(e.a.deriv(), b, e.ring)


def _laurent_coeff(rf: RationalFunction, p, k: int, extra: int = 3) -> tuple[int, np.ndarray]:
    k0, _ = rf.laurent(p, 1)
    need = max(k - k0 + 1, 1) + extra
    return rf.laurent(p, need)


def sqrt_laurent(q: RationalFunction, p, nterms: int, branch_sign: int = 1,
                 rel: float = 1e-10) -> tuple[int, np.ndarray]:
    """Laurent data of sqrt(q) at p; raises BranchPointAt at odd order."""
    k0, c = q.laurent(p, nterms + 8)
    scale = np.max(np.abs(c)) or 1.0
    j = 0
    while j < len(c) and abs(c[j]) <= rel * scale:
        j += 1
    if j >= 8:
        raise NumericError("could not determine the order of the base at p")
    order = k0 + j
    if order % 2:
        raise BranchPointAt(p)
    s = series_sqrt(c[j:j + nterms], branch_sign)
    return order // 2, s


def ring_residue_at(e: SqrtRingElement, p, branch_sign: int = 1) -> complex:
    """Residue of (a + b sqrtQ) dx at p (a point or "infinity")."""
    at_inf = isinstance(p, str)
    # residue picks the coefficient of h^-1 (finite) or x^-1 = w^1 (infinity)
    target = 1 if at_inf else -1
    total = 0j
    if not e.a.is_zero():
        k0, c = e.a.laurent(p, 1)
        n = target - k0 + 1
        if n > 0:
            k0, c = e.a.laurent(p, n)
            total += c[target - k0]
    if not e.b.is_zero():
        kb, _ = e.b.laurent(p, 1)
        ks, _ = sqrt_laurent(e.base, p, 1, branch_sign)
        n = target - kb - ks + 1
        if n > 0:
            kb, cb = e.b.laurent(p, n)
            ks, cs = sqrt_laurent(e.base, p, n, branch_sign)
            prod = np.convolve(cb, cs)[:n]
            total += prod[target - kb - ks]
    return -total if at_inf else total


# --------------------------------------------------------------- path geometry

# QUADPACK qk15 nodes (non-negative half, descending) and weights.
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327])

# full 15-point rule on [-1, 1], ascending
GK_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
GK_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
_g = np.zeros(15)
for _i, _w in zip((1, 3, 5), _WG[:3]):
    _g[_i] = _w
    _g[14 - _i] = _w
_g[7] = _WG[3]
G_WEIGHTS = _g


@dataclass(frozen=True)
class Line:
    """Segment a -> b.  start_power/end_power > 1 apply z = a + (b-a) s^p
    near that end to absorb algebraic endpoint singularities."""

    a: complex
    b: complex
    start_power: int = 1
    end_power: int = 1

    def __post_init__(self):
        if self.start_power > 1 and self.end_power > 1:
            raise ValueError("split the line before flagging both ends")

    def local(self, s):
        """(anchor, offset) with z = anchor + offset, anchored at a singular end."""
        d = self.b - self.a
        if self.start_power > 1:
            return self.a, d * s ** self.start_power
        if self.end_power > 1:
            return self.b, -d * (1 - s) ** self.end_power
        return None

    def param(self, s):
        d = self.b - self.a
        if self.start_power > 1:
            p = self.start_power
            return self.a + d * s ** p, d * p * s ** (p - 1)
        if self.end_power > 1:
            p = self.end_power
            r = 1 - s
            return self.b - d * r ** p, d * p * r ** (p - 1)
        return self.a + d * s, d * np.ones_like(s)

    @property
    def start(self):
        return self.a

    @property
    def end(self):
        return self.b

    @property
    def length(self):
        return abs(self.b - self.a)


@dataclass(frozen=True)
class Arc:
    """Circular arc around centre from angle theta0 to theta1 (radians)."""

    centre: complex
    radius: float
    theta0: float
    theta1: float

    def local(self, s):
        th = self.theta0 + (self.theta1 - self.theta0) * s
        return self.centre, self.radius * np.exp(1j * th)

    def param(self, s):
        th = self.theta0 + (self.theta1 - self.theta0) * s
        e = np.exp(1j * th)
        return self.centre + self.radius * e, 1j * self.radius * (self.theta1 - self.theta0) * e

    @property
    def start(self):
        return self.centre + self.radius * cmath.exp(1j * self.theta0)

    @property
    def end(self):
        return self.centre + self.radius * cmath.exp(1j * self.theta1)

    @property
    def length(self):
        return abs(self.radius * (self.theta1 - self.theta0))


@dataclass(frozen=True)
class ComplexPath:
    segments: tuple
    orientation: int = 1

    def __post_init__(self):
        for s0, s1 in zip(self.segments, self.segments[1:]):
            if abs(s0.end - s1.start) > 1e-12 * max(1.0, abs(s0.end)):
                raise ValueError("path segments do not join")

    @classmethod
    def polyline(cls, pts, singular_start: int = 1, singular_end: int = 1) -> "ComplexPath":
        pts = [complex(p) for p in pts]
        segs = []
        for i in range(len(pts) - 1):
            sp = singular_start if i == 0 else 1
            ep = singular_end if i == len(pts) - 2 else 1
            a, b = pts[i], pts[i + 1]
            if sp > 1 and ep > 1:
                m = 0.5 * (a + b)
                segs += [Line(a, m, start_power=sp), Line(m, b, end_power=ep)]
            else:
                segs.append(Line(a, b, sp, ep))
        return cls(tuple(segs))

    @classmethod
    def circle(cls, centre, radius, ccw: bool = True, theta0: float = 0.0) -> "ComplexPath":
        t1 = theta0 + (2 * np.pi if ccw else -2 * np.pi)
        return cls((Arc(complex(centre), float(radius), theta0, t1),))

    @property
    def start(self):
        return self.segments[0].start if self.orientation > 0 else self.segments[-1].end

    @property
    def end(self):
        return self.segments[-1].end if self.orientation > 0 else self.segments[0].start

    @property
    def closed(self) -> bool:
        return abs(self.start - self.end) <= 1e-12 * max(1.0, abs(self.start))

    def __add__(self, other: "ComplexPath") -> "ComplexPath":
        return ComplexPath(self.oriented().segments + other.oriented().segments)

    def oriented(self) -> "ComplexPath":
        if self.orientation > 0:
            return self
        segs = []
        for s in reversed(self.segments):
            if isinstance(s, Line):
                segs.append(Line(s.b, s.a, s.end_power, s.start_power))
            else:
                segs.append(Arc(s.centre, s.radius, s.theta1, s.theta0))
        return ComplexPath(tuple(segs))

    def points(self, n_per_segment: int = 16) -> np.ndarray:
        s = np.linspace(0, 1, n_per_segment)
        out = [self.oriented().segments[0].start]
        for seg in self.oriented().segments:
            z, _ = seg.param(s[1:])
            out.extend(z)
        return np.array(out)


# -------------------------------------------------------------- integrands


class SqrtIntegrand:
    """sqrt(q(z)) continued along the path; state = last value."""

    def __init__(self, q: Callable, mult: Callable | None = None):
        self.q = q
        self.mult = mult

    def continued(self, z: np.ndarray, prev, local=None):
        if local is not None and hasattr(self.q, "eval_offset"):
            qz = self.q.eval_offset(*local)
        else:
            qz = self.q(z)
        s = np.sqrt(np.asarray(qz, dtype=complex))
        s = continue_signs(s, prev)
        vals = s if self.mult is None else s * self.mult(z)
        return vals, complex(s[-1])


def continue_signs(s: np.ndarray, prev) -> np.ndarray:
    """Flip signs of s so consecutive entries (starting from prev) are close."""
    s = np.array(s, dtype=complex)
    ref = np.concatenate([[prev if prev is not None else s[0]], s])
    dots = (ref[1:] * np.conj(ref[:-1])).real
    # pairwise relative sign, cumulated
    flips = np.where(dots < 0, -1.0, 1.0)
    out = s * np.cumprod(flips)
    return out


def _evaluate(f, z, state, local=None):
    if hasattr(f, "continued"):
        if local is not None:
            return f.continued(z, state, local)
        return f.continued(z, state)
    v = np.asarray(f(z), dtype=complex)
    return v, state


def path_integral(f, path: ComplexPath, tol: float = 1e-10, seed=None,
                  *, max_depth: int = 40, return_state: bool = False):
    """Adaptive 7/15 Gauss-Kronrod integral of f along path.

    ``f`` is either a vectorized callable or an object with
    ``continued(z, state) -> (values, state)`` which is called in path order.
    ``seed`` is the initial continuation state.
    """
    path = path.oriented()
    nseg = len(path.segments)
    state = seed
    total = 0j
    for seg in path.segments:
        val, state = _adapt(f, seg, 0.0, 1.0, state, tol / nseg, 0, max_depth)
        total += val
    if return_state:
        return total, state
    return total


def _rule(f, seg, s0, s1, state):
    half = 0.5 * (s1 - s0)
    s = s0 + half * (GK_NODES + 1.0)
    z, dz = seg.param(s)
    local = seg.local(s)
    vals, new_state = _evaluate(f, z, state, local)
    g = vals * dz
    if not np.all(np.isfinite(g)):
        raise SingularOnPath(f"integrand not finite near {z[np.argmax(~np.isfinite(g))]}")
    k = half * np.dot(GK_WEIGHTS, g)
    gs = half * np.dot(G_WEIGHTS, g)
    return k, abs(k - gs), new_state


def _adapt(f, seg, s0, s1, state, tol, depth, max_depth):
    k, err, new_state = _rule(f, seg, s0, s1, state)
    if err <= max(tol, 50 * EPS * abs(k)):
        return k, new_state
    if depth >= max_depth:
        raise ToleranceNotMet(f"no convergence near {seg.param(np.array([s0]))[0][0]}")
    m = 0.5 * (s0 + s1)
    left, st = _adapt(f, seg, s0, m, state, tol / 2, depth + 1, max_depth)
    right, st = _adapt(f, seg, m, s1, st, tol / 2, depth + 1, max_depth)
    return left + right, st
