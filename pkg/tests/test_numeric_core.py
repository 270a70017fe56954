import cmath

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from painleve_stokes.numeric_core import (GK_NODES, GK_WEIGHTS, G_WEIGHTS, BranchPointAt,
                                          ComplexPath, Polynomial, RationalFunction,
                                          SingularOnPath, SqrtIntegrand, SqrtRing, as_complex,
                                          path_integral, poly_roots, ring_derivative,
                                          ring_residue_at, sqrt_laurent)

cplx = st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False)


def test_as_complex_rejects_non_finite():
    assert as_complex(3) == 3 + 0j
    with pytest.raises(ValueError):
        as_complex(complex("nan"))


@pytest.mark.parametrize("deg", [2, 5, 8, 13])
def test_gauss_kronrod_exactness(deg):
    # Kronrod part exact to degree 22, Gauss part to degree 13
    x = GK_NODES
    exact = (1 - (-1) ** (deg + 1)) / (deg + 1)
    assert abs(np.dot(GK_WEIGHTS, x ** deg) - exact) < 1e-14
    assert abs(np.dot(G_WEIGHTS, x ** deg) - exact) < 1e-14
    assert abs(np.dot(GK_WEIGHTS, x ** 22) - 2 / 23) < 1e-14


@settings(max_examples=40, deadline=None)
@given(st.lists(cplx, min_size=1, max_size=7, unique=True))
def test_poly_roots_recover_distinct_roots(roots):
    roots = [r for i, r in enumerate(roots) if all(abs(r - s) > 0.05 for s in roots[:i])]
    p = Polynomial.from_roots(roots, lead=2 - 1j)
    got = [r for r, m in poly_roots(p) for _ in range(m)]
    assert len(got) == len(roots)
    for r in roots:
        assert min(abs(r - g) for g in got) < 1e-8 * max(1, abs(r))


def test_poly_roots_multiplicities_match_numpy_oracle():
    p = Polynomial.from_roots([1j, 1j, 1j, -2, 0.5, 0.5])
    got = sorted((round(r.real, 6), round(r.imag, 6), m) for r, m in poly_roots(p))
    assert got == [(-2.0, 0.0, 1), (0.0, 1.0, 3), (0.5, 0.0, 2)]
    ref = np.roots(p.coeffs[::-1])
    assert np.allclose(sorted(ref, key=lambda z: (round(z.real, 3), z.imag)),
                       sorted([r for r, m in poly_roots(p) for _ in range(m)],
                              key=lambda z: (round(z.real, 3), z.imag)), atol=1e-4)


def test_poly_roots_rejects_constant():
    with pytest.raises(ValueError):
        poly_roots(Polynomial.const(3))


@settings(max_examples=30, deadline=None)
@given(cplx, cplx)
def test_rational_arithmetic_pointwise(a, x):
    f = RationalFunction.from_factored(1.5, [(a, 2)], [(a + 1, 1)])
    g = RationalFunction.poly([1, a, 2])
    if min(abs(x - a - 1), abs(x + 5)) < 1e-3:
        return
    h = (f * g + g) / RationalFunction.poly([5, 1])
    want = (f(x) * g(x) + g(x)) / (5 + x)
    assert abs(h(x) - want) < 1e-9 * max(1, abs(want))


def test_rational_laurent_and_derivative():
    f = RationalFunction.from_factored(1, [(1, 1)], [(0j, 2)])  # (x - 1)/x^2
    k0, c = f.laurent(0j, 3)
    assert k0 == -2 and np.allclose(c, [-1, 1, 0])
    x = 0.3 + 0.7j
    assert abs(f.deriv()(x) - (-1 / x ** 2 + 2 / x ** 3)) < 1e-12
    assert f.pole_order(0j) == 2 and f.order_at_infinity() == 1


def test_path_integral_polynomial_and_circle():
    val = path_integral(lambda z: z ** 2, ComplexPath.polyline([0, 1 + 1j, 2j]))
    assert abs(val - (2j) ** 3 / 3) < 1e-13
    val = path_integral(lambda z: 1 / z, ComplexPath.circle(0, 0.5))
    assert abs(val - 2j * np.pi) < 1e-12


def test_path_integral_sqrt_branch_continuation():
    # around a large circle sqrt(z^2 - 1) ~ z - 1/(2z): integral -pi i (for seed +)
    path = ComplexPath.circle(0, 3)
    q = RationalFunction.poly([-1, 0, 1])
    seed = cmath.sqrt(q(3))
    val = path_integral(SqrtIntegrand(q), path, 1e-13, seed=seed)
    assert abs(val - (-np.pi * 1j)) < 1e-11


def test_endpoint_singular_integral():
    # int_0^1 sqrt(x) (1-x)^(-1/2) dx = pi/2
    q = RationalFunction.from_factored(-1, [(0j, 1)], [(1 + 0j, 1)])  # x / (1 - x)
    path = ComplexPath.polyline([0, 1], singular_start=2, singular_end=2)
    val = path_integral(SqrtIntegrand(q), path, 1e-13, seed=1e-3 + 0j)
    assert abs(val - np.pi / 2) < 1e-12


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_singular_on_path_raises():
    with pytest.raises(SingularOnPath):
        path_integral(lambda z: 1 / (z - 0.5),
                      ComplexPath.polyline([0, 1]))


def test_sqrt_ring_arithmetic_and_derivative():
    Q = RationalFunction.poly([1, 0, 1])  # 1 + x^2
    R = SqrtRing(Q)
    s = R.sqrt()
    e = (s * s) - Q
    assert e.is_zero() or max(abs(e(x, np.sqrt(Q(x)))) for x in (0.3, 1 + 1j)) < 1e-13
    d = ring_derivative(s)
    x = 0.4 + 0.2j
    assert abs(d(x, cmath.sqrt(Q(x))) - x / cmath.sqrt(Q(x))) < 1e-13
    inv = (s + 2).reciprocal()
    assert abs(inv(x, cmath.sqrt(Q(x))) * (cmath.sqrt(Q(x)) + 2) - 1) < 1e-12


def test_sqrt_laurent_and_residue():
    # sqrt(c - x^2/4) at infinity: residue +-i c
    c = 0.7j
    Q = RationalFunction.poly([c, 0, -0.25])
    e = SqrtRing(Q).sqrt()
    r = ring_residue_at(e, "infinity")
    assert min(abs(r - 1j * c), abs(r + 1j * c)) < 1e-12
    with pytest.raises(BranchPointAt):
        sqrt_laurent(RationalFunction.poly([0, 1]), 0j, 3)
