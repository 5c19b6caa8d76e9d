from fractions import Fraction
from math import isqrt

import pytest
import sympy
from hypothesis import given, strategies as st

from fivepowers.arith import (charpoly, count_real_roots, eval_monic_poly, iroot, is_prime, is_square,
                              legendre, order_mod, poly_divmod, poly_mul, prime_factors, primes_in,
                              roots_within, sqrt_rational, strip, valuation)


def test_is_prime_matches_sympy_below_5000():
    assert [n for n in range(5000) if is_prime(n)] == list(sympy.primerange(0, 5000))


@given(st.integers(min_value=2**61, max_value=2**130))
def test_is_prime_large(n):
    assert is_prime(n) == sympy.isprime(n)


def test_carmichael_numbers_rejected():
    for n in (561, 1105, 1729, 2465, 2821, 6601, 3215031751):
        assert not is_prime(n)


@given(st.integers(min_value=1, max_value=10**40), st.sampled_from([2, 3, 5, 7]))
def test_valuation_and_strip(n, p):
    v = valuation(n, p)
    assert n % p**v == 0 and (n // p**v) % p != 0
    assert strip(n * 10**3, (2, 5)) == strip(n, (2, 5))


def test_valuation_of_zero_is_rejected():
    with pytest.raises(ValueError):
        valuation(0, 2)


@given(st.integers(min_value=-10**60, max_value=10**60), st.integers(min_value=1, max_value=9))
def test_iroot_floor(n, k):
    r, exact = iroot(n, k)
    if n < 0 and k % 2 == 0:
        assert (r, exact) == (0, False)
        return
    assert exact == (r**k == n)
    m = abs(n)
    assert abs(r) ** k <= m < (abs(r) + 1) ** k


@given(st.integers(min_value=-10**30, max_value=10**30))
def test_iroot_recovers_powers(m):
    for k in (2, 3, 5, 6):
        if k % 2 == 0 and m < 0:
            continue
        assert iroot(m**k, k) == (m if k % 2 else abs(m), True)


@given(st.fractions(min_value=0, max_value=10**6))
def test_sqrt_rational(q):
    r = sqrt_rational(q * q)
    assert r == q
    root = sqrt_rational(q)
    if root is not None:
        assert root * root == q


def test_is_square_small():
    assert [n for n in range(-3, 50) if is_square(n)] == [i * i for i in range(8)]


@given(st.integers(min_value=1, max_value=10**12))
def test_prime_factors_complete(n):
    fac, cof = prime_factors(n)
    assert cof == 1
    assert fac == {int(p): e for p, e in sympy.factorint(n).items()}


@given(st.integers(min_value=-500, max_value=500), st.sampled_from([11, 13, 17, 19, 23, 29, 31, 97]))
def test_legendre_euler_criterion(a, p):
    e = pow(a, (p - 1) // 2, p)
    assert legendre(a, p) == (0 if a % p == 0 else (1 if e == 1 else -1))


def test_order_mod():
    assert order_mod(2, 7) == 3 and order_mod(5, 7) == 6
    for p in primes_in(11, 60):
        for a in (2, 5):
            assert order_mod(a, p) == sympy.n_order(a, p)


def test_primes_in_excludes():
    assert primes_in(2, 31, (2, 3, 5, 7)) == [11, 13, 17, 19, 23, 29, 31]


def test_eval_monic_poly_requires_monic():
    assert eval_monic_poly((6, -5, 1), 2) == 0
    with pytest.raises(ValueError):
        eval_monic_poly((1, 2), 3)


@given(st.lists(st.integers(-20, 20), min_size=1, max_size=4), st.lists(st.integers(-20, 20), min_size=1, max_size=4))
def test_poly_divmod_inverts_mul(p, q):
    if q[-1] == 0:
        q = q + [1]
    quot, rem = poly_divmod(poly_mul(p, q), q)
    assert all(Fraction(c) == 0 for c in rem)
    trimmed = list(p)
    while len(trimmed) > 1 and trimmed[-1] == 0:
        trimmed.pop()
    assert [Fraction(c) for c in quot] == [Fraction(c) for c in trimmed] or all(c == 0 for c in p)


@given(st.lists(st.integers(-12, 12), min_size=1, max_size=5))
def test_roots_within_matches_numeric(roots):
    # monic polynomial with the given integer roots
    coeffs = [1]
    for r in roots:
        coeffs = poly_mul(coeffs, [-r, 1])
    coeffs = [int(c) for c in coeffs]
    for radius_sq in (0, 10, 50, 144):
        assert roots_within(coeffs, radius_sq) == all(r * r <= radius_sq for r in roots)


def test_roots_within_rejects_complex_roots():
    assert not roots_within((1, 0, 1), 100)  # x^2 + 1
    assert roots_within((-2, 0, 1), 2)  # +-sqrt 2
    assert not roots_within((-2, 0, 1), 1)


def test_count_real_roots():
    # (x - 1)(x - 2)(x - 5) on [0, 3]
    p = poly_mul(poly_mul([-1, 1], [-2, 1]), [-5, 1])
    assert count_real_roots(p, 0, 3) == 2


@given(st.lists(st.lists(st.integers(-5, 5), min_size=3, max_size=3), min_size=3, max_size=3))
def test_charpoly_matches_sympy(rows):
    x = sympy.symbols("x")
    want = sympy.Poly(sympy.Matrix(rows).charpoly(x).as_expr(), x).all_coeffs()[::-1]
    assert charpoly(rows) == [Fraction(int(c)) for c in want]


def test_isqrt_consistency():
    assert isqrt(10**40) == 10**20
