"""Exact integer utilities: valuations, primality, Legendre symbols, integer roots
and a little univariate polynomial arithmetic over Q.

Everything here works on Python ints and ``fractions.Fraction``; no floats.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt
from typing import Iterable, Sequence

_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
# Deterministic for n < 3.3 * 10**24 with these bases.
_MR_BASES = _SMALL_PRIMES


@dataclass(frozen=True)
class PrimePower:
    p: int
    e: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")
        if self.e < 0:
            raise ValueError("exponent must be non-negative")

    @property
    def value(self) -> int:
        return self.p**self.e


def valuation(n: int, p: int) -> int:
    """Largest e with p**e dividing n."""
    if n == 0:
        raise ValueError("valuation of 0 is undefined")
    if p < 2:
        raise ValueError(f"bad prime {p}")
    n = abs(n)
    if p == 2:
        return (n & -n).bit_length() - 1
    e = 0
    while n % p == 0:
        n //= p
        e += 1
    return e


def strip(n: int, primes: Iterable[int]) -> int:
    """Remove every factor of the given primes from n (sign is kept)."""
    for p in primes:
        if n:
            n //= p ** valuation(n, p)
    return n


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    if n < 41 * 41:
        return True
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def legendre(a: int, ell: int) -> int:
    """Legendre symbol (a | ell) for an odd prime ell."""
    if ell == 2 or not is_prime(ell):
        raise ValueError(f"{ell} is not an odd prime")
    r = pow(a % ell, (ell - 1) // 2, ell)
    return -1 if r == ell - 1 else r


def primes_in(lo: int, hi: int, excluded: Iterable[int] = ()) -> list[int]:
    if lo > hi:
        raise ValueError("empty range: lo > hi")
    excluded = set(excluded)
    return [p for p in range(max(lo, 2), hi + 1) if p not in excluded and is_prime(p)]


def eval_monic_poly(coeffs: Sequence[int], t: int) -> int:
    """Evaluate a monic integer polynomial given low-to-high coefficients."""
    if not coeffs or coeffs[-1] != 1:
        raise ValueError("polynomial must be monic (last coefficient 1)")
    acc = 0
    for c in reversed(coeffs):
        acc = acc * t + c
    return acc


def iroot(n: int, k: int) -> tuple[int, bool]:
    """Integer k-th root: returns (r, exact) with r = floor root toward zero.

    Negative n is allowed for odd k.
    """
    if k < 1:
        raise ValueError("k must be positive")
    if n < 0:
        if k % 2 == 0:
            return 0, False
        r, exact = iroot(-n, k)
        return -r, exact
    if n < 2 or k == 1:
        return n, True
    if k == 2:
        r = isqrt(n)
        return r, r * r == n
    # Newton from above
    x = 1 << -(-n.bit_length() // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    return x, x**k == n


def is_square(n: int) -> bool:
    return n >= 0 and isqrt(n) ** 2 == n


def sqrt_rational(q: Fraction) -> Fraction | None:
    """Exact square root of a non-negative rational, or None."""
    if q < 0:
        return None
    a, b = q.numerator, q.denominator
    ra, rb = isqrt(a), isqrt(b)
    if ra * ra == a and rb * rb == b:
        return Fraction(ra, rb)
    return None


def prime_factors(n: int, bound: int = 10**6) -> tuple[dict[int, int], int]:
    """Trial-divide n up to ``bound``; returns (factorization, cofactor)."""
    n = abs(n)
    out: dict[int, int] = {}
    if n == 0:
        raise ValueError("cannot factor 0")
    p = 2
    while p <= bound and p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out[p] = e
        p += 1 if p == 2 else 2
    if n > 1 and (n <= bound or is_prime(n)):
        out[n] = out.get(n, 0) + 1
        n = 1
    return out, n


def order_mod(a: int, ell: int) -> int:
    """Multiplicative order of a modulo the prime ell."""
    a %= ell
    if a == 0:
        raise ValueError("0 has no multiplicative order")
    k, x = 1, a
    while x != 1:
        x = x * a % ell
        k += 1
    return k


# --- polynomials over Q, low-to-high coefficient lists ---------------------

def _trim(p: list) -> list:
    while p and p[-1] == 0:
        p.pop()
    return p


def poly_mul(p: Sequence, q: Sequence) -> list:
    if not p or not q:
        return []
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return _trim(out)


def poly_divmod(p: Sequence, q: Sequence) -> tuple[list, list]:
    q = _trim([Fraction(c) for c in q])
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    r = _trim([Fraction(c) for c in p])
    quo = [Fraction(0)] * max(len(r) - len(q) + 1, 0)
    while len(r) >= len(q):
        c = r[-1] / q[-1]
        k = len(r) - len(q)
        quo[k] = c
        for i, b in enumerate(q):
            r[i + k] -= c * b
        r.pop()
        _trim(r)
    return _trim(quo), r


def poly_gcd(p: Sequence, q: Sequence) -> list:
    a, b = _trim([Fraction(c) for c in p]), _trim([Fraction(c) for c in q])
    while b:
        a, b = b, poly_divmod(a, b)[1]
    if not a:
        return []
    lead = a[-1]
    return [c / lead for c in a]


def poly_deriv(p: Sequence) -> list:
    return _trim([i * c for i, c in enumerate(p)][1:])


def poly_eval(p: Sequence, x):
    acc = 0
    for c in reversed(p):
        acc = acc * x + c
    return acc


def _sign_changes(seq: Sequence, x) -> int:
    signs = [s for s in (poly_eval(p, x) for p in seq) if s != 0]
    return sum(1 for u, v in zip(signs, signs[1:]) if (u > 0) != (v > 0))


def count_real_roots(p: Sequence, lo, hi) -> int:
    """Number of distinct real roots of p in the half-open interval (lo, hi] (Sturm)."""
    p = _trim([Fraction(c) for c in p])
    if len(p) < 2:
        return 0
    seq = [p, poly_deriv(p)]
    while True:
        r = poly_divmod(seq[-2], seq[-1])[1]
        if not r:
            break
        seq.append([-c for c in r])
    return _sign_changes(seq, Fraction(lo)) - _sign_changes(seq, Fraction(hi))


def squarefree_part(p: Sequence) -> list:
    g = poly_gcd(p, poly_deriv(p))
    return poly_divmod(p, g)[0] if len(g) > 1 else [Fraction(c) for c in _trim(list(p))]


def roots_within(coeffs: Sequence[int], radius_sq: int) -> bool:
    """True iff every complex root r of the polynomial is real with r*r <= radius_sq.

    Works on the polynomial whose roots are the squares r*r, so the test is an
    exact Sturm count on the integer interval [0, radius_sq].
    """
    coeffs = list(coeffs)
    d = len(coeffs) - 1
    if d < 1:
        return True
    neg = [c if i % 2 == 0 else -c for i, c in enumerate(coeffs)]
    prod = poly_mul(coeffs, neg)  # (-1)^d * q(x^2)
    q = [prod[2 * i] for i in range(d + 1)]
    sq = squarefree_part(q)
    deg = len(sq) - 1
    if deg == 0:
        return True
    # roots of sq are exactly the r*r; all must lie in [0, radius_sq]
    at_zero = 0
    if sq[0] == 0:
        sq, at_zero = sq[1:], 1
    return count_real_roots(sq, 0, radius_sq) + at_zero == deg


def charpoly(matrix: Sequence[Sequence[Fraction]]) -> list[Fraction]:
    """Characteristic polynomial det(xI - M), low-to-high, via Faddeev-LeVerrier."""
    n = len(matrix)
    M = [[Fraction(v) for v in row] for row in matrix]
    coeffs = [Fraction(0)] * (n + 1)
    coeffs[n] = Fraction(1)
    Mk = [[Fraction(0)] * n for _ in range(n)]  # M_0 = 0
    c = Fraction(1)
    for k in range(1, n + 1):
        # M_k = M (M_{k-1} + c_{n-k+1} I)
        A = [[Mk[i][j] + (c if i == j else 0) for j in range(n)] for i in range(n)]
        Mk = [[sum(M[i][t] * A[t][j] for t in range(n)) for j in range(n)] for i in range(n)]
        c = -sum(Mk[i][i] for i in range(n)) / k
        coeffs[n - k] = c
    return coeffs


def lcm(*xs: int) -> int:
    out = 1
    for x in xs:
        out = out * x // gcd(out, x)
    return out
