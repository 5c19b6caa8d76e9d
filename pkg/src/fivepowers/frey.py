"""Frey-Hellegouarch curves attached to the eight ternary equations.

Each curve is determined by w (standing for z1^(2n)), and the exponent gaps
``da``, ``db``.  The orientation of the gaps follows the case:

    case   da          db
    I      a - alpha   b - beta
    II     a - alpha   beta - b
    III    alpha - a   b - beta
    IV     alpha - a   beta - b

so both are always non-negative.  Curves can be built exactly (integers and
fractions) or with all quantities reduced modulo a prime ell >= 11, where the
gaps only matter modulo ell - 1.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .arith import is_prime, legendre
from .equation import CASES, subcase_allows

BAD_PRIMES = (2, 3, 5, 7)


@dataclass(frozen=True, order=True)
class CurveLabel:
    family: str  # "E" or "F"
    case: str
    index: int

    def __post_init__(self):
        if self.family not in ("E", "F") or self.case not in CASES:
            raise ValueError(f"bad label {self.family}_{self.case}_{self.index}")
        top = 3 if self.case in ("I", "II") else 2
        if not 1 <= self.index <= top:
            raise ValueError(f"case {self.case} has indices 1..{top}")

    def __str__(self):
        return f"{self.family}_{{{self.case},{self.index}}}"

    @property
    def slug(self) -> str:
        return f"{self.family}_{self.case}_{self.index}"

    @property
    def partner(self) -> "CurveLabel":
        return CurveLabel("F" if self.family == "E" else "E", self.case, self.index)


def parse_label(text: str) -> CurveLabel:
    s = text.replace("{", "").replace("}", "").replace(",", "_").replace(" ", "")
    fam, rest = s[0].upper(), s[1:].lstrip("_")
    case, _, idx = rest.rpartition("_")
    if not case:
        case, idx = rest[:-1], rest[-1]
    return CurveLabel(fam, case.upper(), int(idx))


LABELS = tuple(CurveLabel(f, c, k) for c in CASES for k in range(1, 4 if c in ("I", "II") else 3)
               for f in ("E", "F"))


class _Exact:
    """Arithmetic for exact curves: integers and fractions."""

    @staticmethod
    def p2(e):
        return Fraction(2) ** e

    @staticmethod
    def p5(e):
        return Fraction(5) ** e

    @staticmethod
    def quarter(x):
        return Fraction(x) / 4

    @staticmethod
    def norm(x):
        x = Fraction(x)
        return x.numerator if x.denominator == 1 else x

    @classmethod
    def third(cls, x):
        return cls.norm(Fraction(x) / 3)


class _Modular:
    """Arithmetic in F_ell; negative exponents are modular inverses."""

    def __init__(self, ell: int):
        self.ell = ell
        self.inv4 = pow(4, -1, ell)
        self.inv3 = pow(3, -1, ell)

    def p2(self, e):
        return pow(2, e, self.ell)

    def p5(self, e):
        return pow(5, e, self.ell)

    def quarter(self, x):
        return x * self.inv4 % self.ell

    def norm(self, x):
        return x % self.ell

    def third(self, x):
        return x * self.inv3 % self.ell


# (a1, a2, a4) for each row, as functions of the arithmetic R, w, da, db.
# a3 = a6 = 0 throughout.
Recipe = Callable[..., tuple]
_RECIPES: dict[tuple[str, str, int], Recipe] = {
    ("E", "I", 1): lambda R, w, da, db: (0, 20 * (w + R.p2(2 * da) * R.p5(2 * db)), 70 * w * w),
    ("E", "I", 2): lambda R, w, da, db: (0, 20 * (w + R.p5(2 * db)), 70 * w * w),
    ("E", "I", 3): lambda R, w, da, db: (0, 20 * (w + 4 * R.p5(2 * db)), 70 * w * w),
    ("F", "I", 1): lambda R, w, da, db: (
        1, R.quarter(-(3 * w + R.p2(2 * da + 1) * R.p5(2 * db + 1) + 1)),
        7 * R.p2(4 * da - 5) * R.p5(4 * db + 1)),
    ("F", "I", 2): lambda R, w, da, db: (0, 2 * (3 * w + 2 * R.p5(2 * db + 1)), 14 * R.p5(4 * db + 1)),
    ("F", "I", 3): lambda R, w, da, db: (0, -(3 * w + 8 * R.p5(2 * db + 1)), 56 * R.p5(4 * db + 1)),

    ("E", "II", 1): lambda R, w, da, db: (
        0, 4 * (R.p5(2 * db) * w + R.p2(2 * da)), 14 * R.p5(4 * db - 1) * w * w),
    ("E", "II", 2): lambda R, w, da, db: (0, 4 * (R.p5(2 * db) * w + 1), 14 * R.p5(4 * db - 1) * w * w),
    ("E", "II", 3): lambda R, w, da, db: (0, 4 * (R.p5(2 * db) * w + 4), 14 * R.p5(4 * db - 1) * w * w),
    ("F", "II", 1): lambda R, w, da, db: (
        1, R.quarter(-(3 * R.p5(2 * db) * w + 5 * R.p2(2 * da + 1) + 1)), 35 * R.p2(4 * da - 5)),
    ("F", "II", 2): lambda R, w, da, db: (0, 10 * (3 * R.p5(2 * db - 1) * w + 2), 70),
    ("F", "II", 3): lambda R, w, da, db: (0, -(3 * R.p5(2 * db) * w + 40), 280),

    # a4 exponent is 4(alpha - a) - 7; the printed a - alpha would be negative here
    ("E", "III", 1): lambda R, w, da, db: (
        1, R.quarter(5 * (R.p2(2 * da) * w + R.p5(2 * db)) - 1), 35 * R.p2(4 * da - 7) * w * w),
    ("E", "III", 2): lambda R, w, da, db: (0, 5 * (4 * w + R.p5(2 * db)), 70 * w * w),
    ("F", "III", 1): lambda R, w, da, db: (
        0, 4 * (3 * R.p2(2 * da - 1) * w + R.p5(2 * db + 1)), 14 * R.p5(4 * db + 1)),
    ("F", "III", 2): lambda R, w, da, db: (0, 4 * (6 * w + R.p5(2 * db + 1)), 14 * R.p5(4 * db + 1)),

    ("E", "IV", 1): lambda R, w, da, db: (
        1, R.p2(2 * da - 2) * R.p5(2 * db) * w, 7 * R.p2(4 * da - 7) * R.p5(4 * db - 1) * w * w),
    ("E", "IV", 2): lambda R, w, da, db: (0, 4 * R.p5(2 * db) * w + 1, 14 * R.p5(4 * db - 1) * w * w),
    ("F", "IV", 1): lambda R, w, da, db: (
        0, 20 * (3 * R.p2(2 * da - 1) * R.p5(2 * db - 1) * w + 1), 70),
    ("F", "IV", 2): lambda R, w, da, db: (0, 20 * (6 * R.p5(2 * db - 1) * w + 1), 70),
}


def _check_gaps(label: CurveLabel, da: int, db: int):
    if da < 0 or db < 0:
        raise ValueError("exponent gaps must be non-negative")
    if not subcase_allows(label.case, label.index, da):
        raise ValueError(f"{label} does not apply to da = {da}")
    if label.case in ("II", "IV") and db < 1:
        raise ValueError(f"case {label.case} needs beta >= b + 1 (db >= 1)")


@dataclass(frozen=True)
class FreyCurveModel:
    label: CurveLabel
    a1: int
    a2: int | Fraction
    a3: int
    a4: int | Fraction
    a6: int
    w: int
    da: int
    db: int

    @property
    def ainvs(self) -> tuple:
        return (self.a1, self.a2, self.a3, self.a4, self.a6)

    def __str__(self):
        return f"{self.label}: [{', '.join(str(c) for c in self.ainvs)}]"


def build_curve(label: CurveLabel, w: int, da: int, db: int) -> FreyCurveModel:
    """Exact model of the row ``label`` with z1^(2n) replaced by ``w``."""
    _check_gaps(label, da, db)
    a1, a2, a4 = (_Exact.norm(c) for c in _RECIPES[(label.family, label.case, label.index)](_Exact, w, da, db))
    if isinstance(a2, Fraction) or isinstance(a4, Fraction):
        raise ValueError(f"{label} is not integral at w = {w}, da = {da}, db = {db} "
                         "(w must be an odd square, i.e. 1 mod 8)")
    return FreyCurveModel(label, a1, a2, 0, a4, 0, w, da, db)


@dataclass(frozen=True)
class Invariants:
    b2: int
    b4: int
    b6: int
    b8: int
    c4: int
    c6: int
    disc: int

    @property
    def singular(self) -> bool:
        return self.disc == 0


def weierstrass_invariants(a1, a2, a3, a4, a6) -> Invariants:
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
    c4 = b2 * b2 - 24 * b4
    c6 = -b2**3 + 36 * b2 * b4 - 216 * b6
    disc = -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6
    return Invariants(b2, b4, b6, b8, c4, c6, disc)


def invariants_of(model: FreyCurveModel) -> Invariants:
    return weierstrass_invariants(*model.ainvs)


# Table of discriminants: (constant part as a function of da, db) * s^8 t or * t,
# where s = z1^n and t = z2^n.
def _disc_constant(label: CurveLabel, da: int, db: int) -> Fraction:
    F = Fraction
    c = {
        ("E", "I"): F(2**9 * 5**3),
        ("E", "II"): F(2**9) * F(5) ** (8 * db - 2),
        ("F", "II"): 3 * F(5**3),
        ("F", "IV"): F(2**9 * 3 * 5**3),
        ("F", "III"): 2**9 * 3 * F(5) ** (8 * db + 2),
    }
    key = (label.family, label.case)
    if key in c:
        const = c[key]
        if key == ("F", "II"):
            const *= {1: F(2) ** (8 * da - 10), 2: F(2**8), 3: F(2**10)}[label.index]
    elif key == ("F", "I"):
        const = 3 * F(5) ** (8 * db + 2) * {1: F(2) ** (8 * da - 10), 2: F(2**8), 3: F(2**10)}[label.index]
    elif key == ("E", "III"):
        const = F(5**3) * {1: F(2) ** (8 * da - 14), 2: F(2**6)}[label.index]
    else:  # E, IV
        const = F(5) ** (8 * db - 2) * {1: F(2) ** (8 * da - 14), 2: F(2**6)}[label.index]
    return const * 7**2


def tabulated_discriminant_st(label: CurveLabel, s: int, t: int, da: int, db: int) -> int:
    """Tabulated discriminant in terms of s = z1^n and t = z2^n."""
    _check_gaps(label, da, db)
    val = _disc_constant(label, da, db) * t
    if label.family == "E":
        val *= s**8
    if val.denominator != 1:
        raise ValueError(f"non-integral discriminant for {label} at da = {da}")
    return val.numerator


def tabulated_discriminant(label: CurveLabel, z1: int, z2: int, n: int, da: int, db: int) -> int:
    return tabulated_discriminant_st(label, z1**n, z2**n, da, db)


SERRE_LEVELS = {
    ("E", "I"): 2**8 * 5**2 * 7,
    ("F", "I", 1): 2 * 3 * 5 * 7,
    ("F", "I", 2): 2**7 * 3 * 5 * 7,
    ("F", "I", 3): 2**3 * 3 * 5 * 7,
    ("E", "II"): 2**8 * 5 * 7,
    ("F", "II", 1): 2 * 3 * 5**2 * 7,
    ("F", "II", 2): 2**7 * 3 * 5**2 * 7,
    ("F", "II", 3): 2**3 * 3 * 5**2 * 7,
    ("E", "III", 1): 2 * 5**2 * 7,
    ("E", "III", 2): 2**5 * 5**2 * 7,
    ("F", "III"): 2**8 * 3 * 5 * 7,
    ("E", "IV", 1): 2 * 5 * 7,
    ("E", "IV", 2): 2**5 * 5 * 7,
    ("F", "IV"): 2**8 * 3 * 5**2 * 7,
}


def serre_level(label: CurveLabel) -> int:
    key = (label.family, label.case, label.index)
    return SERRE_LEVELS.get(key) or SERRE_LEVELS[key[:2]]


def source_t(case: str, w: int, da: int, db: int, which: int = 1, ell: int | None = None):
    """z2^n forced by the first (which=1) or second (which=2) equation of a case.

    Exact when ``ell`` is None, otherwise reduced modulo ell.
    """
    R = _Exact if ell is None else _Modular(ell)
    return source_t_with(R, case, w, da, db, which)


def source_t_with(R, case: str, w, da, db, which: int = 1):
    """source_t over an arithmetic R (exact, modular or vectorised modular)."""
    p2, p5 = R.p2, R.p5
    if which == 1:
        if case == "I":
            t = 10 * (w + p2(2 * da) * p5(2 * db)) ** 2 - 7 * w * w
        elif case == "II":
            t = 2 * (p5(2 * db) * w + p2(2 * da)) ** 2 - 7 * p5(4 * db - 1) * w * w
        elif case == "III":
            t = 5 * (p2(2 * da) * w + p5(2 * db)) ** 2 - 7 * p2(4 * da - 1) * w * w
        else:
            t = (p2(2 * da) * p5(2 * db) * w + 1) ** 2 - 7 * p2(4 * da - 1) * p5(4 * db - 1) * w * w
        return R.norm(t)
    if case == "I":
        three_t = (3 * w + p2(2 * da + 1) * p5(2 * db + 1)) ** 2 - 7 * p2(4 * da + 1) * p5(4 * db + 1)
    elif case == "II":
        three_t = 5 * (3 * p5(2 * db - 1) * w + p2(2 * da + 1)) ** 2 - 7 * p2(4 * da + 1)
    elif case == "III":
        three_t = 2 * (3 * p2(2 * da - 1) * w + p5(2 * db + 1)) ** 2 - 7 * p5(4 * db + 1)
    else:
        three_t = 10 * (3 * p2(2 * da - 1) * p5(2 * db - 1) * w + 1) ** 2 - 7
    return R.third(three_t)


def coefficients_with(R, label: CurveLabel, w, da, db) -> tuple:
    """(a1, a2, a4) of a row over an arithmetic R; a3 = a6 = 0."""
    return _RECIPES[(label.family, label.case, label.index)](R, w, da, db)


# --- reduction and point counting -------------------------------------------

@dataclass(frozen=True)
class ReducedCurve:
    ell: int
    ainvs: tuple[int, int, int, int, int]
    reduction_type: str  # "good", "multiplicative" or "additive"

    @property
    def short_form(self) -> tuple[int, int, int]:
        """(A2, A4, A6) with y^2 = x^3 + A2 x^2 + A4 x + A6 after completing the square."""
        a1, a2, a3, a4, a6 = self.ainvs
        p = self.ell
        inv2, inv4 = pow(2, -1, p), pow(4, -1, p)
        return ((a2 + a1 * a1 * inv4) % p, (a4 + a1 * a3 * inv2) % p, (a6 + a3 * a3 * inv4) % p)


def _classify(ell: int, ainvs) -> str:
    inv = weierstrass_invariants(*ainvs)
    if inv.disc % ell:
        return "good"
    return "multiplicative" if inv.c4 % ell else "additive"


def _check_ell(ell: int):
    if ell in BAD_PRIMES or ell < 11 or not is_prime(ell):
        raise ValueError(f"ell = {ell} must be a prime >= 11")


def _mod(c, ell: int) -> int:
    if isinstance(c, Fraction):
        return c.numerator * pow(c.denominator, -1, ell) % ell
    return c % ell


def reduce_mod(model: FreyCurveModel, ell: int) -> ReducedCurve:
    _check_ell(ell)
    ainvs = tuple(_mod(c, ell) for c in model.ainvs)
    return ReducedCurve(ell, ainvs, _classify(ell, ainvs))


def reduced_curve(label: CurveLabel, w: int, da: int, db: int, ell: int) -> ReducedCurve:
    """The row ``label`` built directly over F_ell from residues w, da, db."""
    _check_ell(ell)
    a1, a2, a4 = _RECIPES[(label.family, label.case, label.index)](_Modular(ell), w % ell, da, db)
    ainvs = (a1 % ell, a2 % ell, 0, a4 % ell, 0)
    return ReducedCurve(ell, ainvs, _classify(ell, ainvs))


def trace_of_frobenius(curve: ReducedCurve) -> int:
    """a_ell = ell + 1 - #E(F_ell), by summing Legendre symbols of the cubic."""
    if curve.reduction_type != "good":
        raise ValueError(f"{curve.reduction_type} reduction at {curve.ell}: use the (ell+1) branch")
    p = curve.ell
    A2, A4, A6 = curve.short_form
    s = 0
    for x in range(p):
        s += legendre(((x + A2) * x + A4) * x + A6, p)
    return -s


def _legendre_table(p: int) -> np.ndarray:
    chi = -np.ones(p, dtype=np.int64)
    chi[0] = 0
    chi[(np.arange(1, p, dtype=np.int64) ** 2) % p] = 1
    return chi


def traces_batch(ell: int, short_forms: np.ndarray) -> np.ndarray:
    """Vectorised trace for rows (A2, A4, A6) of good curves y^2 = x^3 + A2 x^2 + A4 x + A6 over F_ell."""
    chi = _legendre_table(ell)
    x = np.arange(ell, dtype=np.int64)
    A = np.asarray(short_forms, dtype=np.int64).reshape(-1, 3)
    vals = ((x[None, :] + A[:, 0:1]) * x[None, :] % ell + A[:, 1:2]) % ell
    vals = (vals * x[None, :] + A[:, 2:3]) % ell
    return -chi[vals].sum(axis=1)


def quadratic_twist(curve: ReducedCurve, u: int) -> ReducedCurve:
    """Twist of the short form by u: y^2 = x^3 + u A2 x^2 + u^2 A4 x + u^3 A6."""
    p = curve.ell
    A2, A4, A6 = curve.short_form
    ainvs = (0, u * A2 % p, 0, u * u * A4 % p, u**3 * A6 % p)
    return ReducedCurve(p, ainvs, _classify(p, ainvs))
