"""Exponents n = 2, 3 and 5.

n = 2: finite congruence certificates (Cases I-III) and the quartic model in Case IV.
n = 3: the Mordell curves y1^2 = x1^3 + 630 c^2, checks of the published
       S-integral points, the sixth-power test and a bounded box search.
n = 5: the family (x, z) = +-(d/2, 3d/2).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from itertools import product
from math import gcd, isqrt

import numpy as np

from .arith import iroot, is_square, order_mod, sqrt_rational, strip
from .equation import EquationParams, lhs
from .frey import weierstrass_invariants


class RefutationFailed(AssertionError):
    """A residue tuple satisfied a congruence that was expected to be impossible."""


# --- n = 2 -----------------------------------------------------------------

@dataclass(frozen=True)
class CongruenceRefutation:
    case: str
    modulus: int
    achievable: frozenset
    required: frozenset
    witness_count: int
    statement: str

    @property
    def refuted(self) -> bool:
        return not (self.achievable & self.required)


def _units(m: int) -> list[int]:
    return [r for r in range(1, m) if gcd(r, m) == 1]


def refute_n2(case: str) -> CongruenceRefutation:
    """Exhaustive residue check that the relevant n = 2 equation has no solution.

    Case I uses z2^2 + 7 z1^8 = 10 c^2 mod 5; Case II uses
    3 z2^2 + 7 2^(4da+1) = 5 c^2 mod 5; Case III uses
    z2^2 + 7 2^(4da-1) z1^8 = 5 c^2 mod 8.
    """
    achievable: set[int] = set()
    required: set[int] = set()
    count = 0
    if case == "I":
        m = 5
        for z1, z2 in product(_units(m), repeat=2):
            achievable.add((z2 * z2 + 7 * z1**8) % m)
            required.add(0)  # 10 c^2
            count += 1
        statement = "z2^2 + 7 z1^8 mod 5 never vanishes"
    elif case == "II":
        m = 5
        for z2 in _units(m):
            for da in range(order_mod(2, m)):
                achievable.add((3 * z2 * z2 + 7 * pow(2, 4 * da + 1, m)) % m)
                required.add(0)  # 5 c^2
                count += 1
        statement = "3 z2^2 + 7 2^(4da+1) = 3 z2^2 + 14 mod 5 never vanishes"
    elif case == "III":
        m = 8
        # 4da - 1 >= 3 for every da >= 1, so da = 1, 2, 3 cover all behaviour mod 8;
        # 5^2 = 1 mod 8, so db mod 2 covers the 5-power.
        for z1, z2, da, db in product(_units(m), _units(m), (1, 2, 3), (0, 1)):
            w = pow(z1, 4, m)
            c = (pow(2, 2 * da, m) * w + pow(5, 2 * db, m)) % m
            achievable.add((z2 * z2 + 7 * pow(2, 4 * da - 1, m) * pow(z1, 8, m)) % m)
            required.add(5 * c * c % m)
            count += 1
        statement = "z2^2 + 7 2^(4da-1) z1^8 = 1 mod 8 while 5 c^2 = 5 mod 8"
    else:
        raise ValueError(f"no congruence refutation for case {case!r}; case IV uses the quartic")
    ref = CongruenceRefutation(case, m, frozenset(achievable), frozenset(required), count, statement)
    if not ref.refuted:
        raise RefutationFailed(f"case {case}: residues {sorted(ref.achievable & ref.required)} agree")
    return ref


@dataclass(frozen=True)
class QuarticModel:
    """3000 T^4 + 200 T^2 + 1 = Y^2 with T = 2^k 5^l x1 (x1 = z1^2)."""
    k: int
    l: int
    coeffs: tuple[int, ...] = (1, 0, 200, 0, 3000)  # low to high

    def T_of(self, x1: int) -> int:
        return 2**self.k * 5**self.l * x1

    def value(self, T: int) -> int:
        return 3000 * T**4 + 200 * T**2 + 1


def n2_case_iv_quartic(da: int, db: int) -> QuarticModel:
    """Rewrite the Case IV equation for n = 2; da = alpha - a, db = beta - b."""
    if da < 1 or db < 1:
        raise ValueError("case IV needs alpha - a >= 1 and beta - b >= 1")
    # 4da - 1 = 4k + 3 and 4db - 1 = 4l + 3
    return QuarticModel(k=da - 1, l=db - 1)


def case_iv_source_value(da: int, db: int, x1: int) -> int:
    """Left side 3 2^(4da-1) 5^(4db-1) x1^4 + 2^(2da+1) 5^(2db) x1^2 + 1, kept as a fraction-free int."""
    q = Fraction(3 * 2 ** (4 * da) * 5 ** (4 * db), 10) * x1**4 + 2 ** (2 * da + 1) * 5 ** (2 * db) * x1**2 + 1
    assert q.denominator == 1
    return q.numerator


@dataclass(frozen=True)
class QuarticCubicMap:
    """Birational map from Y^2 = 3000 T^4 + 200 T^2 + 1 to a Weierstrass cubic.

    With u = 1/T, V = Y/T^2 the quartic becomes V^2 = u^4 + 200 u^2 + 3000;
    putting V = u^2 + w gives u^2 (2w - 200) = 3000 - w^2, and X = -2w,
    Y' = 2u(2w - 200) lands on y^2 = x^3 + 200 x^2 - 12000 x - 2400000.
    The points (0, +-1) go to the point at infinity and its negative.
    """
    cubic: tuple[int, int, int, int, int] = (0, 200, 0, -12000, -2400000)
    invariant_I: int = 12 * 3000 * 1 - 0 + 200**2
    invariant_J: int = 72 * 3000 * 200 * 1 - 2 * 200**3
    recorded_label: str = "134400ed1"
    recorded_rank: int = 0
    recorded_torsion: int = 2

    def image(self, T, Y) -> tuple[Fraction, Fraction] | None:
        if T == 0:
            return None
        u = 1 / Fraction(T)
        w = Fraction(Y) * u * u - u * u
        return -2 * w, 2 * u * (2 * w - 200)

    def residual(self, x, y):
        a1, a2, a3, a4, a6 = self.cubic
        return y * y - (x**3 + a2 * x * x + a4 * x + a6)

    @property
    def jacobian(self) -> tuple[int, int, int, int, int]:
        """y^2 = x^3 - 27 I x - 27 J."""
        return (0, 0, 0, -27 * self.invariant_I, -27 * self.invariant_J)


def isomorphic_over_q(e1, e2) -> bool:
    """Whether two Weierstrass models (a-invariant tuples) are isomorphic over Q."""
    i1, i2 = weierstrass_invariants(*e1), weierstrass_invariants(*e2)
    if i1.disc == 0 or i2.disc == 0:
        raise ValueError("singular model")
    if i1.c4 == 0 or i1.c6 == 0:
        # j = 1728 or 0: compare through c6 (resp. c4) alone with u^6 (resp. u^4)
        if (i1.c4 == 0) != (i2.c4 == 0) or (i1.c6 == 0) != (i2.c6 == 0):
            return False
        if i1.c4 == 0:
            return iroot_fraction(Fraction(i2.c6, i1.c6), 6) is not None
        return iroot_fraction(Fraction(i2.c4, i1.c4), 4) is not None
    u2 = Fraction(i2.c6, i1.c6) / Fraction(i2.c4, i1.c4)
    return u2 * u2 == Fraction(i2.c4, i1.c4) and sqrt_rational(u2) is not None


def iroot_fraction(q: Fraction, k: int) -> Fraction | None:
    a, ea = iroot(q.numerator, k)
    b, eb = iroot(q.denominator, k)
    return Fraction(a, b) if ea and eb else None


# --- n = 3 -----------------------------------------------------------------

@dataclass(frozen=True)
class MordellCurve:
    """y1^2 = x1^3 + 630 c^2, reached from 3Y^2 + 20Y + 10 = c X1^3 by
    x1 = 3c X1, y1 = 3c(3Y + 10)."""
    c: Fraction
    case: str

    @property
    def k(self) -> Fraction:
        return 630 * self.c * self.c

    def contains(self, x1: Fraction, y1: Fraction) -> bool:
        return Fraction(y1) ** 2 == Fraction(x1) ** 3 + self.k

    def to_curve(self, X1: Fraction, Y: Fraction) -> tuple[Fraction, Fraction]:
        return 3 * self.c * X1, 3 * self.c * (3 * Fraction(Y) + 10)

    def from_curve(self, x1: Fraction, y1: Fraction) -> tuple[Fraction, Fraction]:
        X1 = Fraction(x1) / (3 * self.c)
        Y = (Fraction(y1) / (3 * self.c) - 10) / 3
        return X1, Y


@dataclass(frozen=True)
class SIntegralPoint:
    x1: Fraction
    y1: Fraction
    S: frozenset = frozenset()

    def is_s_integral(self) -> bool:
        return all(strip(q.denominator, self.S) == 1 for q in (self.x1, self.y1))


def verify_point(c: Fraction, pt: SIntegralPoint) -> bool:
    return MordellCurve(Fraction(c), "").contains(pt.x1, pt.y1)


def sixth_power_filter(Y: Fraction) -> bool:
    """Can Y be (a {2,5}-unit) * m^6 with gcd(m, 10) = 1 and Y > 0?"""
    Y = Fraction(Y)
    if Y <= 0:
        return False
    num, den = strip(Y.numerator, (2, 5)), strip(Y.denominator, (2, 5))
    if den != 1:
        return False
    _, exact = iroot(num, 6)
    return exact


C_VALUES = {
    "I": ("1", "1/2", "1/4", "1/5", "1/25", "1/10", "1/50", "1/20", "1/100"),
    "II": ("5", "5/2", "5/4"),
    "III": ("2", "2/5", "2/25"),
    "IV": ("10",),
}
S_SETS = {"I": frozenset({2, 5}), "II": frozenset({2}), "III": frozenset({5}), "IV": frozenset()}


@dataclass
class PointRecord:
    case: str
    c: Fraction
    rank: int
    S: frozenset
    source: str
    points: list[tuple[Fraction, Fraction]] = field(default_factory=list)


def load_point_table(text: str | None = None) -> list[PointRecord]:
    if text is None:
        text = resources.files("fivepowers.data").joinpath("mordell_points.txt").read_text()
    records: list[PointRecord] = []
    cur: dict | None = None

    def flush():
        if cur:
            records.append(PointRecord(cur["case"], Fraction(cur["c"]), int(cur["rank"]),
                                       cur["S"], cur.get("source", ""), cur["points"]))

    for raw in text.splitlines() + [""]:
        line = raw.split("#", 1)[0].strip()
        if not line:
            flush()
            cur = None
            continue
        key, _, val = line.partition(":")
        key, val = key.strip(), val.strip()
        if cur is None:
            cur = {"points": []}
        if key == "point":
            x, y = val.split()
            cur["points"].append((Fraction(x), Fraction(y)))
        elif key == "S":
            cur["S"] = frozenset() if val == "-" else frozenset(int(p) for p in val.split())
        elif key in ("case", "c", "rank", "source"):
            cur[key] = val
        else:
            raise ValueError(f"unknown key {key!r} in point table")
    return records


@dataclass(frozen=True)
class CValue:
    c: Fraction
    rank: int
    S: frozenset
    source: str

    @property
    def tag(self) -> str:
        return "rank-0-no-points" if self.rank == 0 else "rank-2-with-point-list"


def n3_c_values(case: str, table: list[PointRecord] | None = None) -> list[CValue]:
    if case not in C_VALUES:
        raise ValueError(f"unknown case {case!r}")
    recs = {r.c: r for r in (table or load_point_table()) if r.case == case}
    out = []
    for c in map(Fraction, C_VALUES[case]):
        if c not in recs:
            raise ValueError(f"point table has no entry for case {case}, c = {c}")
        r = recs[c]
        out.append(CValue(c, r.rank, r.S, r.source))
    return out


@dataclass(frozen=True)
class AuditedPoint:
    c: Fraction
    x1: Fraction
    y1: Fraction
    X1: Fraction
    Y: Fraction
    on_curve: bool
    s_integral: bool
    passes_filter: bool


@dataclass
class AuditReport:
    case: str
    rank0: list[Fraction]
    points: list[AuditedPoint]

    @property
    def certified(self) -> bool:
        return all(p.on_curve and p.s_integral and not p.passes_filter for p in self.points)

    def summary(self) -> str:
        verdict = "no n=3 solutions arise from the published point lists" if self.certified else "FAILED"
        return (f"case {self.case}: {len(self.rank0)} rank-0 c values, "
                f"{len(self.points)} signed points checked, {verdict}")


def n3_audit(case: str, table: list[PointRecord] | None = None) -> AuditReport:
    """Check every listed point on every rank-2 curve for the case and run the filter on its Y."""
    table = table or load_point_table()
    recs = {r.c: r for r in table if r.case == case}
    rank0, rows = [], []
    for cv in n3_c_values(case, table):
        if cv.rank == 0:
            rank0.append(cv.c)
            continue
        curve = MordellCurve(cv.c, case)
        for x1, y1 in recs[cv.c].points:
            for y in (y1, -y1):
                X1, Y = curve.from_curve(x1, y)
                pt = SIntegralPoint(x1, y, cv.S)
                rows.append(AuditedPoint(cv.c, x1, y, X1, Y, curve.contains(x1, y),
                                         pt.is_s_integral(), sixth_power_filter(Y)))
    report = AuditReport(case, rank0, rows)
    for p in rows:
        if not p.on_curve:
            raise AssertionError(f"listed point ({p.x1}, {p.y1}) is off y^2 = x^3 + 630({p.c})^2")
        if not p.s_integral:
            raise AssertionError(f"listed point ({p.x1}, {p.y1}) is not S-integral for S = {sorted(S_SETS[case])}")
        if p.passes_filter:
            raise AssertionError(f"Y = {p.Y} from ({p.x1}, {p.y1}) passes the sixth-power test")
    return report


# --- bounded searches --------------------------------------------------------

_MODULI = (64, 63, 65, 11, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71)
_SQUARES = {M: np.isin(np.arange(M), np.arange(M) ** 2 % M) for M in _MODULI}
_WIDE = 64 * 63 * 65  # first filter works modulo this, through a lookup table
_WIDE_R = np.arange(_WIDE, dtype=np.int64)
_WIDE_R3 = _WIDE_R * _WIDE_R % _WIDE * _WIDE_R % _WIDE
_CHUNK = 1 << 18


def _wide_table(A: int, B: int) -> np.ndarray:
    """ok[r] is True when A r^3 + B can be a square modulo 64, 63 and 65."""
    v = ((A % _WIDE) * _WIDE_R3 + B % _WIDE) % _WIDE
    return _SQUARES[64][v % 64] & _SQUARES[63][v % 63] & _SQUARES[65][v % 65]


def _cubic_survivors(m: np.ndarray, A: int, B: int, m_wide: np.ndarray | None = None) -> np.ndarray:
    """Entries of m for which A m^3 + B passes every quadratic-residue test."""
    if m_wide is None:
        m_wide = m % _WIDE
    keep = m[_wide_table(A, B)[m_wide]]
    for M in _MODULI[3:]:
        if keep.size == 0:
            break
        r = keep % M
        v = ((A % M) * (r * r % M * r % M) + B % M) % M
        keep = keep[_SQUARES[M][v]]
    return keep


def _denominators(S: frozenset, max_exp: int) -> list[int]:
    e2 = range(max_exp + 1) if 2 in S else (0,)
    e5 = range(max_exp + 1) if 5 in S else (0,)
    return sorted(2**s * 5**t for s in e2 for t in e5)


def box_search(c: Fraction, S: frozenset, num_bound: int = 10**6, max_exp: int = 8) -> list[tuple[Fraction, Fraction]]:
    """All rational points (x1, y1), y1 >= 0, on y1^2 = x1^3 + 630c^2 with
    x1 = m/D in lowest terms, |m| <= num_bound, D = 2^s 5^t (s, t <= max_exp, primes in S)."""
    k = 630 * Fraction(c) ** 2
    P, Q = k.numerator, k.denominator
    m_all = np.arange(-num_bound, num_bound + 1, dtype=np.int64)
    # numerators coprime to the primes of D, so every x1 is met exactly once
    variants = {}
    for two, five in product((False, True), repeat=2):
        mask = np.ones(m_all.size, dtype=bool)
        if two:
            mask &= m_all % 2 != 0
        if five:
            mask &= m_all % 5 != 0
        m = m_all[mask]
        variants[(two, five)] = (m, m % _WIDE)
    found = []
    for D in _denominators(S, max_exp):
        m, m_wide = variants[(D % 2 == 0, D % 5 == 0)]
        A, B = Q * Q * D**3, P * Q * D**6
        for mi in _cubic_survivors(m, A, B, m_wide).tolist():
            x = Fraction(mi, D)
            y = sqrt_rational(x**3 + k)
            if y is not None:
                found.append((x, y))
    return sorted(found)


def quartic_search(bound: int = 10**6) -> list[tuple[int, int]]:
    """(T, Y) with |T| <= bound, Y >= 0 and 3000 T^4 + 200 T^2 + 1 = Y^2."""
    out = []
    for lo in range(0, bound + 1, _CHUNK):
        keep = np.arange(lo, min(lo + _CHUNK, bound + 1), dtype=np.int64)
        for M in _MODULI:
            r = keep % M
            t2 = r * r % M
            v = (3000 % M * (t2 * t2 % M) + 200 * t2 + 1) % M
            keep = keep[_SQUARES[M][v]]
        for T in keep.tolist():
            val = 3000 * T**4 + 200 * T**2 + 1
            if is_square(val):
                Y = isqrt(val)
                out.extend({(T, Y), (-T, Y)})
    return sorted(out)


@dataclass(frozen=True)
class BoxSearchResult:
    case: str
    c: Fraction
    found: tuple
    listed: tuple

    @property
    def unlisted(self) -> list:
        return sorted(set(self.found) - set(self.listed))

    @property
    def listed_in_range_missing(self) -> list:
        return sorted(set(self.listed) - set(self.found))


def cross_check(case: str, num_bound: int = 10**6, max_exp: int = 8,
                include_rank0: bool = True) -> list[BoxSearchResult]:
    """Box search every c of a case and compare with the published x1 values."""
    table = load_point_table()
    recs = {r.c: r for r in table if r.case == case}
    out = []
    for cv in n3_c_values(case, table):
        if cv.rank == 0 and not include_rank0:
            continue
        found = box_search(cv.c, cv.S, num_bound, max_exp)
        listed = []
        for x, y in recs[cv.c].points:
            D = x.denominator
            if abs(x.numerator) <= num_bound and D in _denominators(cv.S, max_exp):
                listed.append((x, abs(y)))
        out.append(BoxSearchResult(case, cv.c, tuple(found), tuple(sorted(listed))))
    return out


# --- n = 5 -----------------------------------------------------------------

# Solutions of (x-d)^5 + x^5 + (x+d)^5 = z^5 with gcd(x, d) = 1, d > 0: only d = 2.
# This is an imported fact about the coprime equation, not something checked here.
COPRIME_QUINTIC_SOLUTIONS = {2: ((1, 3), (-1, -3))}


def n5_family(params: EquationParams) -> list[tuple[int, int]]:
    """All (x, z) for n = 5: write r = gcd(x, d), d = r d1, and scale the coprime solutions."""
    d = params.d
    out = []
    for i in range(params.a + 1):
        for j in range(params.b + 1):
            r = 2**i * 5**j
            d1 = d // r
            for x1, z1 in COPRIME_QUINTIC_SOLUTIONS.get(d1, ()):
                x, z = x1 * r, z1 * r
                if lhs(x, d) != z**5:
                    raise AssertionError(f"({x}, {z}) fails the quintic equation for d = {d}")
                out.append((x, z))
    return sorted(out)
