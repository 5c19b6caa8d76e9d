"""The equation (x - d)^5 + x^5 + (x + d)^5 = z^n with d = 2^a 5^b.

Solutions are split into a {2,5}-part and coprime n-th powers z1, z2, sorted
into Cases I-IV by comparing the 2- and 5-adic valuations of x with those of
d, and each case yields two ternary equations A*a^n + B*b^n = C*c^2.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd

from .arith import iroot, legendre, valuation

CASES = ("I", "II", "III", "IV")


class NotASolution(ValueError):
    """Raised when a candidate fails one of the decomposition invariants."""


@dataclass(frozen=True)
class EquationParams:
    a: int
    b: int

    def __post_init__(self):
        if self.a < 0 or self.b < 0:
            raise ValueError("exponents a, b must be non-negative")

    @property
    def d(self) -> int:
        return 2**self.a * 5**self.b


@dataclass(frozen=True)
class CandidateSolution:
    x: int
    z: int
    n: int
    params: EquationParams

    def holds(self) -> bool:
        return lhs(self.x, self.params.d) == self.z**self.n


def lhs(x: int, d: int) -> int:
    return (x - d) ** 5 + x**5 + (x + d) ** 5


def P_of(x: int, d: int) -> int:
    return 3 * x**4 + 20 * d**2 * x**2 + 10 * d**4


def verify_identities(x: int, d: int) -> bool:
    P = P_of(x, d)
    return (
        lhs(x, d) == x * P
        and 10 * (x * x + d * d) ** 2 - 7 * x**4 == P
        and (3 * x * x + 10 * d * d) ** 2 - 70 * d**4 == 3 * P
    )


def classify_case(a: int, b: int, alpha: int, beta: int) -> str:
    two_small = alpha <= a  # 4*alpha < 4a + 1
    five_small = beta <= b
    if two_small:
        return "I" if five_small else "II"
    return "III" if five_small else "IV"


def subcase_index(case: str, da: int) -> int:
    """Index k of the Frey pair E_{case,k}, F_{case,k} used for this exponent gap.

    Cases I/II split on a - alpha in {>=2, 0, 1} -> k = 1, 2, 3.
    Cases III/IV split on alpha - a in {>=2, 1} -> k = 1, 2.
    """
    if case in ("I", "II"):
        return {0: 2, 1: 3}.get(da, 1)
    if da < 1:
        raise ValueError(f"case {case} needs alpha >= a + 1")
    return 2 if da == 1 else 1


SUBCASE_TEXT = {
    ("I", 1): "a>=alpha+2", ("I", 2): "a=alpha", ("I", 3): "a=alpha+1",
    ("II", 1): "a>=alpha+2", ("II", 2): "a=alpha", ("II", 3): "a=alpha+1",
    ("III", 1): "alpha>=a+2", ("III", 2): "alpha=a+1",
    ("IV", 1): "alpha>=a+2", ("IV", 2): "alpha=a+1",
}


def subcase_allows(case: str, subcase: int, da: int) -> bool:
    if case in ("I", "II"):
        return {1: da >= 2, 2: da == 0, 3: da == 1}[subcase]
    return {1: da >= 2, 2: da == 1}[subcase]


@dataclass(frozen=True)
class Decomposition:
    n: int
    params: EquationParams
    alpha: int
    beta: int
    x1: int
    u: int
    v: int
    Z: int
    z1: int
    z2: int
    case: str
    subcase: int
    da: int
    db: int
    nu2P: int = field(default=0)
    nu5P: int = field(default=0)

    @property
    def subcase_text(self) -> str:
        return SUBCASE_TEXT[(self.case, self.subcase)]

    def reconstruct(self) -> tuple[int, int]:
        """Rebuild the (positive) solution (x, z) from the stored pieces."""
        x = 2**self.alpha * 5**self.beta * self.z1**self.n
        z = 2**self.u * 5**self.v * self.z1 * self.z2
        return x, z


def normalize(x: int, z: int, n: int) -> tuple[int, int]:
    """Map a solution to the one with x > 0, z > 0."""
    if x < 0:
        if n % 2 == 0:
            raise NotASolution("x < 0 forces z^n < 0, impossible for even n")
        x, z = -x, -z
    if z < 0:
        if n % 2:
            raise NotASolution("x > 0 forces z > 0 for odd n")
        z = -z
    return x, z


def decompose(sol: CandidateSolution) -> Decomposition:
    """Split a solution into its {2,5}-parts and the coprime n-th powers z1, z2."""
    n, a, b = sol.n, sol.params.a, sol.params.b
    d = sol.params.d
    if sol.x == 0 or sol.z == 0:
        raise NotASolution("x z must be non-zero")
    x, z = normalize(sol.x, sol.z, n)
    alpha, beta = valuation(x, 2), valuation(x, 5)
    x1 = x // (2**alpha * 5**beta)
    P = P_of(x, d)
    nu2P, nu5P = valuation(P, 2), valuation(P, 5)
    P1 = P // (2**nu2P * 5**nu5P)
    z1, ok = iroot(x1, n)
    if not ok:
        raise NotASolution(f"x1 = {x1} is not a perfect {n}th power")
    z2, ok = iroot(P1, n)
    if not ok:
        raise NotASolution(f"P1 = {P1} is not a perfect {n}th power")
    u, v = valuation(z, 2), valuation(z, 5)
    Z = z // (2**u * 5**v)
    if alpha + nu2P != n * u or beta + nu5P != n * v:
        raise NotASolution(
            f"valuation balance fails: alpha+v2(P)={alpha + nu2P} vs n*u={n * u}, "
            f"beta+v5(P)={beta + nu5P} vs n*v={n * v}")
    if Z != z1 * z2:
        raise NotASolution(f"Z = {Z} differs from z1*z2 = {z1 * z2}")
    if gcd(z1, z2) != 1 or gcd(z1 * z2, 10) != 1:
        raise NotASolution(f"z1 = {z1}, z2 = {z2} not coprime to each other and to 10")
    if (z1 * z2) % 7 == 0:
        raise NotASolution(f"7 divides z1*z2 = {z1 * z2}")
    case = classify_case(a, b, alpha, beta)
    expected_nu = {
        "I": (4 * alpha, 4 * beta), "II": (4 * alpha, 4 * b + 1),
        "III": (4 * a + 1, 4 * beta), "IV": (4 * a + 1, 4 * b + 1),
    }[case]
    if (nu2P, nu5P) != expected_nu:
        raise NotASolution(f"valuations of P {(nu2P, nu5P)} disagree with case {case} {expected_nu}")
    da, db = abs(a - alpha), abs(b - beta)
    return Decomposition(n=n, params=sol.params, alpha=alpha, beta=beta, x1=x1, u=u, v=v,
                         Z=Z, z1=z1, z2=z2, case=case, subcase=subcase_index(case, da),
                         da=da, db=db, nu2P=nu2P, nu5P=nu5P)


@dataclass(frozen=True)
class FermatInstance:
    """A*aterm^n + B*bterm^n = C*cterm^2."""
    A: int
    aterm: int
    B: int
    bterm: int
    C: int
    cterm: int
    n: int
    source: str

    def holds(self) -> bool:
        return self.A * self.aterm**self.n + self.B * self.bterm**self.n == self.C * self.cterm**2

    def pairwise_coprime(self) -> bool:
        x, y, w = self.A * self.aterm, self.B * self.bterm, self.C * self.cterm
        return gcd(x, y) == 1 and gcd(x, w) == 1 and gcd(y, w) == 1

    def __str__(self):
        return f"{self.A}*{self.aterm}^{self.n} + {self.B}*{self.bterm}^{self.n} = {self.C}*{self.cterm}^2"


def _pair(case: str, z1: int, z2: int, n: int, da: int, db: int) -> tuple[FermatInstance, FermatInstance]:
    w = z1 ** (2 * n)
    if case == "I":
        first = FermatInstance(1, z2, 7, z1**4, 10, w + 2 ** (2 * da) * 5 ** (2 * db), n, "I.1")
        second = FermatInstance(3, z2, 7 * 2 ** (4 * da + 1) * 5 ** (4 * db + 1), 1, 1,
                                -3 * w - 2 ** (2 * da + 1) * 5 ** (2 * db + 1), n, "I.2")
    elif case == "II":
        first = FermatInstance(1, z2, 7 * 5 ** (4 * db - 1), z1**4, 2,
                               5 ** (2 * db) * w + 2 ** (2 * da), n, "II.1")
        second = FermatInstance(3, z2, 7 * 2 ** (4 * da + 1), 1, 5,
                                -3 * 5 ** (2 * db - 1) * w - 2 ** (2 * da + 1), n, "II.2")
    elif case == "III":
        first = FermatInstance(1, z2, 7 * 2 ** (4 * da - 1), z1**4, 5,
                               2 ** (2 * da) * w + 5 ** (2 * db), n, "III.1")
        second = FermatInstance(3, z2, 7 * 5 ** (4 * db + 1), 1, 2,
                                3 * 2 ** (2 * da - 1) * w + 5 ** (2 * db + 1), n, "III.2")
    elif case == "IV":
        first = FermatInstance(1, z2, 7 * 2 ** (4 * da - 1) * 5 ** (4 * db - 1), z1**4, 1,
                               2 ** (2 * da) * 5 ** (2 * db) * w + 1, n, "IV.1")
        second = FermatInstance(3, z2, 7, 1, 10,
                                3 * 2 ** (2 * da - 1) * 5 ** (2 * db - 1) * w + 1, n, "IV.2")
    else:
        raise ValueError(f"unknown case {case!r}")
    return first, second


def fermat_instances(dec: Decomposition) -> tuple[FermatInstance, FermatInstance]:
    return _pair(dec.case, dec.z1, dec.z2, dec.n, dec.da, dec.db)


def check_seven_coprime(dec: Decomposition) -> bool:
    if (dec.z1 * dec.z2) % 7 == 0:
        return False
    return all(inst.cterm % 7 for inst in fermat_instances(dec))


def seven_residue_certificate() -> dict[str, int]:
    """Exhaustively confirm that no c-term of the eight equations vanishes mod 7.

    Runs over every non-zero square w mod 7 (w stands for z1^(2n) with 7 not
    dividing z1) and every exponent gap modulo 6, the common multiple of the
    orders of 2 and 5 mod 7. A zero c-term would make -1 a square mod 7.
    Returns the number of residue tuples checked per equation.
    """
    if legendre(-1, 7) != -1:
        raise AssertionError("-1 is a square mod 7?")
    squares = sorted({r * r % 7 for r in range(1, 7)})
    counts: dict[str, int] = {}
    for case in CASES:
        for da in range(1, 7) if case in ("III", "IV") else range(0, 6):
            for db in range(1, 7) if case in ("II", "IV") else range(0, 6):
                for w in squares:
                    for inst, c in zip(("1", "2"), _c_terms_mod7(case, w, da, db)):
                        key = f"{case}.{inst}"
                        if c % 7 == 0:
                            raise AssertionError(f"c-term of {key} vanishes mod 7 at w={w}, da={da}, db={db}")
                        counts[key] = counts.get(key, 0) + 1
    return counts


def _c_terms_mod7(case: str, w: int, da: int, db: int) -> tuple[int, int]:
    p2 = lambda e: pow(2, e, 7)  # noqa: E731
    p5 = lambda e: pow(5, e, 7)  # noqa: E731
    if case == "I":
        return w + p2(2 * da) * p5(2 * db), -3 * w - p2(2 * da + 1) * p5(2 * db + 1)
    if case == "II":
        return p5(2 * db) * w + p2(2 * da), -3 * p5(2 * db - 1) * w - p2(2 * da + 1)
    if case == "III":
        return p2(2 * da) * w + p5(2 * db), 3 * p2(2 * da - 1) * w + p5(2 * db + 1)
    return p2(2 * da) * p5(2 * db) * w + 1, 3 * p2(2 * da - 1) * p5(2 * db - 1) * w + 1
