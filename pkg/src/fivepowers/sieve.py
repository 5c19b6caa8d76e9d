"""Elimination sieve over newform pairs.

For a case, subcase and prime ell, every hypothetical solution falls into a
parameter class (w, da mod ell-1, db mod ell-1) with w = z1^(2n) mod ell; the
source equations then force t = z2^n mod ell.  Each class reduces the two Frey
curves E and F mod ell and compares them with forms f and g:

    R(f)  = N(a_ell(E) - a_ell(f))             if E has good reduction
          = N((ell+1)^2 - a_ell(f)^2)          otherwise
    T_ell = ell * prod over classes gcd(R(f), R'(g))
    U     = gcd over ell <= B of T_ell

A solution coming from (f, g) with exponent n forces n | U.  Classes only
matter through the pair of (trace or "bad") keys of E and F, so T_ell is kept
as a multiset {gcd value: multiplicity} and U as a factorisation.
"""
from __future__ import annotations

import json
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from importlib import resources
from math import gcd, prod

import numpy as np
from sympy import factorint

from .arith import is_prime, primes_in
from .equation import CASES, subcase_allows
from .frey import (CurveLabel, ReducedCurve, _classify, build_curve, coefficients_with, reduce_mod,
                   serre_level, source_t_with, trace_of_frobenius, traces_batch)
from .newforms import (DataUnavailable, NewformRecord, NewformStore, norm_difference,
                       norm_multiplicative, rational_record)

EXCLUDED = (2, 3, 5, 7)
MODES = ("multi_frey", "single_frey_E", "single_frey_F")
POLICIES = ("squares_only", "all_residues")
# key values for curves without good reduction
MULT, ADDITIVE = 10**6, 10**6 + 1


class InconsistentClass(AssertionError):
    """The two source equations of a case disagree on t for some class."""


@dataclass(frozen=True)
class SieveConfig:
    case: str
    subcase: int
    prime_bound: int = 59
    residue_policy: str = "squares_only"
    mode: str = "multi_frey"
    excluded_primes: tuple[int, ...] = EXCLUDED
    early_exit: bool = True

    def __post_init__(self):
        if self.case not in CASES:
            raise ValueError(f"unknown case {self.case!r}")
        top = 3 if self.case in ("I", "II") else 2
        if not 1 <= self.subcase <= top:
            raise ValueError(f"case {self.case} has subcases 1..{top}")
        if self.prime_bound < 11:
            raise ValueError("prime bound must be at least 11")
        if self.residue_policy not in POLICIES:
            raise ValueError(f"residue policy must be one of {POLICIES}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if not set(EXCLUDED) <= set(self.excluded_primes):
            raise ValueError("excluded primes must contain 2, 3, 5, 7")

    @property
    def labels(self) -> tuple[CurveLabel, CurveLabel]:
        return CurveLabel("E", self.case, self.subcase), CurveLabel("F", self.case, self.subcase)

    @property
    def levels(self) -> tuple[int, int]:
        e, f = self.labels
        return serre_level(e), serre_level(f)

    @property
    def primes(self) -> list[int]:
        return primes_in(11, self.prime_bound, self.excluded_primes)


@dataclass(frozen=True)
class ParamClass:
    ell: int
    w: int
    da: int
    db: int
    t: int


class _VecMod:
    """Arithmetic mod ell on numpy arrays; exponents are read mod ell - 1."""

    def __init__(self, ell: int):
        self.ell = ell
        self.P2 = np.array([pow(2, k, ell) for k in range(ell - 1)], dtype=np.int64)
        self.P5 = np.array([pow(5, k, ell) for k in range(ell - 1)], dtype=np.int64)
        self.inv4, self.inv3 = pow(4, -1, ell), pow(3, -1, ell)

    def p2(self, e):
        return self.P2[np.asarray(e) % (self.ell - 1)]

    def p5(self, e):
        return self.P5[np.asarray(e) % (self.ell - 1)]

    def quarter(self, x):
        return x * self.inv4 % self.ell

    def third(self, x):
        return x * self.inv3 % self.ell

    def norm(self, x):
        return np.asarray(x) % self.ell


def pinned_da(case: str, subcase: int) -> int | None:
    """The exact exponent gap fixed by a subcase, or None when it only needs da >= 2."""
    for da in (0, 1):
        if subcase_allows(case, subcase, da) and not subcase_allows(case, subcase, 2):
            return da
    return None


def _class_grid(case: str, subcase: int, ell: int, policy: str):
    if ell in EXCLUDED or not is_prime(ell):
        raise ValueError(f"ell = {ell} must be a prime other than 2, 3, 5, 7")
    if policy == "squares_only":
        ws = sorted({x * x % ell for x in range(ell)})
    else:
        ws = list(range(ell))
    pin = pinned_da(case, subcase)
    das = [pin] if pin is not None else list(range(ell - 1))
    dbs = list(range(ell - 1))
    W, DA, DB = (g.ravel() for g in np.meshgrid(np.array(ws, dtype=np.int64), np.array(das, dtype=np.int64),
                                                np.array(dbs, dtype=np.int64), indexing="ij"))
    R = _VecMod(ell)
    t1 = source_t_with(R, case, W, DA, DB, 1)
    t2 = source_t_with(R, case, W, DA, DB, 2)
    bad = np.nonzero(t1 != t2)[0]
    if bad.size:
        i = bad[0]
        raise InconsistentClass(f"case {case}, ell {ell}: w={W[i]}, da={DA[i]}, db={DB[i]} gives t = {t1[i]} vs {t2[i]}")
    return R, W, DA, DB, t1


def param_classes(case: str, subcase: int, ell: int, policy: str = "squares_only") -> list[ParamClass]:
    _, W, DA, DB, T = _class_grid(case, subcase, ell, policy)
    return [ParamClass(ell, int(w), int(a), int(b), int(t)) for w, a, b, t in zip(W, DA, DB, T)]


@lru_cache(maxsize=None)
def _trace_table(ell: int) -> np.ndarray:
    """a_ell of y^2 = x^3 + A2 x^2 + A4 x for every (A2, A4) in F_ell^2."""
    A2, A4 = np.meshgrid(np.arange(ell), np.arange(ell), indexing="ij")
    forms = np.stack([A2.ravel(), A4.ravel(), np.zeros(ell * ell, dtype=np.int64)], axis=1)
    return traces_batch(ell, forms).reshape(ell, ell)


def _curve_keys(R: _VecMod, label: CurveLabel, W, DA, DB) -> np.ndarray:
    """Trace of Frobenius for good classes, MULT or ADDITIVE otherwise."""
    ell = R.ell
    a1, a2, a4 = coefficients_with(R, label, W, DA, DB)
    a1 = np.broadcast_to(np.asarray(a1) % ell, W.shape)
    a2 = np.broadcast_to(np.asarray(a2) % ell, W.shape)
    a4 = np.broadcast_to(np.asarray(a4) % ell, W.shape)
    b2 = (a1 * a1 + 4 * a2) % ell
    disc = a4 * a4 % ell * ((b2 * b2 - 64 * a4) % ell) % ell
    c4 = (b2 * b2 - 48 * a4) % ell
    A2 = (a2 + a1 * a1 * R.inv4) % ell
    keys = _trace_table(ell)[A2, a4]
    keys = np.where(disc == 0, np.where(c4 == 0, ADDITIVE, MULT), keys)
    return keys


@dataclass(frozen=True)
class ClassTable:
    """Multiplicities of (E key, F key) over all parameter classes at one prime."""
    ell: int
    num_classes: int
    counts: tuple[tuple[int, int, int], ...]  # (key_E, key_F, multiplicity)


def class_table(config: SieveConfig, ell: int) -> ClassTable:
    R, W, DA, DB, _ = _class_grid(config.case, config.subcase, ell, config.residue_policy)
    e_lab, f_lab = config.labels
    kE = _curve_keys(R, e_lab, W, DA, DB) if config.mode != "single_frey_F" else np.zeros_like(W)
    kF = _curve_keys(R, f_lab, W, DA, DB) if config.mode != "single_frey_E" else np.zeros_like(W)
    pairs, mult = np.unique(np.stack([kE, kF], axis=1), axis=0, return_counts=True)
    return ClassTable(ell, int(W.size), tuple((int(a), int(b), int(c)) for (a, b), c in zip(pairs, mult)))


def r_from_key(form: NewformRecord, ell: int, key: int) -> int:
    if key == MULT:
        return norm_multiplicative(form, ell)
    if key == ADDITIVE:
        return 0  # never reached for these curves; 0 is the uninformative choice
    return norm_difference(form, ell, key)


def r_value(label: CurveLabel, cls: ParamClass, form: NewformRecord) -> int:
    """R for one class, built from scratch (reference path for the vectorised sieve)."""
    R = _VecMod(cls.ell)
    W, DA, DB = (np.array([v], dtype=np.int64) for v in (cls.w, cls.da, cls.db))
    return r_from_key(form, cls.ell, int(_curve_keys(R, label, W, DA, DB)[0]))


@dataclass(frozen=True)
class TValue:
    """T_ell = ell * prod(g ** m for g, m in factors); zero if any g is 0."""
    ell: int
    factors: tuple[tuple[int, int], ...]

    @property
    def is_zero(self) -> bool:
        return any(g == 0 for g, _ in self.factors)

    def value(self) -> int:
        if self.is_zero:
            return 0
        return self.ell * prod(g**m for g, m in self.factors)

    def factorization(self) -> dict[int, int]:
        out = Counter({self.ell: 1})
        for g, m in self.factors:
            for p, e in _factor(g).items():
                out[p] += e * m
        return dict(out)


@lru_cache(maxsize=1 << 16)
def _factor(g: int) -> dict[int, int]:
    return {int(p): int(e) for p, e in factorint(g).items()} if g > 1 else {}


def t_value(f: NewformRecord | None, g: NewformRecord | None, table: ClassTable) -> TValue:
    ell = table.ell
    cache_f: dict[int, int] = {}
    cache_g: dict[int, int] = {}
    acc: Counter = Counter()
    for kE, kF, m in table.counts:
        if f is not None:
            if kE not in cache_f:
                cache_f[kE] = r_from_key(f, ell, kE)
            rf = cache_f[kE]
        if g is not None:
            if kF not in cache_g:
                cache_g[kF] = r_from_key(g, ell, kF)
            rg = cache_g[kF]
        val = gcd(rf, rg) if f is not None and g is not None else (rf if f is not None else rg)
        if val != 1:
            acc[val] += m
    return TValue(ell, tuple(sorted(acc.items())))


def _smooth(fact: dict[int, int], bound: int = 5) -> bool:
    return all(p <= bound for p in fact)


@dataclass
class PairResult:
    f: str | None
    g: str | None
    T: dict[int, dict]
    U_zero: bool
    U_factorization: dict[int, int]
    survivors: list[int] | None  # None when U = 0 (nothing eliminated)
    minimal_B: int | None
    primes_used: list[int]

    @property
    def U(self) -> int:
        return 0 if self.U_zero else prod(p**e for p, e in self.U_factorization.items())

    @property
    def eliminated(self) -> bool:
        return not self.U_zero


def u_value(f: NewformRecord | None, g: NewformRecord | None, tables: list[ClassTable],
            early_exit: bool = True) -> PairResult:
    U: dict[int, int] | None = None
    Tlog: dict[int, dict] = {}
    used, minimal_B = [], None
    for table in tables:
        T = t_value(f, g, table)
        used.append(table.ell)
        if T.is_zero:
            Tlog[table.ell] = {"zero": True}
            continue
        fact = T.factorization()
        Tlog[table.ell] = {"zero": False, "multiset": [[gv, m] for gv, m in T.factors]}
        U = dict(fact) if U is None else {p: min(e, fact[p]) for p, e in U.items() if p in fact}
        if minimal_B is None and _smooth(U):
            minimal_B = table.ell
            if early_exit:
                break
    zero = U is None
    survivors = None if zero else sorted(p for p in U if p >= 7)
    return PairResult(f.label if f else None, g.label if g else None, Tlog, zero,
                      {} if zero else dict(sorted(U.items())), survivors, minimal_B, used)


@dataclass
class SieveReport:
    config: dict
    levels: dict[str, int | None]
    data_origin: dict[str, str]
    class_counts: dict[int, int]
    pairs: list[PairResult] = field(default_factory=list)

    @property
    def not_eliminated(self) -> list[tuple]:
        return [(p.f, p.g) for p in self.pairs if p.U_zero]

    @property
    def surviving_primes(self) -> list[int] | None:
        """Primes n >= 7 left by at least one pair; None if some pair eliminates nothing."""
        if self.not_eliminated:
            return None
        return sorted({q for p in self.pairs for q in p.survivors})

    def to_json(self) -> dict:
        return {
            "schema": "fivepowers.sieve-report/1",
            "config": self.config,
            "levels": self.levels,
            "data_origin": self.data_origin,
            "class_counts": {str(k): v for k, v in sorted(self.class_counts.items())},
            "pairs": [
                {"f": p.f, "g": p.g,
                 "T": {str(k): v for k, v in sorted(p.T.items())},
                 "U": {"zero": p.U_zero, "factorization": {str(k): v for k, v in p.U_factorization.items()},
                       "value": str(p.U) if not p.U_zero and p.U.bit_length() <= 256 else None},
                 "survivors": p.survivors, "minimal_B": p.minimal_B, "primes_used": p.primes_used}
                for p in self.pairs],
            "summary": {"pairs": len(self.pairs), "not_eliminated": [list(x) for x in self.not_eliminated],
                        "surviving_primes": self.surviving_primes},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, sort_keys=True) + "\n"


def _pair_worker(args):
    chunk, tables, early_exit = args
    return [u_value(f, g, tables, early_exit) for f, g in chunk]


def run_pairs(config: SieveConfig, forms_E: list[NewformRecord] | None, forms_F: list[NewformRecord] | None,
              jobs: int = 1, data_origin: dict | None = None) -> SieveReport:
    tables = [class_table(config, ell) for ell in config.primes]
    if config.mode == "multi_frey":
        pairs = [(f, g) for f in forms_E for g in forms_F]
    elif config.mode == "single_frey_E":
        pairs = [(f, None) for f in forms_E]
    else:
        pairs = [(None, g) for g in forms_F]
    if jobs > 1 and len(pairs) > 1:
        size = -(-len(pairs) // jobs)
        chunks = [pairs[i:i + size] for i in range(0, len(pairs), size)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = [r for part in pool.map(_pair_worker, [(c, tables, config.early_exit) for c in chunks])
                       for r in part]
    else:
        results = _pair_worker((pairs, tables, config.early_exit))
    results.sort(key=lambda r: (r.f or "", r.g or ""))
    lvE, lvF = config.levels
    return SieveReport(
        config=asdict(config),
        levels={"E": lvE if config.mode != "single_frey_F" else None,
                "F": lvF if config.mode != "single_frey_E" else None},
        data_origin=data_origin or {},
        class_counts={t.ell: t.num_classes for t in tables},
        pairs=results)


def choose_mode(config: SieveConfig, store: NewformStore) -> str:
    """Multi-Frey when both levels have data, otherwise the side that has data."""
    lvE, lvF = config.levels
    hasE = store.available(lvE, config.prime_bound)
    hasF = store.available(lvF, config.prime_bound)
    if hasE and hasF:
        return "multi_frey"
    if hasE:
        return "single_frey_E"
    if hasF:
        return "single_frey_F"
    raise DataUnavailable(lvE, f"and level {lvF}: neither Frey curve has newform data")


def run(config: SieveConfig, store: NewformStore | None = None, jobs: int = 1) -> SieveReport:
    store = store or NewformStore()
    lvE, lvF = config.levels
    forms_E = forms_F = None
    origin = {}
    if config.mode in ("multi_frey", "single_frey_E"):
        forms_E, origin["E"] = store.load(lvE, config.prime_bound)
    if config.mode in ("multi_frey", "single_frey_F"):
        forms_F, origin["F"] = store.load(lvF, config.prime_bound)
    for side, forms, lv in (("E", forms_E, lvE), ("F", forms_F, lvF)):
        if forms is not None and not forms:
            raise DataUnavailable(lv, f"empty form list for {side}")
    return run_pairs(config, forms_E, forms_F, jobs, origin)


# --- planted-form harness ---------------------------------------------------------

# The n = 5 solution x = 1, z = 3 for d = 2: Case I, a = alpha + 1, z1 = 1, z2 = 3.
WORKED_CLASS = {"case": "I", "subcase": 3, "z1": 1, "z2": 3, "n": 5, "da": 1, "db": 0}


def planted_form(label: CurveLabel, w: int, da: int, db: int, primes: list[int], name: str) -> NewformRecord:
    """A rational 'newform' whose a_ell are the traces of an exact Frey curve."""
    model = build_curve(label, w, da, db)
    traces = {}
    for ell in primes:
        red = reduce_mod(model, ell)
        traces[ell] = trace_of_frobenius(red) if red.reduction_type == "good" else ell + 1
    return rational_record(0, name, traces)


def curve_form(ainvs, primes: list[int], name: str) -> NewformRecord:
    """A rational record from any elliptic curve with good reduction at the given primes."""
    traces = {}
    for ell in primes:
        red_ainvs = tuple(int(c) % ell for c in ainvs)
        red = ReducedCurve(ell, red_ainvs, _classify(ell, red_ainvs))
        traces[ell] = trace_of_frobenius(red)
    return rational_record(0, name, traces)


def load_level210_curves() -> dict[str, tuple[int, ...]]:
    text = resources.files("fivepowers.data").joinpath("curves_210.txt").read_text()
    out = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].split()
        if line:
            out[line[0]] = tuple(int(c) for c in line[1:])
    return out


def planted_run(prime_bound: int = 31, jobs: int = 1, with_mismatch: bool = True) -> SieveReport:
    """Feed the sieve forms built from the worked solution's own Frey curves.

    The pair (planted E form, planted F form) must never be eliminated.  With
    ``with_mismatch`` a genuine level-210 curve is added on each side; every
    pair involving it should be eliminated down to small primes.
    """
    wc = WORKED_CLASS
    config = SieveConfig(wc["case"], wc["subcase"], prime_bound, early_exit=False)
    primes = config.primes
    w = wc["z1"] ** (2 * wc["n"])
    e_lab, f_lab = config.labels
    fE = planted_form(e_lab, w, wc["da"], wc["db"], primes, "planted-E")
    fF = planted_form(f_lab, w, wc["da"], wc["db"], primes, "planted-F")
    forms_E, forms_F = [fE], [fF]
    if with_mismatch:
        curves = load_level210_curves()
        forms_E.append(curve_form(curves["210.2.a.b"], primes, "mismatch-210b"))
        forms_F.append(curve_form(curves["210.2.a.a"], primes, "mismatch-210a"))
    return run_pairs(config, forms_E, forms_F, jobs, {"E": "planted", "F": "planted"})
