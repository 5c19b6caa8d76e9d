from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, strategies as st

from fivepowers.equation import EquationParams, lhs
from fivepowers.small_n import (C_VALUES, S_SETS, MordellCurve, QuarticCubicMap, SIntegralPoint, box_search,
                                case_iv_source_value, cross_check, isomorphic_over_q, load_point_table,
                                n2_case_iv_quartic, n3_audit, n3_c_values, n5_family, quartic_search,
                                refute_n2, sixth_power_filter, verify_point)


@pytest.mark.parametrize("case,modulus,achievable,required,count", [
    ("I", 5, {1, 3}, {0}, 16),
    ("II", 5, {1, 2}, {0}, 16),
    ("III", 8, {1}, {5}, 96),
])
def test_n2_certificates(case, modulus, achievable, required, count):
    ref = refute_n2(case)
    assert ref.modulus == modulus
    assert set(ref.achievable) == achievable and set(ref.required) == required
    assert ref.witness_count == count and ref.refuted


def test_n2_case_i_brute_force():
    # independent of refute_n2: every unit pair mod 5
    vals = {(z2 * z2 + 7 * z1**8) % 5 for z1, z2 in product(range(1, 5), repeat=2)}
    assert vals == {1, 3}


@given(st.integers(1, 6), st.integers(1, 6), st.integers(1, 10**5))
def test_case_iv_quartic_rewrite(da, db, x1):
    q = n2_case_iv_quartic(da, db)
    T = q.T_of(x1)
    # 3000 T^4 + 200 T^2 + 1 with T = 2^(da-1) 5^(db-1) x1 equals the source value
    assert q.value(T) == case_iv_source_value(da, db, x1)


def test_quartic_map_is_birational_onto_cubic():
    m = QuarticCubicMap()
    for T in range(-40, 41):
        for sign in (1, -1):
            Y = sign * (T * T + 7)  # arbitrary, the residual identity holds off the curve too
            q = 3000 * T**4 + 200 * T**2 + 1
            if T == 0:
                continue
            x, y = m.image(T, Y)
            w = Fraction(Y, T * T) - Fraction(1, T * T)
            assert m.residual(x, y) == 4 * (2 * w - 200) * (Y * Y - q) / Fraction(T) ** 4
    assert isomorphic_over_q(m.cubic, m.jacobian)


def test_isomorphism_check_distinguishes_twists():
    e = (0, 0, 0, -1, 0)
    assert isomorphic_over_q(e, (0, 0, 0, -16, 0))  # u = 2
    assert not isomorphic_over_q(e, (0, 0, 0, -4, 0))  # 4 is not a fourth power


def test_quartic_search_small():
    assert quartic_search(5000) == [(0, 1)]


def test_mordell_maps_round_trip():
    for case, cs in C_VALUES.items():
        for c in map(Fraction, cs):
            curve = MordellCurve(c, case)
            for X1, Y in ((Fraction(3), Fraction(-2)), (Fraction(11), Fraction(-70)), (Fraction(1, 4), Fraction(5))):
                assert curve.from_curve(*curve.to_curve(X1, Y)) == (X1, Y)


@given(st.fractions(min_value=-100, max_value=100), st.sampled_from([Fraction(c) for cs in C_VALUES.values() for c in cs]))
def test_mordell_transform_preserves_equation(Y, c):
    # 3Y^2 + 20Y + 10 = c X1^3 maps onto y1^2 = x1^3 + 630 c^2
    curve = MordellCurve(c, "")
    X1_cubed = (3 * Y * Y + 20 * Y + 10) / c
    x1, y1 = curve.to_curve(Fraction(0), Y)
    # x1^3 = 27 c^3 X1^3, so the equation reads y1^2 - 630 c^2 = 27 c^3 X1^3
    assert y1 * y1 - curve.k == 27 * c**3 * X1_cubed


def test_sixth_power_filter():
    assert sixth_power_filter(Fraction(1))
    assert sixth_power_filter(Fraction(3**6 * 2**5, 5**3))
    assert not sixth_power_filter(Fraction(-70))
    assert sixth_power_filter(Fraction(2))  # a {2,5}-unit times 1^6
    assert not sixth_power_filter(Fraction(7, 3))
    assert not sixth_power_filter(Fraction(3**5))


def test_point_table_shape():
    table = load_point_table()
    assert {(r.case, r.c) for r in table} == {(k, Fraction(c)) for k, cs in C_VALUES.items() for c in cs}
    for r in table:
        assert r.S == S_SETS[r.case]
        assert (r.rank == 0) == (not r.points)


@pytest.mark.parametrize("case", list(C_VALUES))
def test_n3_audit(case):
    rep = n3_audit(case)
    assert rep.certified
    assert {cv.c for cv in n3_c_values(case)} == set(rep.rank0) | {p.c for p in rep.points}


def test_n3_audit_totals():
    reps = {case: n3_audit(case) for case in C_VALUES}
    counts = {case: len(r.points) for case, r in reps.items()}
    assert counts == {"I": 30, "II": 16, "III": 16, "IV": 8}
    assert any(p.X1 == 11 and p.Y == -70 for p in reps["IV"].points)


def test_point_verification_catches_bad_point():
    good = load_point_table()
    rec = next(r for r in good if r.points)
    x, y = rec.points[0]
    assert verify_point(rec.c, SIntegralPoint(x, y, rec.S))
    assert not verify_point(rec.c, SIntegralPoint(x, y + 1, rec.S))
    assert not SIntegralPoint(Fraction(1, 3), y, frozenset({2})).is_s_integral()


def test_audit_rejects_corrupted_table():
    text = "case: IV\nc: 10\nrank: 2\nS: -\nsource: test\npoint: 1 2\n"
    with pytest.raises(AssertionError):
        n3_audit("IV", load_point_table(text))


def test_box_search_case_iv():
    (res,) = cross_check("IV", 10**5, 4)
    assert not res.unlisted and not res.listed_in_range_missing
    assert res.found


def test_box_search_finds_planted_point():
    # (X1, Y) = (11, -70) on the c = 10 curve sits at (x1, y1) = (330, -6000)
    c = Fraction(10)
    found = box_search(c, frozenset(), 1000, 0)
    assert (Fraction(330), Fraction(6000)) in found
    for x, y in found:
        assert y * y == x**3 + 630 * c * c


@pytest.mark.parametrize("a,b", [(0, 0), (0, 3), (1, 0), (2, 1), (5, 5)])
def test_n5_family(a, b):
    params = EquationParams(a, b)
    d = params.d
    sols = n5_family(params)
    assert sols == ([] if a == 0 else sorted([(d // 2, 3 * d // 2), (-d // 2, -3 * d // 2)]))
    for x, z in sols:
        assert lhs(x, d) == z**5


def test_n5_brute_force_small_d():
    # independent scan for d = 2, 4, 10 and |x| < 2000
    from fivepowers.arith import iroot
    for a, b in ((1, 0), (2, 0), (1, 1)):
        d = 2**a * 5**b
        hits = sorted((x, iroot(lhs(x, d), 5)[0]) for x in range(-2000, 2001)
                      if x and iroot(lhs(x, d), 5)[1])
        assert hits == n5_family(EquationParams(a, b))
