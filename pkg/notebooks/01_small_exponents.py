"""
Small exponents by hand
=======================

Walk through the worked n = 5 solution, the residue certificates for n = 2,
the Mordell-curve audit for n = 3 and the scaled n = 5 family.
Run with ``python notebooks/01_small_exponents.py``.
"""

# %%
# The smallest solution: d = 2, x = 1, z = 3, n = 5.
from fivepowers.equation import CandidateSolution, EquationParams, decompose, fermat_instances, lhs

sol = CandidateSolution(1, 3, 5, EquationParams(1, 0))
print("lhs =", lhs(1, 2), " z^5 =", 3**5)
dec = decompose(sol)
print(f"case {dec.case}, subcase {dec.subcase_text}, z1 = {dec.z1}, z2 = {dec.z2}")
for inst in fermat_instances(dec):
    print(" ", inst, "->", inst.A * inst.aterm**inst.n + inst.B * inst.bterm**inst.n, "=", inst.C * inst.cterm**2)

# %%
# n = 2: each of the first three cases dies modulo a small number.
from fivepowers.small_n import refute_n2

for case in ("I", "II", "III"):
    r = refute_n2(case)
    print(f"case {case}: mod {r.modulus} the left side lands in {sorted(r.achievable)}, "
          f"the right side needs {sorted(r.required)}")

# %%
# Case IV leads to a quartic. A box search and the cubic model agree there is
# only the trivial point.
from fivepowers.small_n import QuarticCubicMap, isomorphic_over_q, quartic_search

print("points with |T| <= 10^5:", quartic_search(10**5))
m = QuarticCubicMap()
print("cubic", m.cubic, "is the Jacobian:", isomorphic_over_q(m.cubic, m.jacobian))

# %%
# n = 3: every published S-integral point is on its curve and none yields a sixth power.
from fivepowers.small_n import C_VALUES, n3_audit

for case in C_VALUES:
    print(n3_audit(case).summary())

# %%
# n = 5 with d = 2^a 5^b: the only solutions are the scaled copies of (1, 3).
from fivepowers.small_n import n5_family

for a, b in ((1, 0), (2, 1), (3, 2)):
    print(f"a = {a}, b = {b}:", n5_family(EquationParams(a, b)))
