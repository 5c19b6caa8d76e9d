"""
Frey curves and the newform data
================================

Build the curves attached to the worked solution, reduce them modulo small
primes and compare with the bundled newform spaces.
"""

# %%
import numpy as np

from fivepowers.frey import LABELS, build_curve, invariants_of, parse_label, reduce_mod, serre_level, trace_of_frobenius

for label in LABELS:
    if label.case == "I" and label.index == 3:
        model = build_curve(label, 1, 1, 0)
        inv = invariants_of(model)
        print(model, " disc =", inv.disc, " level after lowering:", serre_level(label))

# %%
# Traces of Frobenius of E_{I,3} at the worked point, next to the Hasse bound.
E = build_curve(parse_label("E_I_3"), 1, 1, 0)
for ell in (11, 13, 17, 19, 23, 29, 31):
    red = reduce_mod(E, ell)
    a = trace_of_frobenius(red) if red.reduction_type == "good" else None
    print(ell, red.reduction_type, a, f"|a| <= {2 * np.sqrt(ell):.2f}")

# %%
# Which levels have data here, and do they match the expected space sizes?
from fivepowers.newforms import EXPECTED_SPACES, NewformStore, validate_space

store = NewformStore()
for level in sorted(EXPECTED_SPACES):
    if store.available(level, 59):
        print(validate_space(store.records(level, 59), EXPECTED_SPACES[level]))
    else:
        print(f"level {level}: no data")
