"""
Running the sieve
=================

First the planted-form check, then a real single-Frey pass over the
level-210 forms, then whatever multi-Frey pairs the local data supports.
"""

# %%
from fivepowers.sieve import SieveConfig, choose_mode, planted_run, run
from fivepowers.newforms import DataUnavailable, NewformStore

rep = planted_run(31)
for p in rep.pairs:
    print(p.f, p.g, "U = 0" if p.U_zero else f"U = {p.U_factorization}")

# %%
# Case I with a - alpha >= 2 against the five rational forms of level 210.
rep = run(SieveConfig("I", 1, 59, mode="single_frey_F"))
for p in rep.pairs:
    print(p.g, "not eliminated" if p.U_zero else f"survivors {p.survivors}, minimal B {p.minimal_B}")

# %%
# Every subcase in the mode the data allows.
store = NewformStore()
for case, top in (("I", 3), ("II", 3), ("III", 2), ("IV", 2)):
    for k in range(1, top + 1):
        base = SieveConfig(case, k, 59)
        try:
            mode = choose_mode(base, store)
        except DataUnavailable as exc:
            print(case, k, "skipped:", exc)
            continue
        print(case, k, mode, "levels", base.levels)
