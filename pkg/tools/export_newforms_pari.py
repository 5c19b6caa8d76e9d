"""Export weight-2 newform eigenvalue data from PARI/GP into the local text format.

Requires ``cypari2`` (``pip install cypari2``).  For every Galois orbit of
newforms with trivial character at the requested level, writes the
characteristic polynomial over Q of a_p for each prime p <= bound with
p not dividing the level.

    python tools/export_newforms_pari.py 70 210 350 --bound 97 --out src/fivepowers/data/newforms

Orbits are ordered by dimension, then by their trace sequence
(Tr a_1, Tr a_2, ...), and given letter suffixes in that order, which
mirrors the LMFDB labelling convention for trivial-character spaces.
Labels are local identifiers; nothing here checks them against LMFDB.
"""
import argparse
import os
import sys
import time

import cypari2

pari = cypari2.Pari()
pari.allocatemem(4 * 10**9)


def orbit_letters(i):
    # 0 -> a, 25 -> z, 26 -> ba (base-26 with 'a' as zero digit, LMFDB style)
    if i == 0:
        return "a"
    s = ""
    while i:
        s = chr(ord("a") + i % 26) + s
        i //= 26
    return s


def charpoly_coeffs(value, field):
    """Low-to-high integer coefficients of the charpoly of ``value`` in Q[y]/(field)."""
    deg = int(pari.poldegree(field))
    if deg == 1:
        a = pari.lift(value) if pari.type(value) == "t_POLMOD" else value
        a = pari.simplify(a)
        return [-int(a), 1]
    cp = pari.charpoly(pari.Mod(pari.lift(value), field))
    return [int(pari.polcoef(cp, k)) for k in range(deg + 1)]


def export_level(level, bound, ntrace=40):
    mf = pari.mfinit([level, 2], 0)
    forms = pari.mfeigenbasis(mf)
    fields = pari.mffields(mf)
    primes = [int(p) for p in pari.primes([2, bound]) if level % int(p)]
    nmax = max(bound, ntrace)
    orbits = []
    for f, field in zip(forms, fields):
        deg = int(pari.poldegree(field))
        coefs = pari.mfcoefs(f, nmax)
        traces = []
        for n in range(1, ntrace + 1):
            c = coefs[n]
            if deg == 1:
                traces.append(int(pari.simplify(pari.lift(c)) if pari.type(c) == "t_POLMOD" else c))
            else:
                traces.append(int(pari.trace(pari.Mod(pari.lift(c), field))))
        cps = {p: charpoly_coeffs(coefs[p], field) for p in primes}
        orbits.append((deg, traces, cps))
    orbits.sort(key=lambda o: (o[0], o[1]))
    return orbits


def write_level(level, bound, orbits, out_dir):
    path = os.path.join(out_dir, f"level_{level}.txt")
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(f"# weight-2 trivial-character newforms of level {level}\n")
        fh.write(f"# exported with PARI/GP {'.'.join(map(str, pari.version()))}; primes <= {bound} not dividing the level\n")
        for i, (deg, traces, cps) in enumerate(orbits):
            fh.write("\n")
            fh.write(f"level: {level}\n")
            fh.write(f"label: {level}.2.a.{orbit_letters(i)}\n")
            fh.write(f"degree: {deg}\n")
            for p in sorted(cps):
                fh.write(f"{p} : {' '.join(map(str, cps[p]))}\n")
    os.replace(tmp, path)
    return path


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("levels", type=int, nargs="+")
    ap.add_argument("--bound", type=int, default=97)
    ap.add_argument("--out", default="src/fivepowers/data/newforms")
    args = ap.parse_args(argv)
    os.makedirs(args.out, exist_ok=True)
    for level in args.levels:
        t0 = time.time()
        orbits = export_level(level, args.bound)
        path = write_level(level, args.bound, orbits, args.out)
        dim = sum(o[0] for o in orbits)
        print(f"level {level}: {len(orbits)} orbits, dimension {dim}, {time.time() - t0:.1f}s -> {path}",
              file=sys.stderr)


if __name__ == "__main__":
    main()
