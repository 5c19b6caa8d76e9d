"""Search small a-invariants for elliptic curves of a given conductor.

Requires ``cypari2``.  Discriminants are screened with numpy (they must be
supported on the primes of the conductor), then PARI computes the conductor
and a_p of the survivors.  Prints one curve per distinct a_p signature.

    python tools/find_curves_pari.py 210 --a4 500 --a6 5000
"""
import argparse
import itertools

import cypari2
import numpy as np

pari = cypari2.Pari()


def search(conductor, a4_bound, a6_bound, sig_primes):
    bad = [int(p) for p in pari.factor(conductor)[0]]
    found = {}
    a6 = np.arange(-a6_bound, a6_bound + 1, dtype=np.int64)
    for a1, a2, a3 in itertools.product((0, 1), (-1, 0, 1), (0, 1)):
        for a4 in range(-a4_bound, a4_bound + 1):
            b2, b4, b6 = a1 * a1 + 4 * a2, 2 * a4 + a1 * a3, a3 * a3 + 4 * a6
            b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
            d = np.abs(-b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6)
            for p in bad:
                for _ in range(64):
                    m = (d % p == 0) & (d > 0)
                    if not m.any():
                        break
                    d = np.where(m, d // p, d)
            for i in np.nonzero(d == 1)[0]:
                E = pari.ellinit([a1, a2, a3, a4, int(a6[i])])
                if int(pari.ellglobalred(E)[0]) != conductor:
                    continue
                sig = tuple(int(pari.ellap(E, p)) for p in sig_primes)
                found.setdefault(sig, (a1, a2, a3, a4, int(a6[i])))
    return found


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("conductor", type=int)
    ap.add_argument("--a4", type=int, default=500)
    ap.add_argument("--a6", type=int, default=5000)
    args = ap.parse_args()
    primes = [p for p in range(11, 32) if pari.isprime(p) and args.conductor % p]
    for sig, ainvs in sorted(search(args.conductor, args.a4, args.a6, primes).items()):
        print(" ".join(map(str, ainvs)), " a_p:", sig)


if __name__ == "__main__":
    main()
