"""Command line front end.

Exit codes: 0 success, 1 mathematical mismatch, 2 data unavailable, 3 usage error.
Every command writes a run manifest (JSON) describing what ran and on what.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import platform
import random
import sys
import time
from dataclasses import asdict
from fractions import Fraction
from importlib import metadata
from pathlib import Path

from . import __version__
from .equation import (CandidateSolution, EquationParams, NotASolution, decompose, fermat_instances,
                       lhs, verify_identities)
from .frey import (build_curve, invariants_of, parse_label, reduce_mod, serre_level,
                   source_t, tabulated_discriminant_st, trace_of_frobenius)
from .newforms import (EXPECTED_SPACES, DataUnavailable, LmfdbClient, NewformStore, fetch_lmfdb,
                       validate_space)
from .sieve import SieveConfig, choose_mode, planted_run, run
from .small_n import (C_VALUES, QuarticCubicMap, cross_check, isomorphic_over_q, n2_case_iv_quartic,
                      n3_audit, n5_family, quartic_search, refute_n2)

OK, MISMATCH, UNAVAILABLE, USAGE = 0, 1, 2, 3
MODE_ALIASES = {"auto": "auto", "multi": "multi_frey", "single-E": "single_frey_E", "single-F": "single_frey_F",
                "multi_frey": "multi_frey", "single_frey_E": "single_frey_E", "single_frey_F": "single_frey_F"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE, f"{self.prog}: error: {message}\n")


def _emit(args, payload: dict, text: str):
    if args.json:
        print(json.dumps(payload, indent=1, sort_keys=True, default=str))
    else:
        print(text)


# --- check -------------------------------------------------------------------------

def cmd_check(args) -> tuple[int, dict]:
    params = EquationParams(args.a, args.b)
    sol = CandidateSolution(args.x, args.z, args.n, params)
    left = lhs(args.x, params.d)
    if not sol.holds():
        msg = f"not a solution: lhs = {left} but z^n = {args.z ** args.n}"
        _emit(args, {"ok": False, "error": msg}, msg)
        return MISMATCH, {"ok": False}
    try:
        dec = decompose(sol)
    except NotASolution as exc:
        _emit(args, {"ok": False, "error": str(exc)}, f"decomposition failed: {exc}")
        return MISMATCH, {"ok": False}
    insts = fermat_instances(dec)
    rows = [{"equation": i.source, "text": str(i), "lhs": i.A * i.aterm**i.n + i.B * i.bterm**i.n,
             "rhs": i.C * i.cterm**2, "holds": i.holds(), "coprime": i.pairwise_coprime()} for i in insts]
    payload = {"ok": all(r["holds"] for r in rows), "decomposition": asdict(dec),
               "subcase_text": dec.subcase_text, "instances": rows}
    lines = [f"(x - {params.d})^5 + x^5 + (x + {params.d})^5 = z^{args.n} holds for x = {args.x}, z = {args.z}",
             f"case {dec.case}, subcase {dec.subcase} ({dec.subcase_text}); alpha = {dec.alpha}, beta = {dec.beta}",
             f"z1 = {dec.z1}, z2 = {dec.z2}, da = {dec.da}, db = {dec.db}"]
    for r in rows:
        lines.append(f"{r['equation']}: {r['text']}  [{r['lhs']} = {r['rhs']}]"
                     f"{'' if r['holds'] else '  FAILS'}{'' if r['coprime'] else '  (not coprime)'}")
    _emit(args, payload, "\n".join(lines))
    return (OK if payload["ok"] else MISMATCH), payload


# --- identities ---------------------------------------------------------------------

def cmd_identities(args) -> tuple[int, dict]:
    rng = random.Random(args.seed)
    bad = []
    for _ in range(args.count):
        x = rng.getrandbits(rng.randint(1, args.bits)) * rng.choice((-1, 1))
        d = rng.getrandbits(rng.randint(1, args.bits)) * rng.choice((-1, 1))
        if not verify_identities(x, d):
            bad.append((x, d))
    payload = {"count": args.count, "seed": args.seed, "failures": len(bad)}
    _emit(args, payload, f"{args.count} random pairs, seed {args.seed}: {len(bad)} failures")
    return (OK if not bad else MISMATCH), payload


# --- small-n ------------------------------------------------------------------------

def cmd_small_n(args) -> tuple[int, dict]:
    lines, payload = [], {"n": args.n}
    if args.n == 2:
        refs = [refute_n2(c) for c in ("I", "II", "III")]
        for r in refs:
            lines.append(f"case {r.case}: mod {r.modulus}, achievable {sorted(r.achievable)}, "
                         f"required {sorted(r.required)}, {r.witness_count} tuples - {r.statement}")
        q = n2_case_iv_quartic(1, 1)
        hits = quartic_search(args.quartic_bound)
        m = QuarticCubicMap()
        iso = isomorphic_over_q(m.cubic, m.jacobian)
        lines.append(f"case IV: 3000 T^4 + 200 T^2 + 1 = Y^2 (k = {q.k}, l = {q.l}); points with |T| <= "
                     f"{args.quartic_bound}: {hits}; cubic model isomorphic to Jacobian: {iso}; "
                     f"recorded curve {m.recorded_label} rank {m.recorded_rank}")
        ok = all(r.refuted for r in refs) and hits == [(0, 1)] and iso
        payload |= {"refutations": [{"case": r.case, "modulus": r.modulus, "achievable": sorted(r.achievable),
                                     "required": sorted(r.required), "tuples": r.witness_count} for r in refs],
                    "quartic_points": hits, "jacobian_isomorphic": iso}
    elif args.n == 3:
        ok = True
        audits = []
        for case in C_VALUES:
            try:
                rep = n3_audit(case)
            except AssertionError as exc:
                lines.append(f"case {case}: {exc}")
                ok = False
                continue
            lines.append(rep.summary())
            audits.append({"case": case, "rank0": [str(c) for c in rep.rank0], "points": len(rep.points)})
            if args.box_bound:
                for res in cross_check(case, args.box_bound, args.max_exp):
                    status = "ok" if not res.unlisted and not res.listed_in_range_missing else "MISMATCH"
                    ok &= status == "ok"
                    lines.append(f"  box search c = {res.c}: {len(res.found)} points found, "
                                 f"{len(res.listed)} listed in range, {status}")
        payload |= {"audits": audits}
    else:
        ok = True
        grid = []
        for a in range(args.max_a + 1):
            for b in range(args.max_b + 1):
                sols = n5_family(EquationParams(a, b))
                d = 2**a * 5**b
                want = [] if a == 0 else sorted([(d // 2, 3 * d // 2), (-d // 2, -3 * d // 2)])
                ok &= sols == want
                grid.append({"a": a, "b": b, "solutions": sols})
        lines.append(f"n = 5 family checked for 0 <= a <= {args.max_a}, 0 <= b <= {args.max_b}: "
                     f"{'all match +-(d/2, 3d/2)' if ok else 'MISMATCH'}")
        payload |= {"grid": grid}
    payload["ok"] = ok
    _emit(args, payload, "\n".join(lines))
    return (OK if ok else MISMATCH), payload


# --- frey ---------------------------------------------------------------------------

def cmd_frey(args) -> tuple[int, dict]:
    label = parse_label(args.label)
    if args.w is None and args.z1 is None:
        raise UsageError("give --w or --z1 with --n")
    w = args.w if args.w is not None else args.z1 ** (2 * args.n)
    model = build_curve(label, w, args.da, args.db)
    inv = invariants_of(model)
    t = source_t(label.case, w, args.da, args.db)
    if isinstance(t, Fraction) and t.denominator == 1:
        t = int(t)
    payload = {"label": str(label), "ainvs": [str(c) for c in model.ainvs], "c4": inv.c4, "c6": inv.c6,
               "disc": inv.disc, "serre_level": serre_level(label), "t": str(t)}
    lines = [str(model), f"c4 = {inv.c4}", f"c6 = {inv.c6}", f"disc = {inv.disc}",
             f"Serre level {serre_level(label)}"]
    ok = True
    if args.z1 is not None and isinstance(t, int):
        s = args.z1 ** args.n
        tab = tabulated_discriminant_st(label, s, t, args.da, args.db)
        ok = tab == inv.disc
        payload["table_disc"] = tab
        lines.append(f"tabulated discriminant {tab}: {'agrees' if ok else 'DISAGREES'}")
    for ell in args.ell or []:
        red = reduce_mod(model, ell)
        a = trace_of_frobenius(red) if red.reduction_type == "good" else None
        payload.setdefault("reductions", []).append({"ell": ell, "type": red.reduction_type, "a": a})
        lines.append(f"mod {ell}: {red.reduction_type} reduction" + (f", a_{ell} = {a}" if a is not None else ""))
    payload["ok"] = ok
    _emit(args, payload, "\n".join(lines))
    return (OK if ok else MISMATCH), payload


# --- fetch / validate ------------------------------------------------------------------

def cmd_fetch(args) -> tuple[int, dict]:
    client = LmfdbClient(args.base_url, timeout=args.timeout, retries=args.retries)
    status, code = {}, OK
    for level in args.levels:
        try:
            recs = fetch_lmfdb(level, args.bound, client, args.cache_dir, refresh=args.refresh)
            status[level] = f"{len(recs)} forms"
        except DataUnavailable as exc:
            status[level] = str(exc)
            code = UNAVAILABLE
    _emit(args, {"levels": status}, "\n".join(f"level {k}: {v}" for k, v in status.items()))
    return code, {"levels": status}


def _store(args) -> NewformStore:
    client = LmfdbClient(args.base_url) if getattr(args, "fetch", False) else None
    return NewformStore(args.data_dir or (), args.cache_dir, allow_fetch=getattr(args, "fetch", False), client=client)


def cmd_validate(args) -> tuple[int, dict]:
    store = _store(args)
    levels = args.levels or sorted(EXPECTED_SPACES)
    out, code = {}, OK
    lines = []
    for level in levels:
        if level not in EXPECTED_SPACES:
            raise UsageError(f"no expected space data for level {level}")
        try:
            recs, origin = store.load(level, args.bound)
        except DataUnavailable as exc:
            out[level] = {"status": "unavailable", "reason": exc.reason}
            lines.append(f"level {level}: UNAVAILABLE ({exc.reason})")
            code = code if code == MISMATCH else UNAVAILABLE
            continue
        rep = validate_space(recs, EXPECTED_SPACES[level])
        out[level] = {"status": "ok" if rep.ok else "mismatch", "origin": origin,
                      "discrepancies": rep.discrepancies, "reading": rep.reading}
        lines.append(f"{rep}  [{origin}]")
        if not rep.ok:
            code = MISMATCH
    _emit(args, {"levels": out}, "\n".join(lines))
    return code, {"levels": out}


# --- sieve ---------------------------------------------------------------------------

def cmd_sieve(args) -> tuple[int, dict]:
    if args.planted:
        report = planted_run(args.B, jobs=args.jobs)
    else:
        if args.case is None or args.subcase is None:
            raise UsageError("sieve needs CASE and SUBCASE (or --planted)")
        store = _store(args)
        mode = MODE_ALIASES[args.mode]
        base = SieveConfig(args.case, args.subcase, args.B, args.policy, "multi_frey",
                           early_exit=not args.no_early_exit)
        if mode == "auto":
            mode = choose_mode(base, store)
        config = SieveConfig(args.case, args.subcase, args.B, args.policy, mode,
                             early_exit=not args.no_early_exit)
        report = run(config, store, jobs=args.jobs)
    text = report.dumps()
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)
    summary = report.to_json()["summary"]
    lines = [f"mode {report.config['mode']}, levels {report.levels}, B = {report.config['prime_bound']}"]
    for p in report.pairs:
        u = "0 (not eliminated)" if p.U_zero else " * ".join(f"{q}^{e}" for q, e in p.U_factorization.items()) or "1"
        lines.append(f"  f = {p.f}, g = {p.g}: U = {u}; survivors {p.survivors}; minimal B {p.minimal_B}")
    lines.append(f"pairs not eliminated: {summary['not_eliminated']}")
    lines.append(f"surviving primes n >= 7: {summary['surviving_primes']}")
    if args.out:
        lines.append(f"report written to {args.out}")
    if args.json:
        print(text, end="")
    else:
        print("\n".join(lines))
    return OK, {"out": args.out, "report_sha256": hashlib.sha256(text.encode()).hexdigest()}


# --- manifests ------------------------------------------------------------------------

def _digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def _data_digests() -> dict[str, str]:
    from importlib import resources
    root = resources.files("fivepowers.data")
    out = {}
    for entry in sorted(root.iterdir(), key=lambda e: e.name):
        if entry.is_file() and entry.name.endswith(".txt"):
            out[entry.name] = hashlib.sha256(entry.read_bytes()).hexdigest()
    sub = root.joinpath("newforms")
    for entry in sorted(sub.iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".txt"):
            out[f"newforms/{entry.name}"] = hashlib.sha256(entry.read_bytes()).hexdigest()
    return out


def _versions() -> dict[str, str]:
    out = {"fivepowers": __version__, "python": platform.python_version()}
    for pkg in ("numpy", "sympy"):
        try:
            out[pkg] = metadata.version(pkg)
        except metadata.PackageNotFoundError:
            out[pkg] = "missing"
    return out


def write_manifest(args, argv, status: int, result: dict, started: float, wall: float) -> Path | None:
    if args.no_manifest:
        return None
    snapshot = {k: v for k, v in vars(args).items() if k not in ("func", "json", "manifest", "manifest_dir", "no_manifest")}
    outputs = {}
    if result.get("out"):
        outputs[result["out"]] = _digest(result["out"])
    manifest = {
        "schema": "fivepowers.run-manifest/1",
        "command": args.command,
        "argv": list(argv),
        "config": snapshot,
        "input_digests": _data_digests(),
        "versions": _versions(),
        "started": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(started)),
        "wall_seconds": round(wall, 3),
        "exit_status": status,
        "outputs": outputs,
        "result": {k: v for k, v in result.items() if k in ("ok", "report_sha256")},
    }
    if args.manifest:
        path = Path(args.manifest)
    else:
        stamp = time.strftime("%Y%m%dT%H%M%S", time.gmtime(started))
        path = Path(args.manifest_dir or os.environ.get("FIVEPOWERS_RUN_DIR", "runs")) / f"{args.command}-{stamp}-{os.getpid()}.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest, indent=1, sort_keys=True, default=str) + "\n")
    return path


def cmd_rerun(args) -> tuple[int, dict]:
    """Run the argv stored in a manifest again and compare output digests."""
    manifest = json.loads(Path(args.manifest_file).read_text())
    argv = list(manifest["argv"])
    status = main(argv + ["--no-manifest"], _quiet=True)
    same = status == manifest["exit_status"]
    for path, digest in manifest["outputs"].items():
        now = _digest(path) if Path(path).exists() else None
        same &= now == digest
    msg = f"rerun of {manifest['command']}: {'identical outputs' if same else 'OUTPUTS DIFFER'}"
    _emit(args, {"identical": same}, msg)
    return (OK if same else MISMATCH), {"ok": same}


# --- parser ---------------------------------------------------------------------------

CONFIG_HELP = """A --config file is JSON: {"sieve": {"B": 31, "mode": "single-F"}, "small-n": {...}}.
Keys are the long option names of that subcommand (dashes or underscores); flags on
the command line win over the file."""


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--config", help="JSON file with default option values")
    common.add_argument("--manifest", help="path of the run manifest to write")
    common.add_argument("--manifest-dir", help="directory for run manifests (default $FIVEPOWERS_RUN_DIR or ./runs)")
    common.add_argument("--no-manifest", action="store_true", help=argparse.SUPPRESS)

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--data-dir", action="append", help="directory of level_<N>.txt eigenvalue files")
    data.add_argument("--cache-dir", help="fetch cache (default $FIVEPOWERS_CACHE_DIR or ~/.cache/fivepowers)")
    data.add_argument("--base-url", help="LMFDB base URL (default $LMFDB_BASE_URL or the public site)")

    ap = _Parser(prog="fivepowers", description=__doc__.splitlines()[0], epilog=CONFIG_HELP)
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("check", parents=[common], help="verify and decompose a solution")
    p.add_argument("x", type=int)
    p.add_argument("z", type=int)
    p.add_argument("n", type=int)
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--b", type=int, required=True)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("identities", parents=[common], help="random check of the polynomial identities")
    p.add_argument("--count", type=int, default=10_000)
    p.add_argument("--bits", type=int, default=256)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_identities)

    p = sub.add_parser("small-n", parents=[common], help="n = 2, 3, 5 checks")
    p.add_argument("n", type=int, choices=(2, 3, 5))
    p.add_argument("--quartic-bound", type=int, default=10**6)
    p.add_argument("--box-bound", type=int, default=10**6, help="numerator bound of the n = 3 box search (0 skips)")
    p.add_argument("--max-exp", type=int, default=8)
    p.add_argument("--max-a", type=int, default=6)
    p.add_argument("--max-b", type=int, default=6)
    p.set_defaults(func=cmd_small_n)

    p = sub.add_parser("frey", parents=[common], help="inspect one Frey curve")
    p.add_argument("label", help="e.g. E_I_3 or F_{IV,2}")
    p.add_argument("--w", type=int, help="value of z1^(2n)")
    p.add_argument("--z1", type=int)
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--da", type=int, default=0)
    p.add_argument("--db", type=int, default=0)
    p.add_argument("--ell", type=int, action="append", help="also reduce mod this prime (repeatable)")
    p.set_defaults(func=cmd_frey)

    p = sub.add_parser("fetch", parents=[common, data], help="download newforms from LMFDB into the cache")
    p.add_argument("levels", type=int, nargs="+")
    p.add_argument("--bound", type=int, default=59)
    p.add_argument("--refresh", action="store_true")
    p.add_argument("--timeout", type=float, default=20.0)
    p.add_argument("--retries", type=int, default=3)
    p.set_defaults(func=cmd_fetch)

    p = sub.add_parser("validate", parents=[common, data], help="compare newform data with the expected spaces")
    p.add_argument("levels", type=int, nargs="*")
    p.add_argument("--bound", type=int, default=59)
    p.add_argument("--fetch", action="store_true", help="fall back to LMFDB for missing levels")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("sieve", parents=[common, data], help="run the elimination sieve")
    p.add_argument("case", nargs="?", choices=("I", "II", "III", "IV"))
    p.add_argument("subcase", nargs="?", type=int)
    p.add_argument("--B", type=int, default=59, help="largest auxiliary prime")
    p.add_argument("--mode", default="auto", choices=sorted(MODE_ALIASES))
    p.add_argument("--policy", default="squares_only", choices=("squares_only", "all_residues"))
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--no-early-exit", action="store_true", help="use every prime up to B")
    p.add_argument("--planted", action="store_true", help="run the planted-form soundness harness")
    p.add_argument("--fetch", action="store_true", help="fetch missing levels from LMFDB")
    p.add_argument("--out", help="report JSON path")
    p.set_defaults(func=cmd_sieve)

    p = sub.add_parser("rerun", parents=[common], help="repeat a run from its manifest and compare outputs")
    p.add_argument("manifest_file")
    p.set_defaults(func=cmd_rerun)
    return ap


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not args.config:
        return args
    try:
        conf = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {args.config}: {exc}") from None
    section = conf.get(args.command, {})
    defaults = {k.replace("-", "_"): v for k, v in section.items()}
    unknown = [k for k in defaults if not hasattr(args, k)]
    if unknown:
        raise UsageError(f"unknown config keys for {args.command}: {unknown}")
    # re-parse with file values as defaults so explicit flags still win
    sub_action = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    sub_action.choices[args.command].set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv: list[str] | None = None, _quiet: bool = False) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    started, t0 = time.time(), time.perf_counter()
    try:
        args = _apply_config(parser, argv)
    except UsageError as exc:
        print(f"fivepowers: {exc}", file=sys.stderr)
        return USAGE
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE
    stdout = sys.stdout
    if _quiet:
        sys.stdout = open(os.devnull, "w")
    try:
        status, result = args.func(args)
    except UsageError as exc:
        print(f"fivepowers: {exc}", file=sys.stderr)
        return USAGE
    except DataUnavailable as exc:
        print(f"fivepowers: {exc}", file=sys.stderr)
        status, result = UNAVAILABLE, {"error": str(exc)}
    except ValueError as exc:
        print(f"fivepowers: {exc}", file=sys.stderr)
        return USAGE
    except AssertionError as exc:
        print(f"fivepowers: check failed: {exc}", file=sys.stderr)
        status, result = MISMATCH, {"error": str(exc)}
    finally:
        if _quiet:
            sys.stdout.close()
            sys.stdout = stdout
    path = write_manifest(args, argv, status, result, started, time.perf_counter() - t0)
    if path and not args.json and not _quiet:
        print(f"manifest: {path}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
