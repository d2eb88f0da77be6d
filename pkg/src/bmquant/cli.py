"""bmquant command line: validate, quantize, check, example.

Exit codes: 0 pass, 1 a checked assertion failed, 2 input or spec error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import generators
from .errors import BmqError, FinitenessViolation, NonProperRestrictionError, OverlapError, SpecError
from .io import (
    RunCache,
    SpecParseError,
    dumps,
    load_polytope,
    load_spec,
    module_from_json,
    module_to_csv,
    module_to_json,
    module_to_svg,
    parse_rational,
    profile_to_json,
    spec_digest,
    spec_to_json,
)
from .model import validate_spec
from .quantize import check_asymptotics, check_finiteness, qr_check, quantize, stages_check
from .virtmod import asymptotic_profile

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class UsageError(BmqError):
    pass


def parse_window(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition("..")
    try:
        if not sep:
            raise ValueError
        a, b = int(lo), int(hi)
    except ValueError:
        raise UsageError(f"window must look like lo..hi, got {text!r}") from None
    if b < a:
        raise UsageError(f"window {text!r} is reversed (hi < lo)")
    return a, b


def _load_valid(path: str):
    spec = load_spec(path)
    report = validate_spec(spec)
    if not report.ok:
        raise SpecError("invalid spec:\n" + str(report), report)
    return spec


def _quantized(spec, use_cache: bool):
    """Module JSON text and profile, through the cache when enabled."""
    cache = RunCache() if use_cache else None
    key = spec_digest(spec)
    if cache is not None:
        hit = cache.get(key)
        if hit is not None:
            doc = json.loads(hit)
            return module_from_json(doc["module"]), doc
    q = quantize(spec)
    doc = {"module": module_to_json(q), "profile": profile_to_json(asymptotic_profile(q))}
    if cache is not None:
        cache.put(key, dumps(doc))
    return q, doc


def cmd_validate(args) -> int:
    spec = load_spec(args.spec)
    report = validate_spec(spec)
    print(report)
    return EXIT_OK if report.ok else EXIT_INPUT


def cmd_quantize(args) -> int:
    spec = _load_valid(args.spec)
    windows = [parse_window(w) for w in (args.window or ["-10..10"])]
    if len(windows) == 1:
        windows = windows * spec.d
    if len(windows) != spec.d:
        raise UsageError(f"need 1 or {spec.d} --window values, got {len(windows)}")
    q, doc = _quantized(spec, not args.no_cache)
    prefix = args.prefix or Path(args.spec).stem + "_q"
    written = []
    if args.out in ("json", "all"):
        p = Path(f"{prefix}.json")
        p.write_text(dumps(doc["module"]), encoding="utf-8")
        written.append(p)
    if args.out in ("csv", "all"):
        p = Path(f"{prefix}.csv")
        with open(p, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(module_to_csv(q, windows))
        written.append(p)
        if spec.d <= 2:
            p = Path(f"{prefix}.svg")
            p.write_text(module_to_svg(q, windows), encoding="utf-8")
            written.append(p)
    for p in written:
        print(f"wrote {p}")
    return EXIT_OK


def _check_theorem1(spec) -> tuple[bool, str]:
    if spec.m % 2:
        try:
            rep = check_finiteness(spec)
        except FinitenessViolation as exc:
            return False, f"FAIL finiteness: {exc}"
        sums = ", ".join(f"R={R}: {v}" for R, v in rep.window_sums.items())
        status = "PASS" if rep.ok else "FAIL"
        return rep.ok, f"{status} finiteness (m={spec.m} odd): dim {rep.dim}; window sums {sums}"
    rep = check_asymptotics(spec)
    p = rep.profile
    xi = list(p.xi) if p.xi is not None else None
    msg = f"xi={xi} c+={p.c_plus} c-={p.c_minus} lambda0={p.lambda0}"
    if p.multi_direction:
        msg += " (multi_direction: outside the single-xi statement)"
    status = "PASS" if rep.ok else "FAIL"
    lines = [f"{status} asymptotics (m={spec.m} even): {msg}"] + [f"  {f}" for f in rep.failures[:10]]
    return rep.ok, "\n".join(lines)


def cmd_check(args) -> int:
    spec = _load_valid(args.spec)
    if args.theorem == "theorem1":
        ok, msg = _check_theorem1(spec)
    elif args.theorem == "stages":
        if not args.proj:
            raise UsageError("stages needs --proj '[[...], ...]'")
        try:
            proj = json.loads(args.proj)
        except json.JSONDecodeError as exc:
            raise UsageError(f"--proj is not a JSON matrix: {exc.msg}") from None
        try:
            rep = stages_check(spec, proj)
        except NonProperRestrictionError as exc:
            print(f"FAIL stages: {exc} [non-proper restriction <=> T' leading modular weight zero]")
            return EXIT_FAIL
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        ok = rep.equal
        msg = f"{'PASS' if ok else 'FAIL'} stages: {rep.checked} weights checked, {len(rep.mismatches)} mismatches"
    else:
        if not args.npolytope:
            raise UsageError("qr needs --npolytope FILE")
        poly = load_polytope(args.npolytope)
        rep = qr_check(spec, poly)
        ok = rep.ok
        msg = f"{'PASS' if ok else 'FAIL'} [Q,R]=0: lhs={rep.lhs} rhs={rep.rhs}"
        if rep.mixed_signs:
            msg += " (quotient has components of both orientations)"
    print(msg)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_example(args) -> int:
    name = args.name
    if name == "s2":
        coeffs = [parse_rational(c) for c in args.coeffs.split(",")] if args.coeffs else None
        spec = generators.s2(args.m, coeffs)
    elif name == "s2xs2":
        spec = generators.s2xs2(args.m)
    elif name == "chain":
        spec = generators.chain(args.pieces, args.m)
    else:
        raise UsageError(f"unknown example {name!r}; choose from {sorted(generators.EXAMPLES)}")
    text = dumps(spec_to_json(spec))
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bmquant", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate a spec file")
    p.add_argument("spec")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("quantize", help="compute Q(M) and write JSON/CSV/SVG")
    p.add_argument("spec")
    p.add_argument("--window", action="append", help="lo..hi, once for all axes or once per axis (use --window=-5..5)")
    p.add_argument("--out", choices=["csv", "json", "all"], default="all")
    p.add_argument("--prefix", help="output path prefix (default: <spec stem>_q in the working directory)")
    p.add_argument("--no-cache", action="store_true")
    p.set_defaults(func=cmd_quantize)

    p = sub.add_parser("check", help="run a theorem check")
    p.add_argument("spec")
    p.add_argument("theorem", choices=["theorem1", "stages", "qr"])
    p.add_argument("--proj", help="JSON integer matrix for stages")
    p.add_argument("--npolytope", help="polytope JSON file for qr")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("example", help="write a built-in example spec")
    p.add_argument("name")
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--coeffs", help="comma-separated modular ratios for s2")
    p.add_argument("--pieces", type=int, default=3)
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_example)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SpecParseError, SpecError, OverlapError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, BmqError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
