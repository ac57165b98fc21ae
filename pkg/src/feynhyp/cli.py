"""Command-line front end.

Verbs:

* ``eval``   — evaluate a hypergeometric function or loop integral at a point
* ``verify`` — check one identity at an explicit point
* ``sweep``  — check an identity over seeded sample points, emit a report
* ``pin``    — solve an identity for its unknown scalar argument
* ``list``   — print the registry

Parameters are ``key=value`` decimal literals (no expression parsing, so a
command line fully determines the computation).  Reports are deterministic:
identical flags give byte-identical JSON report arrays.
"""

from __future__ import annotations

import argparse
import json
import re
import shlex
import sys
from typing import Dict, List, Optional, Sequence, Tuple

from . import __version__
from . import feynman as fy
from . import hyperfun as hf
from . import identities as idn
from .errors import (
    DomainError,
    NoBracket,
    NonConvergence,
    PoleError,
    QuadFailure,
    UnknownIdentity,
)
from .numkernel import NumValue, PrecisionContext, format_mpfr, to_mpfr

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_DOMAIN = 2
EXIT_USAGE = 3

_DECIMAL_RE = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


class _UsageError(Exception):
    pass


def _parse_kv(pairs: Sequence[str], allow: Optional[Dict[str, bool]] = None
              ) -> Dict[str, str]:
    out: Dict[str, str] = {}
    for item in pairs:
        if "=" not in item:
            raise _UsageError(f"expected key=value, got {item!r}")
        key, val = item.split("=", 1)
        key = key.strip()
        if allow is not None and key not in allow:
            raise _UsageError(f"unknown parameter {key!r}")
        if key != "method" and not _DECIMAL_RE.match(val):
            raise _UsageError(f"{key}={val!r} is not a decimal literal")
        out[key] = val
    return out


def _ctx_from(args) -> PrecisionContext:
    digits = args.digits
    if not 10 <= digits <= 1000:
        raise _UsageError("--digits must lie in [10, 1000]")
    return PrecisionContext.for_digits(digits)


# ---------------------------------------------------------------- eval

_EVAL_SCHEMAS: Dict[str, Tuple[Tuple[str, ...], Tuple[str, ...]]] = {
    # name: (required params, allowed methods; first is the default)
    "2f1": (("a", "b", "c", "z"), ()),
    "3f2": (("a1", "a2", "a3", "b1", "b2", "z"), ()),
    "f1": (("a", "b", "bp", "c", "w", "z"), ()),
    "f4": (("a", "b", "c1", "c2", "x", "y"), ()),
    "kdf": (("alpha", "nu1", "nu2", "x", "y"), ()),
    "i2": (("nu1", "nu2", "d", "m1sq", "m2sq", "s12"), fy.I2_METHODS),
    "i3": (("msq", "s12", "s13", "d"), fy.I3_METHODS),
    "imj3": (("x", "msq", "d"), fy.IMJ3_METHODS),
}


def _eval_value(fn: str, params: Dict[str, str], method: Optional[str],
                ctx: PrecisionContext) -> NumValue:
    from .numkernel import working_precision
    with working_precision(ctx):
        return _eval_value_inner(fn, params, method, ctx)


def _eval_value_inner(fn: str, params: Dict[str, str], method: Optional[str],
                      ctx: PrecisionContext) -> NumValue:
    p = {k: to_mpfr(v) for k, v in params.items()}
    if fn == "2f1":
        return hf.hyp2f1(hf.Gauss2F1Params(p["a"], p["b"], p["c"]), p["z"], ctx)
    if fn == "3f2":
        return hf.hyp3f2(
            hf.Hyp3F2Params(p["a1"], p["a2"], p["a3"], p["b1"], p["b2"]),
            p["z"], ctx,
        )
    if fn == "f1":
        return hf.appell_f1(
            hf.AppellF1Params(p["a"], p["b"], p["bp"], p["c"]), p["w"], p["z"], ctx
        )
    if fn == "f4":
        return hf.appell_f4(
            hf.AppellF4Params(p["a"], p["b"], p["c1"], p["c2"]), p["x"], p["y"], ctx
        )
    if fn == "kdf":
        return hf.kdf_f210(
            hf.KdFParams(p["alpha"], p["nu1"], p["nu2"]), p["x"], p["y"], ctx
        )
    if fn == "i2":
        k = fy.BubbleKinematics(
            nu1=float(params["nu1"]), nu2=float(params["nu2"]),
            d=float(params["d"]), m1sq=float(params["m1sq"]),
            m2sq=float(params["m2sq"]), s12=float(params["s12"]),
        )
        return fy.i2(k, method or fy.F1_FORM, ctx)
    if fn == "i3":
        k = fy.VertexKinematics(
            msq=float(params["msq"]), s12=float(params["s12"]),
            s13=float(params["s13"]), d=float(params["d"]),
        )
        return fy.i3(k, method or fy.F1_FORMULA, ctx)
    if fn == "imj3":
        k = fy.SunriseKinematics(
            x=float(params["x"]), msq=float(params["msq"]), d=float(params["d"]),
        )
        return fy.im_j3(k, method or fy.SERIES_2F1, ctx)
    raise _UsageError(f"unknown function {fn!r}")


def _cmd_eval(args) -> int:
    if args.function not in _EVAL_SCHEMAS:
        print(f"error: unknown function {args.function!r}; "
              f"choose from {', '.join(sorted(_EVAL_SCHEMAS))}", file=sys.stderr)
        return EXIT_USAGE
    required, methods = _EVAL_SCHEMAS[args.function]
    try:
        kv = _parse_kv(args.params, {k: True for k in (*required, "method")})
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    method = kv.pop("method", None)
    if method is not None and method not in methods:
        print(f"error: method {method!r} not valid for {args.function}",
              file=sys.stderr)
        return EXIT_USAGE
    missing = [k for k in required if k not in kv]
    if missing:
        print(f"error: missing parameters: {', '.join(missing)}", file=sys.stderr)
        return EXIT_USAGE
    ctx = _ctx_from(args)
    try:
        val = _eval_value(args.function, kv, method, ctx)
    except (DomainError, PoleError, NonConvergence, QuadFailure) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    payload = {
        "function": args.function,
        "value": format_mpfr(val.value, args.digits),
        "abs_err": format_mpfr(val.abs_err, 3),
        "route": val.route,
    }
    if args.format == "json":
        _emit(json.dumps(payload, indent=2), args.out)
    else:
        _emit(f"{payload['value']}  (abs err <= {payload['abs_err']}, "
              f"route {val.route})", args.out)
    return EXIT_OK


# ---------------------------------------------------------------- verify

def _report_file(reports: List[idn.VerificationReport], args) -> dict:
    counts = {"pass": 0, "fail": 0, "skip": 0}
    for r in reports:
        counts[r.status.lower()] += 1
    return {
        "tool_version": __version__,
        "command_line": shlex.join(args.raw_argv),
        "reports": [r.to_dict(args.digits) for r in reports],
        "summary": counts,
    }


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _render_reports(reports: List[idn.VerificationReport], args) -> None:
    doc = _report_file(reports, args)
    if args.format == "json":
        _emit(json.dumps(doc, indent=2), args.out)
        return
    lines = []
    for r in reports:
        pt = " ".join(f"{k}={v:.6g}" for k, v in sorted(r.point.items()))
        extra = f"  [{r.note}]" if r.note else ""
        lines.append(f"{r.status:4s} {r.id}  matched={r.matched_digits:3d}  {pt}{extra}")
    s = doc["summary"]
    lines.append(f"summary: pass={s['pass']} fail={s['fail']} skip={s['skip']}")
    _emit("\n".join(lines), args.out)


def _cmd_verify(args) -> int:
    try:
        rec = idn.get_identity(args.identity)
        kv = _parse_kv(args.params, {k: True for k in rec.param_names})
        missing = [k for k in rec.param_names if k not in kv]
        if missing:
            raise _UsageError(f"missing parameters: {', '.join(missing)}")
    except (UnknownIdentity, _UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    ctx = _ctx_from(args)
    point = {k: float(v) for k, v in kv.items()}
    report = idn.verify(args.identity, point, ctx, seed=args.seed)
    _render_reports([report], args)
    return {"PASS": EXIT_OK, "FAIL": EXIT_FAIL, "SKIP": EXIT_DOMAIN}[report.status]


def _cmd_sweep(args) -> int:
    if args.n < 1:
        print("error: --n must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        idn.get_identity(args.identity)
    except UnknownIdentity as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    ctx = _ctx_from(args)
    reports = idn.sweep(args.identity, args.n, args.seed, ctx)
    _render_reports(reports, args)
    statuses = {r.status for r in reports}
    if "FAIL" in statuses:
        return EXIT_FAIL
    if statuses == {"PASS"}:
        return EXIT_OK
    return EXIT_DOMAIN


def _cmd_pin(args) -> int:
    try:
        rec = idn.get_identity(args.identity)
    except UnknownIdentity as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if rec.pin is None:
        print(f"error: {args.identity} has no pinnable unknown", file=sys.stderr)
        return EXIT_USAGE
    ctx = _ctx_from(args)
    rng_points = []
    import random as _random
    rng = _random.Random(f"{args.identity}|{args.seed}")
    for _ in range(args.n):
        rng_points.append(rec.sampler(rng))
    try:
        pinned = idn.pin_argument(args.identity, rng_points, ctx)
    except NoBracket as exc:
        print(f"error: NoBracket: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    rows = []
    worst = None
    from .numkernel import working_precision
    with working_precision(ctx):
        for pt, u in pinned:
            cand = rec.pin.candidate(pt)
            dev = abs(u - cand)
            worst = dev if worst is None or dev > worst else worst
            rows.append({
                "point": {k: pt[k] for k in sorted(pt)},
                "pinned": format_mpfr(u, args.digits),
                "candidate": format_mpfr(cand, args.digits),
                "abs_deviation": format_mpfr(dev, 3),
            })
    doc = {
        "identity": args.identity,
        "unknown": rec.pin.unknown,
        "pins": rows,
        "max_abs_deviation": format_mpfr(worst, 3),
    }
    if rec.pin.rational_in is not None:
        # consistency of the pinned values with one fixed-degree rational
        # function of the named parameter; top up the sample if the fit
        # needs more points than were requested
        dn, dd = rec.pin.rational_degrees
        need = dn + dd + 2
        pts_all = list(rng_points)
        while len(pts_all) < need:
            pts_all.append(rec.sampler(rng))
        extra = idn.pin_argument(args.identity, pts_all[len(pinned):], ctx)
        key = rec.pin.rational_in
        xs = [pt[key] for pt, _ in (*pinned, *extra)]
        zs = [u for _, u in (*pinned, *extra)]
        from .numkernel import PrecisionContext as _PC
        _, _, resid = idn.rational_fit(xs, zs, dn, dd, ctx)
        with working_precision(_PC.for_digits(2 * ctx.target_digits)):
            consistent = bool(resid <= to_mpfr(10) ** (-(ctx.target_digits - 10)))
        doc["rational_consistency"] = {
            "parameter": key,
            "degrees": [dn, dd],
            "max_rel_residual": format_mpfr(resid, 3),
            "consistent": consistent,
        }
    if args.format == "json":
        _emit(json.dumps(doc, indent=2), args.out)
    else:
        lines = [f"pin {args.identity} ({rec.pin.unknown})"]
        for row in rows:
            pt = " ".join(f"{k}={v:.6g}" for k, v in row["point"].items())
            lines.append(f"  {pt}  pinned={row['pinned']}  "
                         f"dev={row['abs_deviation']}")
        lines.append(f"max deviation from candidate: {doc['max_abs_deviation']}")
        rc = doc.get("rational_consistency")
        if rc:
            verdict = "consistent" if rc["consistent"] else "INCONSISTENT"
            lines.append(
                f"rational({rc['degrees'][0]},{rc['degrees'][1]}) in "
                f"{rc['parameter']}: {verdict} "
                f"(max rel residual {rc['max_rel_residual']})"
            )
        _emit("\n".join(lines), args.out)
    return EXIT_OK


def _cmd_list(args) -> int:
    lines = []
    for rec in idn.registry():
        pin = f" [pinnable: {rec.pin.unknown}]" if rec.pin else ""
        lines.append(f"{rec.id}  params({', '.join(rec.param_names)}){pin}")
        lines.append(f"    {rec.description}")
        lines.append(f"    source: {rec.citation}")
    _emit("\n".join(lines), args.out)
    return EXIT_OK


# ---------------------------------------------------------------- parser

def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--digits", type=int, default=50,
                    help="target decimal digits (10..1000, default 50)")
    sp.add_argument("--seed", type=int, default=1, help="sampler seed")
    sp.add_argument("--out", type=str, default=None, help="write output to file")
    sp.add_argument("--format", choices=("json", "text"), default="text")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="feynhyp",
        description="evaluate loop integrals / hypergeometric functions and "
                    "verify the relations between them",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate a function at a point")
    p.add_argument("function", help=f"one of {', '.join(sorted(_EVAL_SCHEMAS))}")
    p.add_argument("params", nargs="*", help="key=value decimal literals")
    _add_common(p)
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("verify", help="verify an identity at a point")
    p.add_argument("identity")
    p.add_argument("params", nargs="*", help="key=value decimal literals")
    _add_common(p)
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("sweep", help="verify an identity over sampled points")
    p.add_argument("identity")
    p.add_argument("--n", type=int, default=10, help="number of points")
    _add_common(p)
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("pin", help="solve for an identity's unknown argument")
    p.add_argument("identity")
    p.add_argument("--n", type=int, default=5, help="number of points")
    _add_common(p)
    p.set_defaults(fn=_cmd_pin)

    p = sub.add_parser("list", help="print the identity registry")
    _add_common(p)
    p.set_defaults(fn=_cmd_list)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    args.raw_argv = ["feynhyp", *argv]
    try:
        return args.fn(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
