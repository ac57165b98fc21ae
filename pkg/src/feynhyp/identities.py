"""Registry of verified relations, with sweep/verify/pin utilities.

Each :class:`IdentityRecord` packages one relation as independent left and
right evaluators over a named-parameter point, a validity-domain predicate,
and a deterministic point sampler.  The two sides never share the evaluator
of the function being related (the F1 side of a reduction never calls the
3F2 evaluator, and vice versa), so agreement is a genuine cross-check.

``verify`` produces a :class:`VerificationReport`; ``sweep`` repeats it over
seeded sample points (bit-reproducible); ``pin_argument`` numerically solves
an identity for a single unknown scalar argument, which is how hidden
closed-form arguments are confirmed.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import gmpy2
from gmpy2 import mpfr

from . import feynman as fy
from . import hyperfun as hf
from .errors import (
    DomainError,
    NoBracket,
    NonConvergence,
    PoleError,
    QuadFailure,
    UnknownIdentity,
)
from .numkernel import (
    NumValue,
    PrecisionContext,
    Scalar,
    format_mpfr,
    kallen,
    to_mpfr,
    working_precision,
)

Point = Dict[str, float]
Evaluator = Callable[[Point, PrecisionContext], NumValue]

PASS_MARGIN = 5  # digits below target still accepted

#: practical precision cap for 2-d quadrature inside cross-method sweeps
VERTEX_QUAD_MAX_TARGET = 24


# --------------------------------------------------------------------------
# reports
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class VerificationReport:
    id: str
    point: Point
    lhs_value: Optional[NumValue]
    rhs_value: Optional[NumValue]
    matched_digits: int
    status: str  # PASS | FAIL | SKIP
    seed: int
    ctx_digits: int
    note: str = ""

    def to_dict(self, digits: Optional[int] = None) -> dict:
        digits = digits or self.ctx_digits

        def nv(v: Optional[NumValue]):
            if v is None:
                return None
            return {
                "value": format_mpfr(v.value, digits),
                "abs_err": format_mpfr(v.abs_err, 3),
            }

        return {
            "id": self.id,
            "point": {k: self.point[k] for k in sorted(self.point)},
            "lhs_value": nv(self.lhs_value),
            "rhs_value": nv(self.rhs_value),
            "matched_digits": self.matched_digits,
            "status": self.status,
            "seed": self.seed,
            "ctx_digits": self.ctx_digits,
            "note": self.note,
        }


def matched_digits(lhs: NumValue, rhs: NumValue, ctx: PrecisionContext) -> int:
    """floor(-log10(|l-r| / max(|l|, |r|, 10^-working))), clamped to
    [0, working_digits]; the floor keeps near-zero values from passing
    spuriously."""
    with working_precision(ctx):
        scale = max(abs(lhs.value), abs(rhs.value), ctx.tiny())
        diff = abs(lhs.value - rhs.value)
        if diff == 0:
            return ctx.working_digits
        m = math.floor(-gmpy2.log10(diff / scale))
        return max(0, min(ctx.working_digits, int(m)))


# --------------------------------------------------------------------------
# records
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PinSpec:
    """A single unknown scalar argument on the identity's right side.

    ``rational_in`` names a point parameter when the unknown is expected to
    be a fixed-degree rational function of it (enables the consistency
    verdict on pinned sequences).
    """

    unknown: str
    rhs_of: Callable[[Point, mpfr, PrecisionContext], NumValue]
    candidate: Callable[[Point], mpfr]
    lo: float
    hi: float
    rational_in: Optional[str] = None
    rational_degrees: Tuple[int, int] = (6, 6)


@dataclass(frozen=True)
class IdentityRecord:
    id: str
    description: str
    citation: str
    param_names: Tuple[str, ...]
    lhs: Evaluator
    rhs: Evaluator
    domain: Callable[[Point], bool]
    sampler: Callable[[random.Random], Point]
    paired: Optional[Callable[[Point, PrecisionContext], Tuple[NumValue, NumValue]]] = None
    pin: Optional[PinSpec] = None

    def evaluate(self, point: Point, ctx: PrecisionContext) -> Tuple[NumValue, NumValue]:
        if self.paired is not None:
            return self.paired(point, ctx)
        return self.lhs(point, ctx), self.rhs(point, ctx)


def _P(point: Point, *names: str):
    vals = tuple(to_mpfr(point[n]) for n in names)
    return vals if len(vals) > 1 else vals[0]


def _uniform(rng: random.Random, lo: float, hi: float) -> float:
    return rng.uniform(lo, hi)


def _rejection(rng: random.Random, draw, ok, attempts: int = 5000) -> Point:
    for _ in range(attempts):
        pt = draw(rng)
        if ok(pt):
            return pt
    raise RuntimeError("sampler failed to find an admissible point")


def _pole_margin(v: float, margin: float = 0.07) -> bool:
    n = round(v)
    return not (n <= 0 and abs(v - n) < margin)


# ---------------------------------------------------------------- helpers

def _bubble_from(pt: Point) -> fy.BubbleKinematics:
    return fy.BubbleKinematics(
        nu1=pt["nu1"], nu2=pt["nu2"], d=pt["d"],
        m1sq=pt["m1sq"], m2sq=pt["m2sq"], s12=pt["s12"],
    )


def _vertex_from(pt: Point) -> fy.VertexKinematics:
    return fy.VertexKinematics(msq=pt["msq"], s12=pt["s12"], s13=pt["s13"], d=pt["d"])


def _sunrise_from(pt: Point) -> fy.SunriseKinematics:
    return fy.SunriseKinematics(x=pt["x"], msq=pt["msq"], d=pt["d"])


def _xpm_of(x: mpfr, y: mpfr) -> Tuple[mpfr, mpfr]:
    lam = kallen(1, x, y)
    if lam < 0:
        raise DomainError("complex factorization roots")
    r = gmpy2.sqrt(lam)
    return (1 + x - y - r) / 2, (1 + x - y + r) / 2


# ---------------------------------------------------------------- lhs/rhs

def _swap_lhs(pt: Point, ctx) -> NumValue:
    return fy.i2(_bubble_from(pt), fy.F1_FORM, ctx)


def _swap_rhs(pt: Point, ctx) -> NumValue:
    return fy.i2(_bubble_from(pt).swapped(), fy.F1_FORM, ctx)


def _swap_domain(pt: Point) -> bool:
    try:
        k = _bubble_from(pt)
        k.swapped()
    except (DomainError, PoleError):
        return False
    lam = (1 - k.x - k.y) ** 2 - 4 * k.x * k.y
    return pt["m1sq"] > 0 and pt["s12"] < -0.01 and lam > 1e-3


def _swap_sample(rng: random.Random) -> Point:
    def draw(r):
        return {
            "nu1": _uniform(r, 0.6, 1.6), "nu2": _uniform(r, 0.6, 1.6),
            "d": _uniform(r, 2.4, 5.6),
            "m1sq": _uniform(r, 0.4, 1.8), "m2sq": _uniform(r, 0.4, 1.8),
            "s12": _uniform(r, -2.5, -0.05),
        }
    return _rejection(rng, draw, _swap_domain)


def _f1f4_lhs(pt: Point, ctx) -> NumValue:
    nu1, nu2, d, x, y = _P(pt, "nu1", "nu2", "d", "x", "y")
    B = nu1 + nu2 - d / 2
    xm, xp = _xpm_of(x, y)
    return hf.appell_f1(hf.AppellF1Params(a=nu1, b=B, bp=B, c=nu1 + nu2), xm, xp, ctx)


def _f1f4_rhs(pt: Point, ctx) -> NumValue:
    from .numkernel import gamma
    nu1, nu2, d, x, y = _P(pt, "nu1", "nu2", "d", "x", "y")
    B = nu1 + nu2 - d / 2
    g = lambda v: gamma(v, ctx)
    t1 = (
        g(d / 2 - nu1) * g(nu1 + nu2) / (g(d / 2) * g(nu2))
        * hf.appell_f4(hf.AppellF4Params(a=nu1, b=B, c1=d / 2, c2=nu1 - d / 2 + 1),
                       x, y, ctx)
    )
    t2 = (
        NumValue.exact(y).pow_scalar(d / 2 - nu1)
        * g(nu1 - d / 2) * g(nu1 + nu2) / (g(nu1) * g(B))
        * hf.appell_f4(hf.AppellF4Params(a=nu2, b=d / 2, c1=d / 2, c2=d / 2 - nu1 + 1),
                       x, y, ctx)
    )
    return t1 + t2


def _f1f4_domain(pt: Point) -> bool:
    x, y, nu1, nu2, d = pt["x"], pt["y"], pt["nu1"], pt["nu2"], pt["d"]
    lam = (1 - x - y) ** 2 - 4 * x * y
    return (
        y > 0.02 and abs(x) > 0.01
        and math.sqrt(abs(x)) + math.sqrt(abs(y)) <= 0.93
        and lam > 0.02
        and _pole_margin(d / 2 - nu1) and _pole_margin(nu1 - d / 2)
        and _pole_margin(nu1 + nu2 - d / 2)
        and _pole_margin(nu1 - d / 2 + 1) and _pole_margin(d / 2 - nu1 + 1)
    )


def _f1f4_sample(rng: random.Random) -> Point:
    def draw(r):
        return {
            "nu1": _uniform(r, 0.4, 1.3), "nu2": _uniform(r, 0.4, 1.3),
            "d": _uniform(r, 2.4, 5.4),
            "x": _uniform(r, -0.45, 0.3), "y": _uniform(r, 0.03, 0.3),
        }
    return _rejection(rng, draw, _f1f4_domain)


def _bailey_lhs(pt: Point, ctx) -> NumValue:
    a, b, g_, x, y = _P(pt, "alpha", "beta", "gamma", "x", "y")
    X = -x / ((1 - x) * (1 - y))
    Y = -y / ((1 - x) * (1 - y))
    return hf.appell_f4(hf.AppellF4Params(a=a, b=b, c1=g_, c2=b), X, Y, ctx)


def _bailey_rhs(pt: Point, ctx) -> NumValue:
    a, b, g_, x, y = _P(pt, "alpha", "beta", "gamma", "x", "y")
    pref = NumValue.exact((1 - x) * (1 - y)).pow_scalar(a)
    return pref * hf.appell_f1(
        hf.AppellF1Params(a=a, b=g_ - b, bp=1 + a - g_, c=g_), x, x * y, ctx
    )


def _bailey_domain(pt: Point) -> bool:
    x, y = pt["x"], pt["y"]
    if not (0.01 < x < 0.4 and 0.01 < y < 0.4):
        return False
    X = x / ((1 - x) * (1 - y))
    Y = y / ((1 - x) * (1 - y))
    return math.sqrt(X) + math.sqrt(Y) <= 0.93 and pt["gamma"] > 0.25


def _bailey_sample(rng: random.Random) -> Point:
    def draw(r):
        return {
            "alpha": _uniform(r, 0.3, 1.8), "beta": _uniform(r, 0.3, 1.8),
            "gamma": _uniform(r, 0.3, 1.8),
            "x": _uniform(r, 0.02, 0.16), "y": _uniform(r, 0.02, 0.22),
        }
    return _rejection(rng, draw, _bailey_domain)


def _f4tof1_lhs(pt: Point, ctx) -> NumValue:
    a, b, bp, x, y = _P(pt, "alpha", "beta", "betap", "x", "y")
    return hf.appell_f4(hf.AppellF4Params(a=a, b=b, c1=bp, c2=a - bp + 1), x, y, ctx)


def _f4tof1_rhs(pt: Point, ctx) -> NumValue:
    from .numkernel import gamma
    a, b, bp, x, y = _P(pt, "alpha", "beta", "betap", "x", "y")
    xm, xp = _xpm_of(x, y)
    g = lambda v: gamma(v, ctx)
    t1 = (
        g(bp) * g(b - a + bp) / (g(bp - a) * g(b + bp))
        * hf.appell_f1(hf.AppellF1Params(a=a, b=b, bp=b, c=b + bp), xm, xp, ctx)
    )
    t2 = (
        g(bp) * g(b - a + bp) * g(a - bp) / (g(a) * g(b) * g(bp - a))
        * NumValue.exact(y).pow_scalar(bp - a)
        * NumValue.exact(xp - x).pow_scalar(a - b - bp)
        * hf.appell_f1(
            hf.AppellF1Params(a=b - a + bp, b=1 - a, bp=b, c=bp - a + 1),
            (x - xm) / x, (x - xm) / (x - xp), ctx,
        )
    )
    return t1 - t2


def _f4tof1_domain(pt: Point) -> bool:
    a, b, bp, x, y = pt["alpha"], pt["beta"], pt["betap"], pt["x"], pt["y"]
    lam = (1 - x - y) ** 2 - 4 * x * y
    return (
        0.01 < x < 0.3 and 0.01 < y < 0.3
        and math.sqrt(x) + math.sqrt(y) <= 0.93
        and lam > 0.02
        and abs(a - bp - round(a - bp)) > 0.07
        and b + bp - a > 0.1
        and _pole_margin(b - a + bp) and _pole_margin(bp - a + 1)
    )


def _f4tof1_sample(rng: random.Random) -> Point:
    def draw(r):
        return {
            "alpha": _uniform(r, 0.35, 1.6), "beta": _uniform(r, 0.35, 1.6),
            "betap": _uniform(r, 0.35, 1.6),
            "x": _uniform(r, 0.02, 0.18), "y": _uniform(r, 0.02, 0.18),
        }
    return _rejection(rng, draw, _f4tof1_domain)


def _kdf_lhs(pt: Point, ctx) -> NumValue:
    al, n1, n2, x, y = _P(pt, "alpha", "nu1", "nu2", "x", "y")
    return hf.kdf_f210(hf.KdFParams(alpha=al, nu1=n1, nu2=n2), x, y, ctx)


def _kdf_rhs(pt: Point, ctx) -> NumValue:
    al, n1, n2, x, y = _P(pt, "alpha", "nu1", "nu2", "x", "y")
    disc = (x + y) ** 2 - 4 * x
    if disc < 0:
        raise DomainError("complex reduction arguments")
    r = gmpy2.sqrt(disc)
    zm, zp = (x + y - r) / 2, (x + y + r) / 2
    return hf.appell_f1(hf.AppellF1Params(a=n1, b=al, bp=al, c=n1 + n2), zm, zp, ctx)


def _kdf_domain(pt: Point) -> bool:
    x, y = pt["x"], pt["y"]
    disc = (x + y) ** 2 - 4 * x
    if not (0 < x <= 0.5 and 0 < y <= 0.85 and disc > 0.02):
        return False
    zp = (x + y + math.sqrt(disc)) / 2
    return zp <= 0.92


def _kdf_sample(rng: random.Random) -> Point:
    def draw(r):
        return {
            "alpha": _uniform(r, 0.4, 2.0),
            "nu1": _uniform(r, 0.4, 1.8), "nu2": _uniform(r, 0.4, 1.8),
            "x": _uniform(r, 0.02, 0.4), "y": _uniform(r, 0.5, 0.8),
        }
    return _rejection(rng, draw, _kdf_domain)


def _f13f2_lhs(pt: Point, ctx) -> NumValue:
    a, b, g_, x = _P(pt, "alpha", "beta", "gamma", "x")
    return hf.appell_f1(hf.AppellF1Params(a=a, b=b, bp=b, c=g_), x, x / (x - 1), ctx)


def _f13f2_rhs_of(pt: Point, arg: mpfr, ctx) -> NumValue:
    a, b, g_ = _P(pt, "alpha", "beta", "gamma")
    return hf.hyp3f2(
        hf.Hyp3F2Params(a1=a, a2=g_ - a, a3=b, b1=g_ / 2, b2=(g_ + 1) / 2), arg, ctx
    )


def _f13f2_rhs(pt: Point, ctx) -> NumValue:
    x = _P(pt, "x")
    return _f13f2_rhs_of(pt, x * x / (4 * (x - 1)), ctx)


def _f13f2_domain(pt: Point) -> bool:
    x = pt["x"]
    return -0.9 < x < 0.45 and abs(x) > 0.02 and pt["gamma"] > 0.25


def _f13f2_sample(rng: random.Random) -> Point:
    def draw(r):
        return {
            "alpha": _uniform(r, 0.25, 1.4), "beta": _uniform(r, 0.3, 2.4),
            "gamma": _uniform(r, 0.6, 2.8), "x": _uniform(r, -0.9, 0.45),
        }
    return _rejection(rng, draw, _f13f2_domain)


def _f1anti_lhs(pt: Point, ctx) -> NumValue:
    a, b, g_, x = _P(pt, "alpha", "beta", "gamma", "x")
    return hf.appell_f1(hf.AppellF1Params(a=a, b=b, bp=b, c=g_), x, -x, ctx)


def _f1anti_rhs(pt: Point, ctx) -> NumValue:
    a, b, g_, x = _P(pt, "alpha", "beta", "gamma", "x")
    return hf.hyp3f2(
        hf.Hyp3F2Params(a1=a / 2, a2=(a + 1) / 2, a3=b, b1=g_ / 2, b2=(g_ + 1) / 2),
        x * x, ctx,
    )


def _f1anti_domain(pt: Point) -> bool:
    return 0.05 < abs(pt["x"]) < 0.9 and pt["gamma"] > 0.25


def _f1anti_sample(rng: random.Random) -> Point:
    def draw(r):
        return {
            "alpha": _uniform(r, 0.3, 1.6), "beta": _uniform(r, 0.3, 1.8),
            "gamma": _uniform(r, 0.6, 2.6), "x": _uniform(r, -0.9, 0.9),
        }
    return _rejection(rng, draw, _f1anti_domain)


def _quad_zeta(w: mpfr, z: mpfr) -> mpfr:
    return w * w / ((w - z) * (w - 1))


def _quadtr_lhs(pt: Point, ctx) -> NumValue:
    d, w, z = _P(pt, "d", "omega", "z")
    return hf.appell_f1(hf.AppellF1Params(a=1, b=1, bp=2 - d / 2, c=d / 2), w, z, ctx)


def _quadtr_rhs_of(pt: Point, arg: mpfr, ctx) -> NumValue:
    d, w, z = _P(pt, "d", "omega", "z")
    c1 = w / (2 * (w - z) * (1 - w))
    c2 = (w + z * w - 2 * z) / (2 * (w - z) * (1 - w) * (1 - z))
    t1 = hf.hyp2f1(hf.Gauss2F1Params(a=1, b=(d - 2) / 2, c=d / 2), arg, ctx) * c1
    t2 = hf.appell_f1(
        hf.AppellF1Params(a=(d - 2) / 2, b=1, bp=mpfr(1) / 2, c=d / 2),
        _quad_zeta(w, z), -4 * z / (z - 1) ** 2, ctx,
    ) * c2
    return t1 + t2


def _quadtr_rhs(pt: Point, ctx) -> NumValue:
    w, z = _P(pt, "omega", "z")
    return _quadtr_rhs_of(pt, _quad_zeta(w, z), ctx)


def _quadtr_domain(pt: Point) -> bool:
    d, w, z = pt["d"], pt["omega"], pt["z"]
    if not (2.3 <= d <= 5.7 and -0.8 <= w < -0.04 and -0.8 <= z < -0.04):
        return False
    if abs(w - z) < 0.05:
        return False
    zeta = w * w / ((w - z) * (w - 1))
    return zeta <= 0.9


def _quadtr_sample(rng: random.Random) -> Point:
    def draw(r):
        return {
            "d": _uniform(r, 2.3, 5.7),
            "omega": _uniform(r, -0.8, -0.05), "z": _uniform(r, -0.8, -0.05),
        }
    return _rejection(rng, draw, _quadtr_domain)


def _f12f1_lhs(pt: Point, ctx) -> NumValue:
    x, d = _P(pt, "x", "d")
    rho = (x + 1) * (x - 3) / ((x - 1) * (x + 3))
    kap = (x + 1) * (x - 3) / 4
    return hf.appell_f1(
        hf.AppellF1Params(a=(d - 1) / 2, b=(3 - d) / 2, bp=mpfr(1) / 2, c=d - 1),
        rho, -kap, ctx,
    )


def _f12f1_rhs_of(pt: Point, arg: mpfr, ctx) -> NumValue:
    x, d = _P(pt, "x", "d")
    third = mpfr(1) / 3
    pref = (
        NumValue.exact(2 * gmpy2.sqrt(mpfr(3)) / (x * x + 3))
        * NumValue.exact(mpfr(16) / 27 * x * x * (x + 3) ** 2 / (x + 1) ** 2
                         ).pow_scalar((d - 2) / 2)
        * NumValue.exact((x + 3) * (x - 1)).pow_scalar((3 - d) / 2)
    )
    return pref * hf.hyp2f1(hf.Gauss2F1Params(a=third, b=2 * third, c=d / 2), arg, ctx)


def _f12f1_rhs(pt: Point, ctx) -> NumValue:
    x = _P(pt, "x")
    return _f12f1_rhs_of(pt, fy.sunrise_2f1_argument(x), ctx)


def _f12f1_domain(pt: Point) -> bool:
    return 3.05 <= pt["x"] <= 9.5 and 2.2 <= pt["d"] <= 5.8


def _f12f1_sample(rng: random.Random) -> Point:
    def draw(r):
        return {"x": _uniform(r, 3.2, 9.0), "d": float(r.choice([3.0, 4.0, 5.0]))}
    return _rejection(rng, draw, _f12f1_domain)


def _classic_lhs(pt: Point, ctx) -> NumValue:
    a, b, bp, w, z = _P(pt, "a", "b", "bp", "w", "z")
    return hf.appell_f1(hf.AppellF1Params(a=a, b=b, bp=bp, c=b + bp), w, z, ctx)


def _classic_rhs_of(pt: Point, arg: mpfr, ctx) -> NumValue:
    a, b, bp, z = _P(pt, "a", "b", "bp", "z")
    pref = NumValue.exact(1 - z).pow_scalar(-a)
    return pref * hf.hyp2f1(hf.Gauss2F1Params(a=a, b=b, c=b + bp), arg, ctx)


def _classic_rhs(pt: Point, ctx) -> NumValue:
    w, z = _P(pt, "w", "z")
    return _classic_rhs_of(pt, (w - z) / (1 - z), ctx)


def _classic_domain(pt: Point) -> bool:
    return (
        abs(pt["w"]) <= 0.85 and abs(pt["z"]) <= 0.85
        and abs(1 - pt["z"]) >= 0.25
    )


def _classic_sample(rng: random.Random) -> Point:
    def draw(r):
        return {
            "a": _uniform(r, 0.25, 1.5), "b": _uniform(r, 0.25, 1.5),
            "bp": _uniform(r, 0.25, 1.5),
            "w": _uniform(r, -0.8, 0.8), "z": _uniform(r, -0.8, 0.7),
        }
    return _rejection(rng, draw, _classic_domain)


def _ram_u(x: mpfr) -> mpfr:
    return (x + 1) ** 3 * (x - 3) / ((x - 1) ** 3 * (x + 3))


def _ram_lhs(pt: Point, ctx) -> NumValue:
    x = _P(pt, "x")
    half = mpfr(1) / 2
    return hf.hyp2f1(hf.Gauss2F1Params(a=half, b=half, c=1), _ram_u(x), ctx)


def _ram_rhs_of(pt: Point, arg: mpfr, ctx) -> NumValue:
    x = _P(pt, "x")
    third = mpfr(1) / 3
    pref = NumValue.exact(
        gmpy2.sqrt(3 * (x + 3) * (x - 1) ** 3) / (x * x + 3)
    )
    return pref * hf.hyp2f1(hf.Gauss2F1Params(a=third, b=2 * third, c=1), arg, ctx)


def _ram_rhs(pt: Point, ctx) -> NumValue:
    x = _P(pt, "x")
    return _ram_rhs_of(pt, fy.sunrise_2f1_argument(x), ctx)


def _ram_domain(pt: Point) -> bool:
    return 3.02 <= pt["x"] <= 6.0


def _ram_sample(rng: random.Random) -> Point:
    def draw(r):
        return {"x": _uniform(r, 3.1, 4.6)}
    return _rejection(rng, draw, _ram_domain)


# ---------------------------------------------------------------- paired

def _i2x_pair(pt: Point, ctx) -> Tuple[NumValue, NumValue]:
    k = _bubble_from(pt)
    base = fy.i2(k, fy.QUADRATURE, ctx)
    worst = None
    for m in fy.admissible_i2_methods(k, ctx):
        if m == fy.QUADRATURE:
            continue
        v = fy.i2(k, m, ctx)
        if worst is None or abs(v.value - base.value) > abs(worst.value - base.value):
            worst = v
    if worst is None:
        raise DomainError("no closed-form method admitted at this point")
    return base, worst


def _i2x_domain(pt: Point) -> bool:
    try:
        k = _bubble_from(pt)
    except (DomainError, PoleError):
        return False
    return len(fy.admissible_i2_methods(k)) >= 4


def _i2x_sample(rng: random.Random) -> Point:
    def draw(r):
        d = _uniform(r, 2.6, 5.4)
        nu1 = _uniform(r, 0.6, 1.5)
        nu2 = _uniform(r, 0.6, 1.5)
        m2 = _uniform(r, 0.6, 1.4)
        if r.random() < 0.45:
            m1 = m2
            s12 = -_uniform(r, 0.06, 0.5) * m2
        else:
            y = _uniform(r, 0.5, 0.55)
            m1 = y * m2
            cap = (0.93 - math.sqrt(y)) ** 2
            s12 = -_uniform(r, 0.006, min(0.03, 0.9 * cap)) * m2
        return {"nu1": nu1, "nu2": nu2, "d": d, "m1sq": m1, "m2sq": m2, "s12": s12}

    def ok(pt):
        nu1, nu2, d = pt["nu1"], pt["nu2"], pt["d"]
        margins = (
            _pole_margin(d / 2 - nu1) and _pole_margin(nu1 - d / 2)
            and _pole_margin(nu1 + nu2 - d / 2)
            and _pole_margin(nu1 - d / 2 + 1) and _pole_margin(d / 2 - nu1 + 1)
        )
        return margins and _i2x_domain(pt)

    return _rejection(rng, draw, ok)


def _i3x_pair(pt: Point, ctx) -> Tuple[NumValue, NumValue]:
    k = _vertex_from(pt)
    base = fy.i3(k, fy.F1_FORMULA, ctx)
    others = [fy.i3(k, fy.RECURRENCE, ctx)]
    if ctx.target_digits <= VERTEX_QUAD_MAX_TARGET:
        others.append(fy.i3(k, fy.QUADRATURE, ctx))
    worst = max(others, key=lambda v: abs(v.value - base.value))
    return base, worst


def _i3x_domain(pt: Point) -> bool:
    try:
        k = _vertex_from(pt)
    except (DomainError, PoleError):
        return False
    if pt["s12"] >= -0.02 * pt["msq"]:
        return False
    sig = k.sigma
    if sig == 0:
        return False
    return (
        abs(pt["msq"] / sig) <= 0.8
        and abs(pt["s13"] / (4 * sig)) <= 0.8
        and abs(pt["s12"] - pt["s13"]) >= 0.1 * pt["msq"]
        and _pole_margin(pt["d"] / 2 - 2, 0.15)
    )


def _i3x_sample(rng: random.Random) -> Point:
    def draw(r):
        msq = _uniform(r, 0.7, 1.3)
        s13 = -_uniform(r, 0.6, 1.6) * msq
        delta = _uniform(r, 0.15, 0.45) * msq * r.choice([-1.0, 1.0])
        return {"msq": msq, "s12": s13 + delta, "s13": s13,
                "d": float(r.choice([3.4, 4.6, 5.2]))}
    return _rejection(rng, draw, _i3x_domain)


def _imj3x_pair(pt: Point, ctx) -> Tuple[NumValue, NumValue]:
    k = _sunrise_from(pt)
    return fy.im_j3(k, fy.SERIES_2F1, ctx), fy.im_j3(k, fy.QUADRATURE, ctx)


def _sunrise_domain(pt: Point) -> bool:
    try:
        _sunrise_from(pt)
    except (DomainError, PoleError):
        return False
    return True


def _imj3x_sample(rng: random.Random) -> Point:
    def draw(r):
        return {"x": _uniform(r, 3.3, 8.0), "msq": _uniform(r, 0.7, 1.3),
                "d": float(r.choice([3.0, 3.7, 4.0, 4.6, 5.2]))}
    return _rejection(rng, draw, _sunrise_domain)


def _i3ode_pair(pt: Point, ctx) -> Tuple[NumValue, NumValue]:
    return fy.i3_ode_parts(_vertex_from(pt), ctx)


def _i3ode_domain(pt: Point) -> bool:
    try:
        _vertex_from(pt)
    except (DomainError, PoleError):
        return False
    return (
        pt["s12"] < -0.02 * pt["msq"]
        and abs(pt["s12"] - pt["s13"]) >= 0.1 * pt["msq"]
        and _pole_margin(pt["d"] / 2 - 2, 0.15)
    )


def _i3ode_sample(rng: random.Random) -> Point:
    def draw(r):
        msq = _uniform(r, 0.7, 1.3)
        s13 = -_uniform(r, 0.5, 1.5) * msq
        s12 = -_uniform(r, 0.1, 1.2) * msq
        return {"msq": msq, "s12": s12, "s13": s13,
                "d": float(r.choice([3.4, 4.6, 5.2]))}
    return _rejection(rng, draw, _i3ode_domain)


def _j3diff_pair(pt: Point, ctx) -> Tuple[NumValue, NumValue]:
    return fy.sunrise_diffeq_parts(_sunrise_from(pt), ctx)


def _j3diff_sample(rng: random.Random) -> Point:
    def draw(r):
        return {"x": _uniform(r, 3.4, 8.0), "msq": _uniform(r, 0.7, 1.3),
                "d": _uniform(r, 2.6, 4.4)}
    return _rejection(rng, draw, _sunrise_domain)


# ---------------------------------------------------------------- pins

def _pin_candidate_f13f2(pt: Point) -> mpfr:
    x = to_mpfr(pt["x"])
    return x * x / (4 * (x - 1))


def _pin_candidate_quadtr(pt: Point) -> mpfr:
    return _quad_zeta(to_mpfr(pt["omega"]), to_mpfr(pt["z"]))


def _pin_candidate_classic(pt: Point) -> mpfr:
    w, z = to_mpfr(pt["w"]), to_mpfr(pt["z"])
    return (w - z) / (1 - z)


def _pin_candidate_sunrise(pt: Point) -> mpfr:
    return fy.sunrise_2f1_argument(to_mpfr(pt["x"]))


# --------------------------------------------------------------------------
# the registry
# --------------------------------------------------------------------------

_REGISTRY: Optional[Tuple[IdentityRecord, ...]] = None


def registry() -> Tuple[IdentityRecord, ...]:
    """All registered relations, immutable and constructed once."""
    global _REGISTRY
    if _REGISTRY is not None:
        return _REGISTRY
    records = (
        IdentityRecord(
            id="ID-SWAP",
            description=(
                "two-point integral is symmetric under exchanging "
                "(nu1, m1sq) <-> (nu2, m2sq); equivalently the argument map "
                "u -> u/(u-1) composed with the F1 reflection identity"
            ),
            citation="mass-exchange symmetry of the single-F1 bubble form",
            param_names=("nu1", "nu2", "d", "m1sq", "m2sq", "s12"),
            lhs=_swap_lhs, rhs=_swap_rhs,
            domain=_swap_domain, sampler=_swap_sample,
        ),
        IdentityRecord(
            id="ID-F1F4",
            description=(
                "F1(nu1, B, B; nu1+nu2; x-, x+) with B = nu1+nu2-d/2 equals a "
                "gamma-weighted sum of two F4 values at (x, y), where x-+x+ = "
                "1+x-y and x- x+ = x"
            ),
            citation="single-F1 versus double-F4 closed forms of the bubble",
            param_names=("nu1", "nu2", "d", "x", "y"),
            lhs=_f1f4_lhs, rhs=_f1f4_rhs,
            domain=_f1f4_domain, sampler=_f1f4_sample,
        ),
        IdentityRecord(
            id="ID-BAILEY",
            description=(
                "F4(a, b; c, b) at arguments -x/((1-x)(1-y)), -y/((1-x)(1-y)) "
                "equals ((1-x)(1-y))^a F1(a, c-b, 1+a-c; c; x, xy)"
            ),
            citation="classical F4-to-F1 reduction (repeated-parameter case)",
            param_names=("alpha", "beta", "gamma", "x", "y"),
            lhs=_bailey_lhs, rhs=_bailey_rhs,
            domain=_bailey_domain, sampler=_bailey_sample,
        ),
        IdentityRecord(
            id="ID-F4TOF1",
            description=(
                "F4(a, b; b', a-b'+1; x, y) as a two-term combination of F1 "
                "values built from the factorization roots of (x, y)"
            ),
            citation=(
                "solving the F1/double-F4 bubble equality for one F4 after "
                "reducing the other via the repeated-parameter F4-to-F1 rule"
            ),
            param_names=("alpha", "beta", "betap", "x", "y"),
            lhs=_f4tof1_lhs, rhs=_f4tof1_rhs,
            domain=_f4tof1_domain, sampler=_f4tof1_sample,
        ),
        IdentityRecord(
            id="ID-KDF",
            description=(
                "the F^{2;1;0}_{1;0;0} double series with lower parameter "
                "advancing as 2k+l reduces to F1(nu1, a, a; nu1+nu2; z-, z+), "
                "z+- = ((x+y) +- sqrt((x+y)^2-4x))/2"
            ),
            citation="Kampe de Feriet versus single-F1 bubble closed forms",
            param_names=("alpha", "nu1", "nu2", "x", "y"),
            lhs=_kdf_lhs, rhs=_kdf_rhs,
            domain=_kdf_domain, sampler=_kdf_sample,
        ),
        IdentityRecord(
            id="ID-F1-3F2",
            description=(
                "F1(a, b, b; c; x, x/(x-1)) reduces to "
                "3F2(a, c-a, b; c/2, (c+1)/2; x^2/(4(x-1)))"
            ),
            citation="equal-mass bubble: single-F1 form versus its 3F2 form",
            param_names=("alpha", "beta", "gamma", "x"),
            lhs=_f13f2_lhs, rhs=_f13f2_rhs,
            domain=_f13f2_domain, sampler=_f13f2_sample,
            pin=PinSpec(
                unknown="3F2 argument",
                rhs_of=_f13f2_rhs_of,
                candidate=_pin_candidate_f13f2,
                lo=-20.0, hi=0.94,
            ),
        ),
        IdentityRecord(
            id="ID-F1-ANTI",
            description=(
                "F1(a, b, b; c; x, -x) reduces to "
                "3F2(a/2, (a+1)/2, b; c/2, (c+1)/2; x^2)"
            ),
            citation="classical antisymmetric-argument F1 reduction",
            param_names=("alpha", "beta", "gamma", "x"),
            lhs=_f1anti_lhs, rhs=_f1anti_rhs,
            domain=_f1anti_domain, sampler=_f1anti_sample,
        ),
        IdentityRecord(
            id="ID-QUAD",
            description=(
                "quadratic transformation of F1(1, 1, 2-d/2; d/2; w, z): the "
                "right side pairs 2F1(1, (d-2)/2; d/2) and "
                "F1((d-2)/2, 1, 1/2; d/2) at arguments w^2/((w-z)(w-1)) "
                "and -4z/(z-1)^2"
            ),
            citation=(
                "comparing the parameter-integral and dimension-shift "
                "closed forms of the one-mass vertex"
            ),
            param_names=("d", "omega", "z"),
            lhs=_quadtr_lhs, rhs=_quadtr_rhs,
            domain=_quadtr_domain, sampler=_quadtr_sample,
            pin=PinSpec(
                unknown="2F1 argument",
                rhs_of=_quadtr_rhs_of,
                candidate=_pin_candidate_quadtr,
                lo=-30.0, hi=0.93,
            ),
        ),
        IdentityRecord(
            id="ID-F1-2F1",
            description=(
                "F1((d-1)/2, (3-d)/2, 1/2; d-1) at the cut arguments "
                "((x+1)(x-3)/((x-1)(x+3)), -(x+1)(x-3)/4) equals a closed "
                "prefactor times 2F1(1/3, 2/3; d/2) at the sextic rational "
                "argument x^2 (x^2-9)^2 / (x^2+3)^3"
            ),
            citation=(
                "one-fold cut integral versus the Gauss closed form of the "
                "equal-mass two-loop self-energy"
            ),
            param_names=("x", "d"),
            lhs=_f12f1_lhs, rhs=_f12f1_rhs,
            domain=_f12f1_domain, sampler=_f12f1_sample,
            pin=PinSpec(
                unknown="2F1 argument",
                rhs_of=_f12f1_rhs_of,
                candidate=_pin_candidate_sunrise,
                lo=-5.0, hi=0.97,
                rational_in="x",
            ),
        ),
        IdentityRecord(
            id="ID-CLASSIC",
            description=(
                "F1(a, b, b'; b+b'; w, z) = (1-z)^(-a) "
                "2F1(a, b; b+b'; (w-z)/(1-z))"
            ),
            citation="classical one-variable reduction of F1 at c = b + b'",
            param_names=("a", "b", "bp", "w", "z"),
            lhs=_classic_lhs, rhs=_classic_rhs,
            domain=_classic_domain, sampler=_classic_sample,
            pin=PinSpec(
                unknown="2F1 argument",
                rhs_of=_classic_rhs_of,
                candidate=_pin_candidate_classic,
                lo=-20.0, hi=0.94,
            ),
        ),
        IdentityRecord(
            id="ID-RAMANUJAN",
            description=(
                "2F1(1/2, 1/2; 1; (x+1)^3 (x-3) / ((x-1)^3 (x+3))) equals "
                "sqrt(3 (x+3)(x-1)^3) / (x^2+3) times 2F1(1/3, 2/3; 1) at "
                "x^2 (x^2-9)^2 / (x^2+3)^3"
            ),
            citation=(
                "elliptic-type specialization of the self-energy cut "
                "relation at its lowest dimension"
            ),
            param_names=("x",),
            lhs=_ram_lhs, rhs=_ram_rhs,
            domain=_ram_domain, sampler=_ram_sample,
            pin=PinSpec(
                unknown="2F1 argument",
                rhs_of=_ram_rhs_of,
                candidate=_pin_candidate_sunrise,
                lo=-5.0, hi=0.97,
                rational_in="x",
            ),
        ),
        IdentityRecord(
            id="ID-I2-XMETHOD",
            description=(
                "all admitted closed-form evaluations of the two-point "
                "integral agree with its parameter-integral quadrature"
            ),
            citation="cross-method equality of the two-point evaluators",
            param_names=("nu1", "nu2", "d", "m1sq", "m2sq", "s12"),
            lhs=_swap_lhs, rhs=_swap_lhs,
            domain=_i2x_domain, sampler=_i2x_sample,
            paired=_i2x_pair,
        ),
        IdentityRecord(
            id="ID-I3-XMETHOD",
            description=(
                "the vertex F1 closed form agrees with the dimension-shift "
                "recurrence sum (and, at practical precision targets, with "
                "2-d parameter quadrature)"
            ),
            citation="cross-method equality of the vertex evaluators",
            param_names=("msq", "s12", "s13", "d"),
            lhs=lambda pt, ctx: fy.i3(_vertex_from(pt), fy.F1_FORMULA, ctx),
            rhs=lambda pt, ctx: fy.i3(_vertex_from(pt), fy.RECURRENCE, ctx),
            domain=_i3x_domain, sampler=_i3x_sample,
            paired=_i3x_pair,
        ),
        IdentityRecord(
            id="ID-IMJ3-XMETHOD",
            description=(
                "the Gauss closed form of the self-energy cut agrees with "
                "the one-fold cut-integral quadrature"
            ),
            citation="cross-method equality of the self-energy cut evaluators",
            param_names=("x", "msq", "d"),
            lhs=lambda pt, ctx: fy.im_j3(_sunrise_from(pt), fy.SERIES_2F1, ctx),
            rhs=lambda pt, ctx: fy.im_j3(_sunrise_from(pt), fy.QUADRATURE, ctx),
            domain=_sunrise_domain, sampler=_imj3x_sample,
            paired=_imj3x_pair,
        ),
        IdentityRecord(
            id="ID-I3-ODE",
            description=(
                "five-point finite-difference derivative of the vertex in "
                "s12 equals the first-order equation right side built from "
                "bubble inputs"
            ),
            citation="differential equation of the vertex in the external invariant",
            param_names=("msq", "s12", "s13", "d"),
            lhs=lambda pt, ctx: fy.i3_ode_parts(_vertex_from(pt), ctx)[0],
            rhs=lambda pt, ctx: fy.i3_ode_parts(_vertex_from(pt), ctx)[1],
            domain=_i3ode_domain, sampler=_i3ode_sample,
            paired=_i3ode_pair,
        ),
        IdentityRecord(
            id="ID-J3-DIFFEQ",
            description=(
                "third-order dimension-shift relation of the self-energy "
                "cut: the d+4 term equals the weighted d+2 and d terms"
            ),
            citation="dimension-shift relation of the self-energy cut",
            param_names=("x", "msq", "d"),
            lhs=lambda pt, ctx: fy.sunrise_diffeq_parts(_sunrise_from(pt), ctx)[0],
            rhs=lambda pt, ctx: fy.sunrise_diffeq_parts(_sunrise_from(pt), ctx)[1],
            domain=_sunrise_domain, sampler=_j3diff_sample,
            paired=_j3diff_pair,
        ),
    )
    _REGISTRY = records
    return records


def get_identity(identity_id: str) -> IdentityRecord:
    for rec in registry():
        if rec.id == identity_id:
            return rec
    raise UnknownIdentity(f"no identity named {identity_id!r}")


# --------------------------------------------------------------------------
# verify / sweep / pin
# --------------------------------------------------------------------------

_EVAL_ERRORS = (DomainError, PoleError, NonConvergence, QuadFailure)


def verify(identity_id: str, point: Point,
           ctx: PrecisionContext, seed: int = 0) -> VerificationReport:
    """Evaluate both sides at one point and report digits of agreement."""
    rec = get_identity(identity_id)
    missing = [n for n in rec.param_names if n not in point]
    if missing:
        raise UnknownIdentity(
            f"{identity_id} point is missing parameters {missing}"
        )
    if not rec.domain(point):
        return VerificationReport(
            id=rec.id, point=dict(point), lhs_value=None, rhs_value=None,
            matched_digits=0, status="SKIP", seed=seed,
            ctx_digits=ctx.target_digits, note="outside validity domain",
        )
    try:
        with working_precision(ctx):
            lhs, rhs = rec.evaluate(point, ctx)
    except _EVAL_ERRORS as exc:
        return VerificationReport(
            id=rec.id, point=dict(point), lhs_value=None, rhs_value=None,
            matched_digits=0, status="SKIP", seed=seed,
            ctx_digits=ctx.target_digits, note=f"{type(exc).__name__}: {exc}",
        )
    md = matched_digits(lhs, rhs, ctx)
    status = "PASS" if md >= ctx.target_digits - PASS_MARGIN else "FAIL"
    return VerificationReport(
        id=rec.id, point=dict(point), lhs_value=lhs, rhs_value=rhs,
        matched_digits=md, status=status, seed=seed,
        ctx_digits=ctx.target_digits,
    )


def sample_point(identity_id: str, seed: int, index: int = 0) -> Point:
    """The index-th admissible point of the seeded sampler stream."""
    rec = get_identity(identity_id)
    rng = random.Random(f"{identity_id}|{seed}")
    pt = rec.sampler(rng)
    for _ in range(index):
        pt = rec.sampler(rng)
    return pt


def sweep(identity_id: str, n: int, seed: int,
          ctx: PrecisionContext) -> List[VerificationReport]:
    """n verification reports at seeded sample points; bit-reproducible for
    identical (identity, n, seed, ctx)."""
    if n < 1:
        raise ValueError("sweep needs n >= 1")
    rec = get_identity(identity_id)
    rng = random.Random(f"{identity_id}|{seed}")
    out = []
    for _ in range(n):
        pt = rec.sampler(rng)
        out.append(verify(identity_id, pt, ctx, seed=seed))
    return out


def pin_argument(identity_id: str, points: Sequence[Point],
                 ctx: PrecisionContext) -> List[Tuple[Point, mpfr]]:
    """Solve RHS(unknown) = LHS for the identity's single unknown scalar
    argument at each point, by bracketing, bisection, and secant polish."""
    rec = get_identity(identity_id)
    if rec.pin is None:
        raise UnknownIdentity(f"{identity_id} has no pinnable unknown")
    pin = rec.pin
    out: List[Tuple[Point, mpfr]] = []
    with working_precision(ctx):
        tol_u = mpfr(10) ** (-ctx.target_digits)
        for pt in points:
            target = rec.lhs(pt, ctx).value

            def g(u: mpfr) -> mpfr:
                return pin.rhs_of(pt, u, ctx).value - target

            lo, hi = to_mpfr(pin.lo), to_mpfr(pin.hi)
            grid_n = 32
            us = [lo + (hi - lo) * i / grid_n for i in range(grid_n + 1)]
            gs = []
            for u in us:
                try:
                    gs.append(g(u))
                except _EVAL_ERRORS:
                    gs.append(None)
            bracket = None
            for i in range(grid_n):
                if gs[i] is None or gs[i + 1] is None:
                    continue
                if gs[i] == 0:
                    bracket = (us[i], us[i], gs[i], gs[i])
                    break
                if gs[i] * gs[i + 1] < 0:
                    bracket = (us[i], us[i + 1], gs[i], gs[i + 1])
                    break
            if bracket is None:
                raise NoBracket(
                    f"{identity_id}: no sign change on "
                    f"[{pin.lo}, {pin.hi}] at point {pt}"
                )
            a, b, ga, gb = bracket
            # bisection to a short interval, then secant to full precision
            for _ in range(64):
                if b - a <= mpfr("1e-6") * max(1, abs(a)):
                    break
                mid = (a + b) / 2
                gm = g(mid)
                if gm == 0:
                    a = b = mid
                    ga = gb = gm
                    break
                if ga * gm < 0:
                    b, gb = mid, gm
                else:
                    a, ga = mid, gm
            u0, u1 = a, b if b != a else a + tol_u
            f0, f1 = ga, g(u1) if b == a else gb
            root = u1
            for _ in range(200):
                if f1 == f0:
                    break
                u2 = u1 - f1 * (u1 - u0) / (f1 - f0)
                if not (lo <= u2 <= hi):
                    u2 = (u0 + u1) / 2
                step = abs(u2 - u1)
                u0, f0 = u1, f1
                u1 = u2
                f1 = g(u1)
                root = u1
                if step <= tol_u * max(1, abs(u1)):
                    break
            out.append((pt, root))
    return out


# --------------------------------------------------------------------------
# rational-function consistency (for pinned argument sequences)
# --------------------------------------------------------------------------

def rational_fit(xs: Sequence[Scalar], zs: Sequence[Scalar],
                 num_deg: int, den_deg: int,
                 ctx: PrecisionContext) -> Tuple[List[mpfr], List[mpfr], mpfr]:
    """Fit z(x) = P(x)/Q(x) with deg P <= num_deg, deg Q <= den_deg through
    the first num_deg+den_deg+1 points (Q monic), solved at doubled
    precision; returns (P coefficients, Q coefficients, max relative
    residual over all supplied points)."""
    need = num_deg + den_deg + 1
    if len(xs) < need + 1:
        raise ValueError(f"need at least {need + 1} points")
    ctx2 = PrecisionContext.for_digits(2 * ctx.target_digits)
    with working_precision(ctx2):
        xv = [to_mpfr(x) for x in xs]
        zv = [to_mpfr(z) for z in zs]
        n = need
        A = [[mpfr(0)] * n for _ in range(n)]
        rhs = [mpfr(0)] * n
        for i in range(n):
            for j in range(num_deg + 1):
                A[i][j] = xv[i] ** j
            for j in range(den_deg):
                A[i][num_deg + 1 + j] = -zv[i] * xv[i] ** j
            rhs[i] = zv[i] * xv[i] ** den_deg
        sol = _solve_linear(A, rhs)
        p = sol[: num_deg + 1]
        q = sol[num_deg + 1:] + [mpfr(1)]
        worst = mpfr(0)
        for x, z in zip(xv, zv):
            num = sum(p[j] * x ** j for j in range(num_deg + 1))
            den = sum(q[j] * x ** j for j in range(den_deg + 1))
            resid = abs(num / den - z) / max(abs(z), mpfr(10) ** (-ctx.target_digits))
            worst = max(worst, resid)
        return p, q, worst


def _solve_linear(A: List[List[mpfr]], b: List[mpfr]) -> List[mpfr]:
    n = len(b)
    M = [row[:] + [b[i]] for i, row in enumerate(A)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(M[r][col]))
        if M[piv][col] == 0:
            raise DomainError("singular linear system in rational fit")
        M[col], M[piv] = M[piv], M[col]
        inv = 1 / M[col][col]
        for r in range(col + 1, n):
            f = M[r][col] * inv
            if f == 0:
                continue
            for c in range(col, n + 1):
                M[r][c] -= f * M[col][c]
    x = [mpfr(0)] * n
    for r in range(n - 1, -1, -1):
        acc = M[r][n]
        for c in range(r + 1, n):
            acc -= M[r][c] * x[c]
        x[r] = acc / M[r][r]
    return x
