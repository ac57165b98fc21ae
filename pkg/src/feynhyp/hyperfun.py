"""Hypergeometric evaluators: 2F1, 3F2, Appell F1/F4, Kampe de Feriet.

Each evaluator dispatches over explicit convergence domains:

* ``hyp2f1`` — direct series for |z| <= 1/2, otherwise the classical
  argument-transformation set, picking the image of smallest modulus whose
  gamma prefactors are pole-free; an Euler-integral fallback covers the
  logarithmic parameter degeneracies on 0 < z < 1.
* ``hyp3f2`` — direct series inside |z| <= 0.95 (slow tail up to 1 when the
  parameter excess is positive).
* ``appell_f1`` — double series, Euler integral, or the first-argument
  reflection map, tried in that order.
* ``appell_f4`` / ``kdf_f210`` — double series only, on conservative domains.

Everything is real-valued; points needing analytic continuation are
rejected with :class:`DomainError` rather than continued.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, List, Optional, Tuple

import gmpy2
from gmpy2 import mpfr

from .errors import DomainError, NonConvergence, PoleError
from .numkernel import (
    NumValue,
    PrecisionContext,
    Scalar,
    SeriesResult,
    gamma,
    is_near_nonpositive_int,
    quad_de,
    rgamma,
    require_converged,
    sum_series,
    to_mpfr,
    working_precision,
)

#: polydisc radius for direct series routes (kept below 1 so the geometric
#: tail bound stays effective)
SERIES_RADIUS = 0.95

#: conservative double-series domain for the Kampe de Feriet evaluator; the
#: x-direction is damped by the (c)_{2k+l} denominator, the y-direction is a
#: plain Gauss column, so |y| may go somewhat beyond |x|
KDF_X_RADIUS = 0.5
KDF_Y_RADIUS = 0.85


@dataclass(frozen=True)
class Gauss2F1Params:
    a: Scalar
    b: Scalar
    c: Scalar


@dataclass(frozen=True)
class Hyp3F2Params:
    a1: Scalar
    a2: Scalar
    a3: Scalar
    b1: Scalar
    b2: Scalar


@dataclass(frozen=True)
class AppellF1Params:
    a: Scalar
    b: Scalar
    bp: Scalar
    c: Scalar


@dataclass(frozen=True)
class AppellF4Params:
    a: Scalar
    b: Scalar
    c1: Scalar
    c2: Scalar


@dataclass(frozen=True)
class KdFParams:
    alpha: Scalar
    nu1: Scalar
    nu2: Scalar


def _check_lower(name: str, v: mpfr, ctx: PrecisionContext) -> None:
    if is_near_nonpositive_int(v, ctx.pole_tol()):
        raise PoleError(f"lower parameter {name}={v} is a non-positive integer")


def _near_int(v: mpfr, tol: mpfr) -> bool:
    return abs(v - gmpy2.rint(v)) <= tol


def _pow_nv(base: mpfr, expo: mpfr) -> NumValue:
    if base < 0:
        raise DomainError(f"negative base {base} under real power {expo}")
    return NumValue.exact(base).pow_scalar(expo)


# --------------------------------------------------------------------------
# Gauss 2F1
# --------------------------------------------------------------------------

def _gauss_series(a: mpfr, b: mpfr, c: mpfr, z: mpfr,
                  ctx: PrecisionContext) -> NumValue:
    def terms() -> Iterator[mpfr]:
        t = mpfr(1)
        k = 0
        while True:
            yield t
            t = t * (a + k) * (b + k) * z / ((c + k) * (k + 1))
            k += 1

    return require_converged(sum_series(terms(), ctx), "2F1 series")


def _gauss_terminating(n: int, b: mpfr, c: mpfr, z: mpfr,
                       ctx: PrecisionContext) -> NumValue:
    # 2F1(-n, b; c; z): exact polynomial
    acc = NumValue.exact(1)
    t = NumValue.exact(1)
    for k in range(n):
        t = t * ((-n + k) * (b + k)) / ((c + k) * (k + 1)) * z
        acc = acc + t
    return acc


def _gauss_euler(a: mpfr, b: mpfr, c: mpfr, z: mpfr,
                 ctx: PrecisionContext) -> Optional[NumValue]:
    # Gamma(c)/(Gamma(b)Gamma(c-b)) * int_0^1 t^(b-1)(1-t)^(c-b-1)(1-zt)^(-a)
    for (aa, bb) in ((a, b), (b, a)):
        if bb > 0 and c - bb > 0:
            f = lambda t: t ** (bb - 1) * (1 - t) ** (c - bb - 1) * (1 - z * t) ** (-aa)
            quad = quad_de(f, 0, 1, ctx)
            pref = gamma(c, ctx) / (gamma(bb, ctx) * gamma(c - bb, ctx))
            return (pref * quad).with_route("euler")
    return None


def hyp2f1(p: Gauss2F1Params, z: Scalar,
           ctx: PrecisionContext = None) -> NumValue:
    """Gauss hypergeometric function on the real interval z < 1."""
    ctx = ctx or PrecisionContext.for_digits(50)
    with working_precision(ctx):
        a, b, c = to_mpfr(p.a), to_mpfr(p.b), to_mpfr(p.c)
        zv = to_mpfr(z)
        _check_lower("c", c, ctx)
        if zv >= 1:
            raise DomainError(f"2F1 argument z={zv} outside the real region z < 1")
        tol = ctx.pole_tol()

        # terminating numerator parameter: sum the polynomial directly
        for up, other in ((a, b), (b, a)):
            if is_near_nonpositive_int(up, tol):
                n = int(-gmpy2.rint(up))
                return _gauss_terminating(n, other, c, zv, ctx).with_route("terminating")

        if abs(zv) <= mpfr(1) / 2:
            return _gauss_series(a, b, c, zv, ctx).with_route("series")

        value = _dispatch_2f1(a, b, c, zv, ctx)
        if value is not None:
            return value
        value = _gauss_euler(a, b, c, zv, ctx)
        if value is not None:
            return value
        raise PoleError(
            "all 2F1 transformations hit gamma poles and no Euler route applies"
        )


def _dispatch_2f1(a: mpfr, b: mpfr, c: mpfr, z: mpfr,
                  ctx: PrecisionContext) -> Optional[NumValue]:
    tol = ctx.pole_tol()
    int_cab = _near_int(c - a - b, tol)
    int_ab = _near_int(a - b, tol)
    one = mpfr(1)

    candidates: List[Tuple[mpfr, int, str]] = [(z, 0, "z"), (z / (z - 1), 1, "z/(z-1)")]
    if not int_cab:
        candidates.append((1 - z, 2, "1-z"))
    if not int_ab and z < 0:
        candidates.append((1 / z, 3, "1/z"))
    if not int_ab:
        candidates.append((1 / (1 - z), 4, "1/(1-z)"))
    if not int_cab and z > 0:
        candidates.append(((z - 1) / z, 5, "(z-1)/z"))

    candidates = [cnd for cnd in candidates if abs(cnd[0]) <= SERIES_RADIUS]
    if not candidates:
        return None
    w, _, tag = min(candidates, key=lambda cnd: (abs(cnd[0]), cnd[1]))

    def G(x) -> NumValue:
        return gamma(x, ctx)

    def RG(x) -> NumValue:
        return rgamma(x, ctx)

    def S(aa, bb, cc) -> NumValue:
        return _gauss_series(aa, bb, cc, w, ctx)

    if tag == "z":
        out = S(a, b, c)
    elif tag == "z/(z-1)":
        out = _pow_nv(1 - z, -a) * S(a, c - b, c)
    elif tag == "1-z":
        t1 = G(c) * G(c - a - b) * RG(c - a) * RG(c - b) * S(a, b, a + b - c + 1)
        t2 = (
            G(c) * G(a + b - c) * RG(a) * RG(b)
            * _pow_nv(1 - z, c - a - b) * S(c - a, c - b, c - a - b + 1)
        )
        out = t1 + t2
    elif tag == "1/z":
        t1 = G(c) * G(b - a) * RG(b) * RG(c - a) * _pow_nv(-z, -a) * S(a, a - c + 1, a - b + 1)
        t2 = G(c) * G(a - b) * RG(a) * RG(c - b) * _pow_nv(-z, -b) * S(b, b - c + 1, b - a + 1)
        out = t1 + t2
    elif tag == "1/(1-z)":
        t1 = (
            G(c) * G(b - a) * RG(b) * RG(c - a)
            * _pow_nv(1 - z, -a) * S(a, c - b, a - b + 1)
        )
        t2 = (
            G(c) * G(a - b) * RG(a) * RG(c - b)
            * _pow_nv(1 - z, -b) * S(b, c - a, b - a + 1)
        )
        out = t1 + t2
    else:  # (z-1)/z
        t1 = (
            G(c) * G(c - a - b) * RG(c - a) * RG(c - b)
            * _pow_nv(z, -a) * S(a, a - c + 1, a + b - c + 1)
        )
        t2 = (
            G(c) * G(a + b - c) * RG(a) * RG(b)
            * _pow_nv(1 - z, c - a - b) * _pow_nv(z, a - c) * S(c - a, 1 - a, c - a - b + 1)
        )
        out = t1 + t2
    return out.with_route(tag)


# --------------------------------------------------------------------------
# 3F2
# --------------------------------------------------------------------------

def hyp3f2(p: Hyp3F2Params, z: Scalar,
           ctx: PrecisionContext = None) -> NumValue:
    """3F2 by direct series; no analytic continuation beyond |z| < 1."""
    ctx = ctx or PrecisionContext.for_digits(50)
    with working_precision(ctx):
        a1, a2, a3 = to_mpfr(p.a1), to_mpfr(p.a2), to_mpfr(p.a3)
        b1, b2 = to_mpfr(p.b1), to_mpfr(p.b2)
        zv = to_mpfr(z)
        _check_lower("b1", b1, ctx)
        _check_lower("b2", b2, ctx)
        slow = False
        if abs(zv) > SERIES_RADIUS:
            excess = b1 + b2 - a1 - a2 - a3
            if not (SERIES_RADIUS < zv < 1 and excess > 0):
                raise DomainError(
                    f"3F2 argument z={zv} outside the series domain"
                )
            slow = True

        def terms() -> Iterator[mpfr]:
            t = mpfr(1)
            k = 0
            while True:
                yield t
                t = t * (a1 + k) * (a2 + k) * (a3 + k) * zv / ((b1 + k) * (b2 + k) * (k + 1))
                k += 1

        out = require_converged(sum_series(terms(), ctx), "3F2 series")
        return out.with_route("series-slow" if slow else "series")


# --------------------------------------------------------------------------
# Appell F1
# --------------------------------------------------------------------------

def _f1_series(a: mpfr, b: mpfr, bp: mpfr, c: mpfr, w: mpfr, z: mpfr,
               ctx: PrecisionContext) -> NumValue:
    # diagonal shells n = k + l; row[k] holds t(k, n-k), updated in place
    def shells() -> Iterator[mpfr]:
        row = [mpfr(1)]
        n = 0
        while True:
            yield mpfr(sum(row))
            # advance every entry in l, then append the new k = n+1 entry
            new_row = [
                row[k] * (a + n) * (bp + n - k) * z / ((c + n) * (n + 1 - k))
                for k in range(n + 1)
            ]
            new_row.append(row[n] * (a + n) * (b + n) * w / ((c + n) * (n + 1)))
            row = new_row
            n += 1

    return require_converged(sum_series(shells(), ctx), "F1 double series")


def appell_f1(p: AppellF1Params, w: Scalar, z: Scalar,
              ctx: PrecisionContext = None) -> NumValue:
    """Appell F1(a, b, b'; c; w, z) with route dispatch.

    Routes, in order: (i) double series on the polydisc, (ii) Euler integral
    when c > a > 0 and both arguments are below 1, (iii) reflection of both
    arguments u -> u/(u-1) followed by (i)/(ii).  The route taken is recorded
    on the result.
    """
    ctx = ctx or PrecisionContext.for_digits(50)
    with working_precision(ctx):
        a, b, bp, c = (to_mpfr(p.a), to_mpfr(p.b), to_mpfr(p.bp), to_mpfr(p.c))
        wv, zv = to_mpfr(w), to_mpfr(z)
        _check_lower("c", c, ctx)

        if max(abs(wv), abs(zv)) <= SERIES_RADIUS:
            return _f1_series(a, b, bp, c, wv, zv, ctx).with_route("series")

        if c > a > 0 and wv < 1 and zv < 1:
            f = lambda u: (
                u ** (a - 1) * (1 - u) ** (c - a - 1)
                * (1 - u * wv) ** (-b) * (1 - u * zv) ** (-bp)
            )
            quad = quad_de(f, 0, 1, ctx)
            pref = gamma(c, ctx) / (gamma(a, ctx) * gamma(c - a, ctx))
            return (pref * quad).with_route("euler")

        if wv < 1 and zv < 1:
            wp_, zp_ = wv / (wv - 1), zv / (zv - 1)
            pref = _pow_nv(1 - wv, -b) * _pow_nv(1 - zv, -bp)
            if max(abs(wp_), abs(zp_)) <= SERIES_RADIUS:
                inner = _f1_series(c - a, b, bp, c, wp_, zp_, ctx)
                return (pref * inner).with_route("pfaff+series")
            if c > c - a > 0:
                f = lambda u: (
                    u ** (c - a - 1) * (1 - u) ** (a - 1)
                    * (1 - u * wp_) ** (-b) * (1 - u * zp_) ** (-bp)
                )
                quad = quad_de(f, 0, 1, ctx)
                pref2 = gamma(c, ctx) / (gamma(c - a, ctx) * gamma(a, ctx))
                return (pref * pref2 * quad).with_route("pfaff+euler")

        raise DomainError(
            f"no F1 route applies at (w, z) = ({wv}, {zv}) "
            f"with (a, c) = ({a}, {c})"
        )


def appell_f1_onefold(d: Scalar, x: Scalar, y: Scalar,
                      ctx: PrecisionContext = None) -> NumValue:
    """F1(1, 1, 2-d/2; d/2; x, y) from its one-fold integral representation:
    (d-2)/2 * int_0^1 [(1-u)(1-y u)]^(d/2-2) / (1-x u) du."""
    ctx = ctx or PrecisionContext.for_digits(50)
    with working_precision(ctx):
        dv, xv, yv = to_mpfr(d), to_mpfr(x), to_mpfr(y)
        if not (xv < 1 and yv < 1 and dv > 2):
            raise DomainError("one-fold F1 route needs x < 1, y < 1, d > 2")
        e = dv / 2 - 2
        f = lambda u: ((1 - u) * (1 - yv * u)) ** e / (1 - xv * u)
        quad = quad_de(f, 0, 1, ctx)
        return ((dv - 2) / 2 * quad).with_route("onefold")


# --------------------------------------------------------------------------
# Appell F4
# --------------------------------------------------------------------------

def appell_f4(p: AppellF4Params, x: Scalar, y: Scalar,
              ctx: PrecisionContext = None) -> NumValue:
    """Appell F4(a, b; c1, c2; x, y) by double series on
    sqrt|x| + sqrt|y| <= 0.95."""
    ctx = ctx or PrecisionContext.for_digits(50)
    with working_precision(ctx):
        a, b, c1, c2 = (to_mpfr(p.a), to_mpfr(p.b), to_mpfr(p.c1), to_mpfr(p.c2))
        xv, yv = to_mpfr(x), to_mpfr(y)
        _check_lower("c1", c1, ctx)
        _check_lower("c2", c2, ctx)
        if gmpy2.sqrt(abs(xv)) + gmpy2.sqrt(abs(yv)) > SERIES_RADIUS:
            raise DomainError("F4 outside sqrt|x| + sqrt|y| <= 0.95")

        def shells() -> Iterator[mpfr]:
            row = [mpfr(1)]  # row[k] = t(k, n-k)
            n = 0
            while True:
                yield mpfr(sum(row))
                new_row = [
                    row[k] * (a + n) * (b + n) * yv / ((c2 + n - k) * (n + 1 - k))
                    for k in range(n + 1)
                ]
                new_row.append(row[n] * (a + n) * (b + n) * xv / ((c1 + n) * (n + 1)))
                row = new_row
                n += 1

        out = require_converged(sum_series(shells(), ctx), "F4 double series")
        return out.with_route("series")


# --------------------------------------------------------------------------
# Kampe de Feriet F^{2;1;0}_{1;0;0}
# --------------------------------------------------------------------------

def kdf_f210(p: KdFParams, x: Scalar, y: Scalar,
             ctx: PrecisionContext = None) -> NumValue:
    """Two-variable series with index weights (1,1), (1,1) : (1,0) over
    (2,1):

        sum_{k,l} (alpha)_{k+l} (nu1)_{k+l} (nu2)_k
                  / (nu1+nu2)_{2k+l} * x^k y^l / (k! l!)

    Upper parameters advance with k+l (nu2 with k alone); the single lower
    parameter advances with 2k+l.
    """
    ctx = ctx or PrecisionContext.for_digits(50)
    with working_precision(ctx):
        al, n1, n2 = to_mpfr(p.alpha), to_mpfr(p.nu1), to_mpfr(p.nu2)
        nu = n1 + n2
        xv, yv = to_mpfr(x), to_mpfr(y)
        _check_lower("nu1+nu2", nu, ctx)
        if abs(xv) > KDF_X_RADIUS or abs(yv) > KDF_Y_RADIUS:
            raise DomainError(
                f"KdF outside |x| <= {KDF_X_RADIUS}, |y| <= {KDF_Y_RADIUS}"
            )

        def shells() -> Iterator[mpfr]:
            row = [mpfr(1)]  # row[k] = t(k, n-k)
            n = 0
            while True:
                yield mpfr(sum(row))
                new_row = [
                    row[k] * (al + n) * (n1 + n) * yv / ((nu + n + k) * (n + 1 - k))
                    for k in range(n + 1)
                ]
                new_row.append(
                    row[n] * (al + n) * (n1 + n) * (n2 + n) * xv
                    / ((nu + 2 * n) * (nu + 2 * n + 1) * (n + 1))
                )
                row = new_row
                n += 1

        out = require_converged(sum_series(shells(), ctx), "KdF double series")
        return out.with_route("series")
