"""Multi-method evaluators for three dimensionally-regularized integrals.

* the two-point (bubble) integral with arbitrary propagator powers and
  masses, in five independent forms (single Appell F1, double Appell F4,
  Kampe de Feriet, equal-mass 3F2, and direct Feynman-parameter quadrature);
* the one-mass vertex integral, via its Appell-F1 closed form, the solution
  of its dimension-shift recurrence, and 2-d quadrature;
* the imaginary part of the equal-mass two-loop self-energy above its
  three-particle cut, via a Gauss-2F1 closed form and the one-fold cut
  integral.

All evaluators share one real-domain policy: every precondition is a
checkable predicate guaranteeing that fractional-power bases stay positive;
kinematics needing analytic continuation are rejected, not continued.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Tuple

import gmpy2
from gmpy2 import mpfr

from .errors import DomainError, NonConvergence, PoleError
from .hyperfun import (
    AppellF1Params,
    AppellF4Params,
    Gauss2F1Params,
    Hyp3F2Params,
    KdFParams,
    appell_f1,
    appell_f4,
    hyp2f1,
    hyp3f2,
    kdf_f210,
    KDF_X_RADIUS,
    KDF_Y_RADIUS,
    SERIES_RADIUS,
)
from .numkernel import (
    DEFAULT_CTX,
    NumValue,
    PrecisionContext,
    Scalar,
    gamma,
    kallen,
    quad_de,
    sum_series,
    to_mpfr,
    working_precision,
)

# method tokens
F1_FORM = "F1_FORM"
F4_FORM = "F4_FORM"
KDF_FORM = "KDF_FORM"
EQUAL_MASS_3F2 = "EQUAL_MASS_3F2"
QUADRATURE = "QUADRATURE"
I2_METHODS = (F1_FORM, F4_FORM, KDF_FORM, EQUAL_MASS_3F2, QUADRATURE)

F1_FORMULA = "F1_FORMULA"
RECURRENCE = "RECURRENCE"
I3_METHODS = (F1_FORMULA, RECURRENCE, QUADRATURE)

SERIES_2F1 = "SERIES_2F1"
IMJ3_METHODS = (SERIES_2F1, QUADRATURE)

MASSIVE_ZERO_MOMENTUM = "MASSIVE_ZERO_MOMENTUM"
MASSLESS = "MASSLESS"

_CONSTRUCT_TOL = 1e-9
#: recurrence-sum controls: required late-shell ratio and shell cap
RECURRENCE_RATIO = 0.9
RECURRENCE_MAX_SHELLS = 2000


def _near_nonpos_int(v: float, tol: float = _CONSTRUCT_TOL) -> bool:
    n = round(v)
    return n <= 0 and abs(v - n) <= tol


@dataclass(frozen=True)
class BubbleKinematics:
    """Two-point kinematics: propagator powers nu1, nu2, dimension d,
    masses-squared m1sq >= 0 < m2sq, and the external invariant s12."""

    nu1: float
    nu2: float
    d: float
    m1sq: float
    m2sq: float
    s12: float

    def __post_init__(self):
        if not (self.nu1 > 0 and self.nu2 > 0):
            raise DomainError("propagator powers must be positive")
        if not (2 < self.d < 6):
            raise DomainError("dimension must lie in (2, 6)")
        if not (self.m1sq >= 0 and self.m2sq > 0):
            raise DomainError("need m1sq >= 0 and m2sq > 0")
        if _near_nonpos_int(self.nu1 + self.nu2 - self.d / 2):
            raise PoleError("nu1 + nu2 - d/2 sits on a gamma pole")
        # positivity of P(t) = s12 t^2 + t (m1sq - m2sq - s12) + m2sq on [0, 1]:
        # endpoints are m2sq > 0 and m1sq >= 0 (a vanishing m1sq endpoint is
        # allowed); any interior stationary value must be strictly positive.
        s, lin = self.s12, self.m1sq - self.m2sq - self.s12
        if s != 0:
            ts = -lin / (2 * s)
            if 0 < ts < 1 and s * ts * ts + lin * ts + self.m2sq <= 0:
                raise DomainError("Feynman polynomial not positive on (0, 1)")

    @property
    def x(self) -> float:
        return self.s12 / self.m2sq

    @property
    def y(self) -> float:
        return self.m1sq / self.m2sq

    def swapped(self) -> "BubbleKinematics":
        return replace(
            self, nu1=self.nu2, nu2=self.nu1, m1sq=self.m2sq, m2sq=self.m1sq
        )


@dataclass(frozen=True)
class VertexKinematics:
    """One-mass triangle kinematics.

    The parameter-space denominator stays positive on the open unit square
    exactly when s13 < 0 and s12 <= msq, which is what the constructor
    enforces (together with s12 != s13, needed by the recurrence
    coefficients).
    """

    msq: float
    s12: float
    s13: float
    d: float

    def __post_init__(self):
        if not self.msq > 0:
            raise DomainError("msq must be positive")
        if not (2 < self.d < 6):
            raise DomainError("dimension must lie in (2, 6)")
        if not (self.s12 <= self.msq and self.s13 <= self.msq):
            raise DomainError("need s12 <= msq and s13 <= msq")
        if self.s13 >= 0:
            raise DomainError("need s13 < 0 (positive parameter denominator)")
        if abs(self.s12 - self.s13) <= _CONSTRUCT_TOL * self.msq:
            raise DomainError("need s12 != s13")

    @property
    def sigma(self) -> float:
        return (
            self.msq * self.s13 * (self.s12 - self.s13 - self.msq)
            / (self.s12 - self.s13) ** 2
        )


@dataclass(frozen=True)
class SunriseKinematics:
    """Equal-mass two-loop self-energy above threshold: x = q/m > 3."""

    x: float
    msq: float
    d: float

    def __post_init__(self):
        if not self.x > 3:
            raise DomainError("need x = q/m > 3 (above the three-particle cut)")
        if not self.msq > 0:
            raise DomainError("msq must be positive")
        if not (2 < self.d < 6):
            raise DomainError("dimension must lie in (2, 6)")
        if _near_nonpos_int(self.d / 2) or _near_nonpos_int(self.d - 1):
            raise PoleError("d/2 or d-1 sits on a gamma pole")


# --------------------------------------------------------------------------
# bubble
# --------------------------------------------------------------------------

def _phase(nu_total: mpfr) -> int:
    """(-1)^nu for integer total power; +1 otherwise (real normalization
    for non-integer powers, where the literal phase would be complex)."""
    n = gmpy2.rint(nu_total)
    if abs(nu_total - n) <= 1e-9:
        return -1 if int(n) % 2 else 1
    return 1


def bubble_xpm(k: BubbleKinematics,
               ctx: PrecisionContext = DEFAULT_CTX) -> Tuple[mpfr, mpfr]:
    """Roots (x-, x+) factorizing the parameter polynomial:
    m2sq (1 - x- u)(1 - x+ u) = s12 u^2 + u (m1sq - m2sq - s12) + m2sq.
    """
    with working_precision(ctx):
        x = to_mpfr(k.s12) / to_mpfr(k.m2sq)
        y = to_mpfr(k.m1sq) / to_mpfr(k.m2sq)
        lam = kallen(1, x, y)
        if lam < 0:
            raise DomainError("negative discriminant: roots are complex")
        r = gmpy2.sqrt(lam)
        return (1 + x - y - r) / 2, (1 + x - y + r) / 2


def _i2_prefactor(k: BubbleKinematics, ctx: PrecisionContext) -> NumValue:
    nu = to_mpfr(k.nu1) + to_mpfr(k.nu2)
    d = to_mpfr(k.d)
    pref = gamma(nu - d / 2, ctx) / gamma(nu, ctx)
    pref = pref * NumValue.exact(to_mpfr(k.m2sq)).pow_scalar(d / 2 - nu)
    return pref * _phase(nu)


def i2(k: BubbleKinematics, method: str,
       ctx: PrecisionContext = DEFAULT_CTX) -> NumValue:
    """Two-point integral I_{nu1 nu2}^{(d)}(m1sq, m2sq; s12).

    For non-integer nu1+nu2 the overall sign factor is normalized to +1
    (all methods share the convention, so cross-method comparisons are
    unaffected).
    """
    if method not in I2_METHODS:
        raise ValueError(f"unknown i2 method {method!r}")
    with working_precision(ctx):
        nu1, nu2, d = to_mpfr(k.nu1), to_mpfr(k.nu2), to_mpfr(k.d)
        nu = nu1 + nu2
        x, y = to_mpfr(k.s12) / to_mpfr(k.m2sq), to_mpfr(k.m1sq) / to_mpfr(k.m2sq)

        if method == QUADRATURE:
            m1sq, m2sq, s12 = to_mpfr(k.m1sq), to_mpfr(k.m2sq), to_mpfr(k.s12)
            e = d / 2 - nu
            f = lambda t: (
                t ** (nu1 - 1) * (1 - t) ** (nu2 - 1)
                * (s12 * t * t + t * (m1sq - m2sq - s12) + m2sq) ** e
            )
            quad = quad_de(f, 0, 1, ctx)
            pref = gamma(nu - d / 2, ctx) / (gamma(nu1, ctx) * gamma(nu2, ctx))
            return (pref * quad * _phase(nu)).with_route(QUADRATURE)

        if method == F1_FORM:
            xm, xp = bubble_xpm(k, ctx)
            f1 = appell_f1(
                AppellF1Params(a=nu1, b=nu - d / 2, bp=nu - d / 2, c=nu),
                xm, xp, ctx,
            )
            return (_i2_prefactor(k, ctx) * f1).with_route(f"{F1_FORM}/{f1.route}")

        if method == F4_FORM:
            if gmpy2.sqrt(abs(x)) + gmpy2.sqrt(abs(y)) > SERIES_RADIUS:
                raise DomainError("F4_FORM outside the F4 series domain")
            g = lambda v: gamma(v, ctx)
            t1 = (
                g(d / 2 - nu1) * g(nu - d / 2) / (g(d / 2) * g(nu2))
                * appell_f4(AppellF4Params(a=nu1, b=nu - d / 2,
                                           c1=d / 2, c2=nu1 - d / 2 + 1),
                            x, y, ctx)
            )
            t2 = (
                NumValue.exact(y).pow_scalar(d / 2 - nu1)
                * g(nu1 - d / 2) / g(nu1)
                * appell_f4(AppellF4Params(a=nu2, b=d / 2,
                                           c1=d / 2, c2=d / 2 - nu1 + 1),
                            x, y, ctx)
            )
            pref = NumValue.exact(to_mpfr(k.m2sq)).pow_scalar(d / 2 - nu) * _phase(nu)
            return (pref * (t1 + t2)).with_route(F4_FORM)

        if method == KDF_FORM:
            if abs(x) > KDF_X_RADIUS or abs(1 - y) > KDF_Y_RADIUS:
                raise DomainError("KDF_FORM outside the KdF series domain")
            val = kdf_f210(
                KdFParams(alpha=nu - d / 2, nu1=nu1, nu2=nu2),
                x, 1 - y, ctx,
            )
            return (_i2_prefactor(k, ctx) * val).with_route(KDF_FORM)

        if method == EQUAL_MASS_3F2:
            if abs(k.m1sq - k.m2sq) > _CONSTRUCT_TOL * k.m2sq:
                raise DomainError("EQUAL_MASS_3F2 requires m1sq == m2sq")
            z = x / 4
            val = hyp3f2(
                Hyp3F2Params(a1=nu1, a2=nu2, a3=nu - d / 2,
                             b1=nu / 2, b2=(nu + 1) / 2),
                z, ctx,
            )
            return (_i2_prefactor(k, ctx) * val).with_route(EQUAL_MASS_3F2)

    raise AssertionError("unreachable")


def admissible_i2_methods(k: BubbleKinematics,
                          ctx: PrecisionContext = DEFAULT_CTX) -> List[str]:
    """Methods whose preconditions hold at this kinematic point."""
    out = [QUADRATURE]
    with working_precision(ctx):
        x, y = to_mpfr(k.s12) / to_mpfr(k.m2sq), to_mpfr(k.m1sq) / to_mpfr(k.m2sq)
        d, nu1 = to_mpfr(k.d), to_mpfr(k.nu1)
        nu = nu1 + to_mpfr(k.nu2)
        if kallen(1, x, y) >= 0:
            xm, xp = bubble_xpm(k, ctx)
            if max(abs(xm), abs(xp)) <= SERIES_RADIUS or (xm < 1 and xp < 1):
                out.append(F1_FORM)
        tol = 0.05
        def pole_free(v) -> bool:
            n = gmpy2.rint(v)
            return not (n <= 0 and abs(v - n) <= tol)
        if (
            gmpy2.sqrt(abs(x)) + gmpy2.sqrt(abs(y)) <= SERIES_RADIUS
            and y > 0
            and pole_free(d / 2 - nu1) and pole_free(nu1 - d / 2)
            and pole_free(nu1 - d / 2 + 1) and pole_free(d / 2 - nu1 + 1)
        ):
            out.append(F4_FORM)
        if abs(x) <= KDF_X_RADIUS and abs(1 - y) <= KDF_Y_RADIUS:
            out.append(KDF_FORM)
        if abs(k.m1sq - k.m2sq) <= _CONSTRUCT_TOL * k.m2sq and abs(x / 4) <= SERIES_RADIUS:
            out.append(EQUAL_MASS_3F2)
    return out


def i2_bubble_closed(msq: Scalar, d: Scalar, variant: str, s: Scalar,
                     ctx: PrecisionContext = DEFAULT_CTX) -> NumValue:
    """Closed forms of the unit-power bubble used by the vertex machinery.

    MASSIVE_ZERO_MOMENTUM: I_{11}(0, msq; 0) = Gamma(2-d/2) msq^(d/2-2) / (d/2-1)
    MASSLESS:              I_{11}(0, 0; s)  = Gamma(2-d/2) Gamma(d/2-1)^2
                                              / Gamma(d-2) * (-s)^(d/2-2),  s < 0
    """
    with working_precision(ctx):
        dv = to_mpfr(d)
        if variant == MASSIVE_ZERO_MOMENTUM:
            msqv = to_mpfr(msq)
            if not msqv > 0:
                raise DomainError("msq must be positive")
            g = gamma(2 - dv / 2, ctx)  # PoleError at even d, in particular d=4
            return (
                g * NumValue.exact(msqv).pow_scalar(dv / 2 - 2) / ((dv - 2) / 2)
            ).with_route(variant)
        if variant == MASSLESS:
            sv = to_mpfr(s)
            if not sv < 0:
                raise DomainError("massless bubble needs s < 0")
            g = (
                gamma(2 - dv / 2, ctx) * gamma(dv / 2 - 1, ctx) ** 2
                / gamma(dv - 2, ctx)
            )
            return (g * NumValue.exact(-sv).pow_scalar(dv / 2 - 2)).with_route(variant)
        raise ValueError(f"unknown bubble variant {variant!r}")


def _i11_massive(msq: mpfr, s: mpfr, d: mpfr, ctx: PrecisionContext) -> NumValue:
    """I_{11}^{(d)}(0, msq; s) assembled from the zero-momentum closed form
    and a Gauss factor: I_{11}(0, msq; 0) * 2F1(1, 2-d/2; d/2; s/msq)."""
    base = i2_bubble_closed(msq, d, MASSIVE_ZERO_MOMENTUM, 0, ctx)
    fac = hyp2f1(Gauss2F1Params(a=1, b=2 - d / 2, c=d / 2), s / msq, ctx)
    return base * fac


# --------------------------------------------------------------------------
# vertex
# --------------------------------------------------------------------------

def _i3_quadrature(k: VertexKinematics, ctx: PrecisionContext) -> NumValue:
    msq, s12, s13 = to_mpfr(k.msq), to_mpfr(k.s12), to_mpfr(k.s13)
    d = to_mpfr(k.d)
    g3 = gamma(3 - d / 2, ctx)
    e_num = d / 2 - 2
    e_den = d / 2 - 3
    inner_ctx = ctx.bump(6)

    def outer(x1: mpfr) -> mpfr:
        def f2(x2: mpfr) -> mpfr:
            den = s13 * x1 - s13 + x2 * (msq + s13 - s12 - x1 * s13 + x1 * s12)
            return x1 ** e_num * den ** e_den

        return quad_de(f2, 0, 1, inner_ctx).value

    quad = quad_de(outer, 0, 1, ctx)
    return (-(g3 * quad)).with_route(QUADRATURE)


def _i3_f1_formula(k: VertexKinematics, ctx: PrecisionContext) -> NumValue:
    msq = to_mpfr(k.msq)
    d = to_mpfr(k.d)
    w = (to_mpfr(k.s12) - to_mpfr(k.s13)) / msq
    y = to_mpfr(k.s12) / msq
    f1 = appell_f1(
        AppellF1Params(a=1, b=1, bp=2 - d / 2, c=d / 2),
        w, y, ctx,
    )
    t1 = i2_bubble_closed(msq, d, MASSIVE_ZERO_MOMENTUM, 0, ctx) / msq * f1
    g2 = hyp2f1(Gauss2F1Params(a=1, b=(d - 2) / 2, c=d - 2), w, ctx)
    t2 = i2_bubble_closed(msq, d, MASSLESS, k.s13, ctx) / msq * g2
    return (t1 - t2).with_route(f"{F1_FORMULA}/{f1.route}")


def _recurrence_inhomogeneity(k: VertexKinematics, dd: mpfr,
                              ctx: PrecisionContext,
                              i11_zero_momentum_scale: Scalar = 1) -> NumValue:
    """Inhomogeneous part of the dimension-shift relation, at dimension dd."""
    msq, s12, s13 = to_mpfr(k.msq), to_mpfr(k.s12), to_mpfr(k.s13)
    dm2 = dd - 2
    c1 = msq / (dm2 * (s13 - s12))
    c2 = s13 * (s12 - s13 - 2 * msq) / ((s12 - s13) ** 2 * dm2)
    c3 = (msq * s12 + msq * s13 + s12 * s13 - s12 ** 2) / ((s12 - s13) ** 2 * dm2)
    t1 = i2_bubble_closed(msq, dd, MASSIVE_ZERO_MOMENTUM, 0, ctx) * to_mpfr(i11_zero_momentum_scale)
    t2 = i2_bubble_closed(msq, dd, MASSLESS, s13, ctx)
    t3 = _i11_massive(msq, s12, dd, ctx)
    return t1 * c1 + t2 * c2 + t3 * c3


def _i3_recurrence(k: VertexKinematics, ctx: PrecisionContext) -> NumValue:
    """Downward solution of I3^{(d+2)} = (2 sigma / (d-2)) I3^{(d)} + R^{(d)}:

        I3^{(d)} = -((d-2)/(2 sigma)) * sum_k (d/2)_k sigma^(-k) R^{(d+2k)}

    with the homogeneous ("periodic") constant fixed to zero by the boundary
    condition at s12 = 0; convergence requires the late-shell ratio to stay
    below RECURRENCE_RATIO.
    """
    msq, d = to_mpfr(k.msq), to_mpfr(k.d)
    s12, s13 = to_mpfr(k.s12), to_mpfr(k.s13)
    sigma = msq * s13 * (s12 - s13 - msq) / (s12 - s13) ** 2
    acc = NumValue.exact(0)
    poch = mpfr(1)  # (d/2)_k
    sig_pow = mpfr(1)
    prev_mag: Optional[mpfr] = None
    run = 0
    tiny = ctx.tiny()
    last: Optional[NumValue] = None
    ratio_obs = mpfr(0)
    for kk in range(RECURRENCE_MAX_SHELLS):
        r = _recurrence_inhomogeneity(k, d + 2 * kk, ctx)
        term = r * (poch / sig_pow)
        acc = acc + term
        mag = abs(term.value)
        if prev_mag is not None and prev_mag > 0:
            ratio_obs = mag / prev_mag
            if kk > 10 and ratio_obs > RECURRENCE_RATIO:
                raise NonConvergence(
                    f"recurrence shell ratio {float(ratio_obs):.3f} exceeds "
                    f"{RECURRENCE_RATIO} at shell {kk}"
                )
        if mag <= tiny * max(abs(acc.value), tiny):
            run += 1
            if run >= 8:
                last = term
                break
        else:
            run = 0
        prev_mag = mag
        poch *= d / 2 + kk
        sig_pow *= sigma
    else:
        raise NonConvergence("recurrence sum did not settle within the shell cap")
    # geometric tail bound from the observed ratio
    r_obs = min(max(ratio_obs, mpfr(0)), mpfr("0.95"))
    tail = abs(last.value) * r_obs / (1 - r_obs)
    total = NumValue(acc.value, acc.abs_err + tail)
    pref = -(d - 2) / (2 * sigma)
    return (total * pref).with_route(RECURRENCE)


def i3(k: VertexKinematics, method: str,
       ctx: PrecisionContext = DEFAULT_CTX) -> NumValue:
    """One-mass vertex integral I3^{(d)}(0, msq, 0; 0, s13, s12)."""
    if method not in I3_METHODS:
        raise ValueError(f"unknown i3 method {method!r}")
    with working_precision(ctx):
        if method == QUADRATURE:
            return _i3_quadrature(k, ctx)
        if method == F1_FORMULA:
            return _i3_f1_formula(k, ctx)
        return _i3_recurrence(k, ctx)


def i3_ode_parts(k: VertexKinematics, ctx: PrecisionContext = DEFAULT_CTX,
                 i11_zero_momentum_scale: Scalar = 1,
                 h_scale: Scalar = 1) -> Tuple[NumValue, NumValue]:
    """(d/ds12 of I3 by a five-point stencil, right side of its first-order
    equation in s12).  Both sides small-residual-equal certifies the vertex
    implementation together with its bubble inputs."""
    with working_precision(ctx):
        msq, s12, s13 = to_mpfr(k.msq), to_mpfr(k.s12), to_mpfr(k.s13)
        d = to_mpfr(k.d)
        h = mpfr(10) ** (-(ctx.working_digits // 5)) * max(abs(s12), msq / 10)
        h = h * to_mpfr(h_scale)

        def at(s: mpfr) -> NumValue:
            return _i3_f1_formula(replace(k, s12=s), ctx)

        if not (
            s12 + 2 * h < msq
            and (s12 - s13) * (s12 + 2 * h - s13) > 0
            and (s12 - s13) * (s12 - 2 * h - s13) > 0
        ):
            raise DomainError("stencil leaves the admissible region")
        f_m2, f_m1 = at(s12 - 2 * h), at(s12 - h)
        f_p1, f_p2 = at(s12 + h), at(s12 + 2 * h)
        deriv = (f_m2 - f_p2 + (f_p1 - f_m1) * 8) / (12 * h)

        i3v = at(s12)
        scale = to_mpfr(i11_zero_momentum_scale)
        rhs = (
            ((d - 2) * (s13 - s12 + 2 * msq) - 2 * msq)
            / (2 * (msq + s13 - s12) * (s13 - s12)) * i3v
            + (d - 3) * (msq + s13 - 2 * s12)
            / ((msq - s12) * (msq + s13 - s12) * (s12 - s13))
            * _i11_massive(msq, s12, d, ctx)
            + (d - 2) / (2 * (msq - s12) * (msq + s13 - s12))
            * i2_bubble_closed(msq, d, MASSIVE_ZERO_MOMENTUM, 0, ctx) * scale
            - (d - 3) / ((msq + s13 - s12) * (s12 - s13))
            * i2_bubble_closed(msq, d, MASSLESS, s13, ctx)
        )
        return deriv, rhs


def i3_ode_residual(k: VertexKinematics, ctx: PrecisionContext = DEFAULT_CTX,
                    i11_zero_momentum_scale: Scalar = 1,
                    h_scale: Scalar = 1) -> NumValue:
    """Absolute residual |d I3/d s12 - rhs| of the s12 differential equation."""
    deriv, rhs = i3_ode_parts(k, ctx, i11_zero_momentum_scale, h_scale)
    with working_precision(ctx):
        return abs(deriv - rhs)


# --------------------------------------------------------------------------
# sunrise imaginary part
# --------------------------------------------------------------------------

def sunrise_2f1_argument(x: Scalar) -> mpfr:
    """Degree-six rational argument of the cut 2F1 form:
    x^2 (x^2 - 9)^2 / (x^2 + 3)^3.

    (Note 1 - Z = 27 (x^2-1)^2 / (x^2+3)^3, so Z < 1 for all x > 3.)
    """
    xv = to_mpfr(x)
    return xv ** 2 * (xv ** 2 - 9) ** 2 / (xv ** 2 + 3) ** 3


def _im_j3_series(x: mpfr, msq: mpfr, d: mpfr, ctx: PrecisionContext) -> NumValue:
    pref = (
        NumValue.exact(-4 * gmpy2.const_pi() ** 2 * gmpy2.sqrt(mpfr(3)))
        / gamma(d - 1, ctx)
        / (x ** 2 + 3)
        * NumValue.exact(msq).pow_scalar(d - 3)
        * NumValue.exact((x ** 2 - 9) ** 2 / 27).pow_scalar((d - 2) / 2)
    )
    third = to_mpfr(1) / 3
    g = hyp2f1(
        Gauss2F1Params(a=third, b=2 * third, c=d / 2),
        sunrise_2f1_argument(x), ctx,
    )
    return pref * g


def im_j3(k: SunriseKinematics, method: str,
          ctx: PrecisionContext = DEFAULT_CTX) -> NumValue:
    """Imaginary part of the equal-mass two-loop self-energy master integral
    above its three-particle threshold (negative with these conventions)."""
    if method not in IMJ3_METHODS:
        raise ValueError(f"unknown im_j3 method {method!r}")
    with working_precision(ctx):
        x, msq, d = to_mpfr(k.x), to_mpfr(k.msq), to_mpfr(k.d)
        if method == SERIES_2F1:
            return _im_j3_series(x, msq, d, ctx).with_route(SERIES_2F1)

        if not d > 1:
            raise DomainError("cut integral needs d > 1")
        m = gmpy2.sqrt(msq)
        q = x * m
        rho = (q + m) * (q - 3 * m) / ((q - m) * (q + 3 * m))
        kap = (q + m) * (q - 3 * m) / (4 * msq)
        e = (d - 3) / 2
        pref = (
            NumValue.exact(-gmpy2.const_pi())
            * NumValue.exact(q * q).pow_scalar(1 - d / 2)
            * (gamma((d - 2) / 2, ctx) / gamma(d - 2, ctx)) ** 2
            * ((q - 3 * m) * (q + m) / (2 * m))
            * NumValue.exact(
                (q - m) * (q + 3 * m) * (q + m) ** 2 * (q - 3 * m) ** 2
            ).pow_scalar(e)
        )
        f = lambda b: (b * (1 - b) * (1 - rho * b)) ** e / gmpy2.sqrt(1 + kap * b)
        quad = quad_de(f, 0, 1, ctx)
        return (pref * quad).with_route(QUADRATURE)


def im_j3_at_dimension(x: Scalar, msq: Scalar, d: Scalar,
                       ctx: PrecisionContext = DEFAULT_CTX) -> NumValue:
    """Closed-form Im J3 at an arbitrary dimension d > 2 (no upper cap),
    for dimension-shift residual checks at d, d+2, d+4."""
    with working_precision(ctx):
        return _im_j3_series(to_mpfr(x), to_mpfr(msq), to_mpfr(d), ctx)


def sunrise_diffeq_parts(k: SunriseKinematics,
                         ctx: PrecisionContext = DEFAULT_CTX
                         ) -> Tuple[NumValue, NumValue]:
    """(lhs, rhs) of the third-order dimension-shift relation

        12 x^2 (d+1)(d-1)(3d+4)(3d+2) ImJ3^{(d+4)}
          = 4 m^4 (x^2-3)(x^4-42x^2+9)(d-1) d ImJ3^{(d+2)}
          + 4 m^8 (x^2-1)^2 (x^2-9)^2 ImJ3^{(d)}
    """
    with working_precision(ctx):
        x, msq, d = to_mpfr(k.x), to_mpfr(k.msq), to_mpfr(k.d)
        lhs = (
            im_j3_at_dimension(x, msq, d + 4, ctx)
            * (12 * x ** 2 * (d + 1) * (d - 1) * (3 * d + 4) * (3 * d + 2))
        )
        rhs = (
            im_j3_at_dimension(x, msq, d + 2, ctx)
            * (4 * msq ** 2 * (x ** 2 - 3) * (x ** 4 - 42 * x ** 2 + 9) * (d - 1) * d)
            + im_j3_at_dimension(x, msq, d, ctx)
            * (4 * msq ** 4 * (x ** 2 - 1) ** 2 * (x ** 2 - 9) ** 2)
        )
        return lhs, rhs
