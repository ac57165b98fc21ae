"""Arbitrary-precision numeric substrate.

Everything here is built on MPFR reals (via gmpy2), whose rounding context
is thread-local, so all operations are safe to run concurrently.  The public
operations take an explicit :class:`PrecisionContext` and never leak a
modified precision back to the caller.

Values travel as :class:`NumValue`: an MPFR scalar together with a
conservative absolute-error bound that the arithmetic helpers propagate.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Optional, Tuple, Union

import gmpy2
from gmpy2 import mpfr

from .errors import DomainError, NonConvergence, PoleError, QuadFailure

Scalar = Union[int, float, str, Fraction, mpfr]

_BITS_PER_DIGIT = math.log2(10.0)

#: consecutive negligible terms/shells required before a series is accepted
SERIES_STOP_RUN = 8


def bits_for_digits(digits: int) -> int:
    return int(math.ceil(digits * _BITS_PER_DIGIT)) + 16


@dataclass(frozen=True)
class PrecisionContext:
    """Precision request threaded through every evaluation.

    ``target_digits`` is what the caller wants; ``working_digits`` is the
    internal precision (at least 20 guard digits more); ``max_terms`` caps
    series shells and ``max_quad_level`` caps quadrature refinement.
    """

    target_digits: int
    working_digits: int
    max_terms: int = 100_000
    max_quad_level: int = 12

    def __post_init__(self):
        if self.target_digits < 1:
            raise ValueError("target_digits must be positive")
        if self.working_digits < self.target_digits + 20:
            raise ValueError("working_digits must be >= target_digits + 20")
        if self.max_terms < 1000:
            raise ValueError("max_terms must be >= 1000")
        if self.max_quad_level < 8:
            raise ValueError("max_quad_level must be >= 8")

    @classmethod
    def for_digits(cls, target: int, **kw) -> "PrecisionContext":
        """Standard context: target plus max(20, target/10) guard digits."""
        working = target + max(20, target // 10)
        return cls(target_digits=target, working_digits=working, **kw)

    def bump(self, extra: int) -> "PrecisionContext":
        """Same policy, ``extra`` more target digits."""
        return PrecisionContext.for_digits(
            self.target_digits + extra,
            max_terms=self.max_terms,
            max_quad_level=self.max_quad_level,
        )

    @property
    def wp_bits(self) -> int:
        return bits_for_digits(self.working_digits)

    def pole_tol(self) -> mpfr:
        """Distance below which a gamma argument counts as sitting on a pole."""
        return mpfr(10) ** (-(self.working_digits - 5))

    def tiny(self) -> mpfr:
        return mpfr(10) ** (-self.working_digits)


DEFAULT_CTX = PrecisionContext.for_digits(50)


@contextmanager
def working_precision(ctx: PrecisionContext) -> Iterator[None]:
    gctx = gmpy2.get_context()
    saved = gctx.precision
    gctx.precision = ctx.wp_bits
    try:
        yield
    finally:
        gctx.precision = saved


def to_mpfr(x: Scalar) -> mpfr:
    """Convert at the current thread precision; strings parse as decimal."""
    if isinstance(x, Fraction):
        return mpfr(x.numerator) / mpfr(x.denominator)
    return mpfr(x)


def _ulp_bound(x: mpfr) -> mpfr:
    # 4 ulp of |x| at the active precision; cheap, always an overestimate
    return abs(x) * gmpy2.exp2(-(gmpy2.get_context().precision - 2))


def is_near_nonpositive_int(z: mpfr, tol: mpfr) -> bool:
    if z > 0.5:
        return False
    n = gmpy2.rint(z)
    return n <= 0 and abs(z - n) <= tol


@dataclass(frozen=True)
class NumValue:
    """An MPFR real plus a conservative absolute-error bound.

    ``route`` optionally records which evaluation path produced the value
    (diagnostic only; ignored by comparisons).
    """

    value: mpfr
    abs_err: mpfr
    route: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        if gmpy2.is_nan(self.value) or gmpy2.is_nan(self.abs_err):
            raise DomainError("NumValue got NaN")
        if self.abs_err < 0:
            raise ValueError("abs_err must be nonnegative")

    # -- constructors ------------------------------------------------------
    @classmethod
    def exact(cls, x: Scalar, route: Optional[str] = None) -> "NumValue":
        v = to_mpfr(x)
        return cls(v, _ulp_bound(v), route)

    # -- arithmetic with conservative error propagation ---------------------
    @staticmethod
    def _coerce(other) -> "NumValue":
        if isinstance(other, NumValue):
            return other
        return NumValue.exact(other)

    def with_route(self, route: str) -> "NumValue":
        return NumValue(self.value, self.abs_err, route)

    def __neg__(self) -> "NumValue":
        return NumValue(-self.value, self.abs_err, self.route)

    def __abs__(self) -> "NumValue":
        return NumValue(abs(self.value), self.abs_err, self.route)

    def __add__(self, other) -> "NumValue":
        o = self._coerce(other)
        v = self.value + o.value
        return NumValue(v, self.abs_err + o.abs_err + _ulp_bound(v))

    __radd__ = __add__

    def __sub__(self, other) -> "NumValue":
        o = self._coerce(other)
        v = self.value - o.value
        return NumValue(v, self.abs_err + o.abs_err + _ulp_bound(v))

    def __rsub__(self, other) -> "NumValue":
        return self._coerce(other).__sub__(self)

    def __mul__(self, other) -> "NumValue":
        o = self._coerce(other)
        v = self.value * o.value
        err = (
            abs(self.value) * o.abs_err
            + abs(o.value) * self.abs_err
            + self.abs_err * o.abs_err
            + _ulp_bound(v)
        )
        return NumValue(v, err)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "NumValue":
        o = self._coerce(other)
        denom = abs(o.value)
        if denom <= 2 * o.abs_err:
            raise DomainError("division by a value not separated from zero")
        v = self.value / o.value
        err = (self.abs_err + abs(v) * o.abs_err) / (denom - o.abs_err)
        return NumValue(v, err + _ulp_bound(v))

    def __rtruediv__(self, other) -> "NumValue":
        return self._coerce(other).__truediv__(self)

    def __pow__(self, n: int) -> "NumValue":
        if not isinstance(n, int) or n < 0:
            raise TypeError("NumValue ** works for nonnegative integers only")
        out = NumValue.exact(1)
        for _ in range(n):
            out = out * self
        return out

    def pow_scalar(self, p: Scalar) -> "NumValue":
        """self**p for real p; requires a positive base (or zero with p>0)."""
        p = to_mpfr(p)
        if self.value < 0:
            raise DomainError("negative base under a real power")
        if self.value == 0:
            if p > 0:
                return NumValue(mpfr(0), mpfr(0))
            raise DomainError("zero base with nonpositive exponent")
        v = self.value ** p
        # d(x^p) = p x^(p-1) dx
        err = abs(p) * abs(self.value) ** (p - 1) * self.abs_err + _ulp_bound(v)
        return NumValue(v, err)

    def rel_err(self) -> mpfr:
        m = max(abs(self.value), mpfr(10) ** (-gmpy2.get_context().precision))
        return self.abs_err / m

    def __repr__(self):  # pragma: no cover - debug aid
        return f"NumValue({self.value!r}, err={self.abs_err!r}, route={self.route!r})"


def format_mpfr(x: mpfr, digits: int) -> str:
    """Scientific-notation decimal string with ``digits`` significant digits.

    Deterministic (MPFR correctly-rounded digit extraction), used for all
    report serialization.
    """
    if gmpy2.is_nan(x):
        return "nan"
    if x == 0:
        return "0." + "0" * (digits - 1) + "e+00"
    mant, exp, _ = x.digits(10, digits)
    sign = "-" if mant.startswith("-") else ""
    mant = mant.lstrip("-")
    e = exp - 1
    return f"{sign}{mant[0]}.{mant[1:]}e{e:+03d}"


# --------------------------------------------------------------------------
# gamma family
# --------------------------------------------------------------------------

def gamma(z: Scalar, ctx: PrecisionContext = DEFAULT_CTX) -> NumValue:
    """Gamma function with a relative error bound of a few ulp.

    Raises :class:`PoleError` within ``10^(-working+5)`` of a non-positive
    integer; callers must route around poles.
    """
    with working_precision(ctx):
        zv = to_mpfr(z)
        if is_near_nonpositive_int(zv, ctx.pole_tol()):
            raise PoleError(f"gamma pole at z={zv}")
        v = gmpy2.gamma(zv)
        if gmpy2.is_nan(v) or gmpy2.is_infinite(v):
            raise PoleError(f"gamma not finite at z={zv}")
        return NumValue(v, _ulp_bound(v))


def rgamma(z: Scalar, ctx: PrecisionContext = DEFAULT_CTX) -> NumValue:
    """1/gamma(z); returns exactly 0 on (near-)non-positive integers."""
    with working_precision(ctx):
        zv = to_mpfr(z)
        if is_near_nonpositive_int(zv, ctx.pole_tol()):
            return NumValue(mpfr(0), mpfr(0))
        v = 1 / gmpy2.gamma(zv)
        return NumValue(v, _ulp_bound(v) * 2)


def pochhammer(a: Scalar, k: int, ctx: PrecisionContext = DEFAULT_CTX) -> NumValue:
    """Rising factorial (a)_k by the explicit product.

    The product form stays defined for non-positive integer ``a`` (where the
    gamma-ratio form breaks down) and makes the recurrence
    ``poch(a, k+1) == poch(a, k) * (a + k)`` hold bit-exactly.
    """
    if k < 0 or k != int(k):
        raise ValueError("k must be a nonnegative integer")
    with working_precision(ctx):
        av = to_mpfr(a)
        acc = mpfr(1)
        for j in range(int(k)):
            acc = acc * (av + j)
        return NumValue(acc, abs(acc) * (k + 1) * gmpy2.exp2(-(ctx.wp_bits - 2)))


def kallen(x: Scalar, y: Scalar, z: Scalar,
           ctx: Optional[PrecisionContext] = None) -> mpfr:
    """Triangle polynomial (x - y - z)^2 - 4 y z.

    Computed at the context working precision when one is given, otherwise at
    the caller's active precision.
    """
    if ctx is None:
        xv, yv, zv = to_mpfr(x), to_mpfr(y), to_mpfr(z)
        return (xv - yv - zv) ** 2 - 4 * yv * zv
    with working_precision(ctx):
        xv, yv, zv = to_mpfr(x), to_mpfr(y), to_mpfr(z)
        return (xv - yv - zv) ** 2 - 4 * yv * zv


# --------------------------------------------------------------------------
# series summation driver
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SeriesResult:
    value: NumValue
    terms_used: int
    converged: bool


def sum_series(
    term_generator: Union[Callable[[int], Scalar], Iterable[Scalar]],
    ctx: PrecisionContext = DEFAULT_CTX,
) -> SeriesResult:
    """Sum terms (or diagonal-shell sums) with the 8-in-a-row stopping rule.

    Stops once :data:`SERIES_STOP_RUN` consecutive terms each satisfy
    ``|term| <= 10^(-working) * |partial|``; the error bound is the sum of
    those last terms plus accumulated rounding.  On hitting ``max_terms`` the
    partial sum is still returned, flagged ``converged=False``; callers that
    need a hard failure raise :class:`NonConvergence` from that flag.
    """
    with working_precision(ctx):
        if callable(term_generator):
            gen: Iterator[Scalar] = (term_generator(i) for i in range(ctx.max_terms))
        else:
            gen = iter(term_generator)
        eps = ctx.tiny()
        partial = mpfr(0)
        abs_sum = mpfr(0)
        recent: list = []
        run = 0
        used = 0
        converged = False
        for i in range(ctx.max_terms):
            try:
                t = to_mpfr(next(gen))
            except StopIteration:
                # an exhausted finite series is summed exactly
                converged = True
                break
            if gmpy2.is_nan(t):
                raise DomainError("series term is not a real number")
            partial += t
            abs_sum += abs(t)
            used = i + 1
            recent.append(abs(t))
            if len(recent) > SERIES_STOP_RUN:
                recent.pop(0)
            if abs(t) <= eps * abs(partial):
                run += 1
                if run >= SERIES_STOP_RUN:
                    converged = True
                    break
            else:
                run = 0
        tail = mpfr(sum(recent)) if recent else mpfr(0)
        rounding = abs_sum * used * gmpy2.exp2(-(ctx.wp_bits - 2))
        return SeriesResult(NumValue(partial, tail + rounding), used, converged)


def require_converged(res: SeriesResult, what: str) -> NumValue:
    if not res.converged:
        raise NonConvergence(
            f"{what}: stopping rule did not fire within {res.terms_used} terms",
            result=res,
        )
    return res.value


# --------------------------------------------------------------------------
# double-exponential (tanh-sinh) quadrature
# --------------------------------------------------------------------------

def quad_de(
    integrand: Callable[[mpfr], Scalar],
    lower: Scalar,
    upper: Scalar,
    ctx: PrecisionContext = DEFAULT_CTX,
) -> NumValue:
    """Tanh-sinh quadrature on a finite interval.

    Trapezoid sums of the double-exponentially transformed integrand at
    doubling refinement levels; returns once two successive levels agree to
    ``10^(-target-5)`` relative, with ``abs_err = |last - previous|``.
    Endpoint singularities with exponent > -1 are handled by construction.

    Near an endpoint the abscissa ``x`` can no longer represent its tiny
    offset, so quantities like ``1 - x`` inside the integrand cancel; when
    the level-to-level error stalls above tolerance on that noise floor, the
    whole scan restarts at escalated internal precision (up to three
    attempts) before giving up.
    """
    attempts = 3
    for attempt in range(attempts):
        scale_digits = ctx.working_digits * (1 + attempt)
        sub = PrecisionContext(
            target_digits=ctx.target_digits,
            working_digits=scale_digits,
            max_terms=ctx.max_terms,
            max_quad_level=ctx.max_quad_level,
        )
        try:
            return _quad_de_once(integrand, lower, upper, ctx, sub)
        except _QuadStall:
            continue
    raise QuadFailure(
        f"no two successive levels agreed to 1e-{ctx.target_digits + 5} "
        f"within {ctx.max_quad_level} refinements at up to "
        f"{attempts}x working precision"
    )


class _QuadStall(Exception):
    pass


def _quad_de_once(integrand, lower, upper, ctx: PrecisionContext,
                  sub: PrecisionContext) -> NumValue:
    with working_precision(sub):
        a = to_mpfr(lower)
        b = to_mpfr(upper)
        if not a < b:
            raise DomainError("quad_de requires lower < upper")
        half = (b - a) / 2
        mid = (a + b) / 2
        pi_half = gmpy2.const_pi() / 2
        tol = mpfr(10) ** (-(ctx.target_digits + 5))
        cutoff = mpfr(10) ** (-(sub.working_digits + 10))
        floor = ctx.tiny()

        def feval(x: mpfr) -> mpfr:
            v = integrand(x)
            fv = v.value if isinstance(v, NumValue) else to_mpfr(v)
            if gmpy2.is_nan(fv) or gmpy2.is_infinite(fv):
                raise DomainError(f"integrand non-real/non-finite at x={x}")
            return fv

        def node(t: mpfr) -> Tuple[mpfr, mpfr]:
            # offset from an endpoint: 1 - tanh((pi/2) sinh t), via exp(-2u)
            u = pi_half * gmpy2.sinh(t)
            em = gmpy2.exp(-2 * u)
            off = 2 * em / (1 + em)
            w = pi_half * gmpy2.cosh(t) * 4 * em / (1 + em) ** 2
            return off, w

        h = mpfr(1) / 4
        node_sum = mpfr(0)
        prev = None
        prev_err = None
        stalls = 0
        for level in range(ctx.max_quad_level + 1):
            acc = mpfr(0)
            if level == 0:
                _, w0 = node(mpfr(0))
                acc += w0 * feval(mid)
            j = 1
            step = 1 if level == 0 else 2
            # the two half-lines truncate independently: a singular endpoint
            # needs its tail summed deeper than the opposite (regular) one
            left_small = right_small = 0
            while left_small < 2 or right_small < 2:
                off, w = node(j * h)
                if w == 0:
                    break
                scale = max(mpfr(1), abs(node_sum + acc))
                if left_small < 2:
                    xl = a + half * off
                    if xl == a:  # offset below 1 ulp: tail exhausted
                        left_small = 2
                    else:
                        cl = w * feval(xl)
                        acc += cl
                        if j > 3:
                            left_small = left_small + 1 if abs(cl) < cutoff * scale else 0
                if right_small < 2:
                    xr = b - half * off
                    if xr == b:
                        right_small = 2
                    else:
                        cr = w * feval(xr)
                        acc += cr
                        if j > 3:
                            right_small = right_small + 1 if abs(cr) < cutoff * scale else 0
                if j > 2_000_000:
                    raise QuadFailure("tanh-sinh tail did not truncate")
                j += step
            node_sum += acc
            cur = node_sum * h * half
            if prev is not None:
                err = abs(cur - prev)
                if err <= tol * max(abs(cur), floor):
                    rounding = abs(cur) * gmpy2.exp2(-(sub.wp_bits - 6))
                    return NumValue(cur, err + rounding, route=f"tanh-sinh L{level}")
                # stalled on a noise floor: halving h no longer shrinks the
                # difference, so more levels cannot reach tolerance
                if prev_err is not None and level >= 3 and err * 4 > prev_err:
                    stalls += 1
                    if stalls >= 2:
                        raise _QuadStall()
                else:
                    stalls = 0
                prev_err = err
            prev = cur
            h = h / 2
        raise _QuadStall()
