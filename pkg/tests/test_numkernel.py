import random
from fractions import Fraction

import gmpy2
import pytest
from gmpy2 import mpfr

from feynhyp.errors import DomainError, NonConvergence, PoleError, QuadFailure
from feynhyp.numkernel import (
    NumValue,
    PrecisionContext,
    gamma,
    kallen,
    pochhammer,
    quad_de,
    require_converged,
    sum_series,
    to_mpfr,
    working_precision,
)

from conftest import assert_close

SQRT_PI = "1.77245385090551602729816748334114518279754946"
E_CONST = "2.71828182845904523536028747135266249775724709"
# one-fold integral of ((1-u)(1-u/3))^(d/2-2) / (1 - u/4) at d = 5, which the
# brute-force double series puts at (2/(d-2)) * 1.03473112774831568613026...
ONEFOLD_5 = "0.68982075183221045742017444678945967868897869"


class TestPrecisionContext:
    def test_for_digits_guard_band(self):
        ctx = PrecisionContext.for_digits(30)
        assert ctx.working_digits == 50
        ctx = PrecisionContext.for_digits(600)
        assert ctx.working_digits == 660

    @pytest.mark.parametrize(
        "kw",
        [
            dict(target_digits=0, working_digits=40),
            dict(target_digits=30, working_digits=40),
            dict(target_digits=30, working_digits=55, max_terms=10),
            dict(target_digits=30, working_digits=55, max_quad_level=2),
        ],
    )
    def test_validation(self, kw):
        with pytest.raises(ValueError):
            PrecisionContext(**kw)


class TestGamma:
    def test_known_values(self, ctx30):
        assert_close(gamma(1, ctx30), 1, ctx30, label="gamma(1)")
        assert_close(gamma(5, ctx30), 24, ctx30, label="gamma(5)")
        assert_close(gamma(Fraction(1, 2), ctx30), SQRT_PI, ctx30, label="gamma(1/2)")

    def test_pole(self, ctx30):
        for z in (0, -1, -7, -2 + 1e-40):
            with pytest.raises(PoleError):
                gamma(z, ctx30)

    def test_recurrence_property(self, ctx30):
        rng = random.Random(7)
        with working_precision(ctx30):
            tol = mpfr(10) ** (-(ctx30.working_digits - 8))
            for _ in range(100):
                z = to_mpfr(rng.uniform(0.1, 20.0))
                lhs = gamma(z + 1, ctx30).value
                rhs = z * gamma(z, ctx30).value
                assert abs(lhs - rhs) <= tol * abs(lhs)

    def test_error_bound(self, ctx30):
        with working_precision(ctx30):
            for z in ("0.37", "3.9", "17.2"):
                g = gamma(z, ctx30)
                assert g.abs_err <= mpfr(10) ** (-(ctx30.working_digits - 5)) * abs(g.value)


class TestPochhammer:
    def test_values(self, ctx30):
        assert pochhammer(3.7, 0, ctx30).value == 1
        assert_close(pochhammer(2, 3, ctx30), 24, ctx30, label="(2)_3")
        assert_close(pochhammer(Fraction(1, 2), 2, ctx30), Fraction(3, 4), ctx30)

    def test_nonpositive_integer_base(self, ctx30):
        # product form stays defined and hits an exact zero
        assert pochhammer(-3, 5, ctx30).value == 0
        assert_close(pochhammer(-3, 3, ctx30), -6, ctx30, label="(-3)_3")

    def test_recurrence_bit_exact(self, ctx30):
        with working_precision(ctx30):
            for a in ("0.3", "-2.7", "5.5"):
                av = to_mpfr(a)
                for k in range(0, 12):
                    left = pochhammer(a, k + 1, ctx30).value
                    right = pochhammer(a, k, ctx30).value * (av + k)
                    assert left == right


class TestKallen:
    def test_special_cases(self, ctx30):
        with working_precision(ctx30):
            y = to_mpfr("0.37")
            assert kallen(1, 0, y) == (1 - y) ** 2
            assert kallen(1, 1, 1) == -3

    def test_symmetry_and_expansion(self, ctx30):
        rng = random.Random(3)
        with working_precision(ctx30):
            for _ in range(25):
                x = to_mpfr(rng.uniform(-2, 2))
                y = to_mpfr(rng.uniform(-2, 2))
                assert kallen(1, x, y) == kallen(1, y, x)
                # bit-identical to the directly expanded polynomial
                assert kallen(1, x, y) == (1 - x - y) ** 2 - 4 * x * y


class TestSumSeries:
    def test_geometric(self, ctx30):
        res = sum_series(lambda k: mpfr(1) / 2 ** k, ctx30)
        assert res.converged
        assert_close(res.value, 2, ctx30, label="geometric")

    def test_exponential(self, ctx30):
        def term(k, acc=[mpfr(1)]):
            t = acc[0]
            acc[0] = t / (k + 1)
            return t

        with working_precision(ctx30):
            res = sum_series(term, ctx30)
        assert res.converged
        assert_close(res.value, E_CONST, ctx30, label="e")

    def test_divergent_returns_unconverged(self):
        ctx = PrecisionContext(10, 35, max_terms=1000)
        res = sum_series(lambda k: mpfr(1), ctx)
        assert not res.converged
        assert res.terms_used == ctx.max_terms
        with pytest.raises(NonConvergence):
            require_converged(res, "constant series")

    def test_error_bound_soundness(self, ctx30):
        with working_precision(ctx30):
            res = sum_series(lambda k: mpfr(1) / 3 ** k, ctx30)
            truth = to_mpfr(Fraction(3, 2))
            assert abs(res.value.value - truth) <= 10 * res.value.abs_err


class TestQuadDE:
    def test_constant(self, ctx30):
        v = quad_de(lambda x: 1, 0, 1, ctx30)
        assert_close(v, 1, ctx30, label="int 1")

    def test_endpoint_singularity(self, ctx30):
        v = quad_de(lambda x: x ** mpfr("-0.5"), 0, 1, ctx30)
        assert_close(v, 2, ctx30, label="int x^-1/2")

    def test_onefold_matches_double_series(self, ctx30):
        # oracle: brute-force F1 double series, frozen above at d=5, x=1/4,
        # y=1/3 (value = (2/(d-2)) * series)
        with working_precision(ctx30):
            d = to_mpfr(5)
            x = to_mpfr(Fraction(1, 4))
            y = to_mpfr(Fraction(1, 3))
            f = lambda u: ((1 - u) * (1 - y * u)) ** (d / 2 - 2) / (1 - x * u)
            v = quad_de(f, 0, 1, ctx30)
        assert_close(v, ONEFOLD_5, ctx30, label="one-fold vs double series")

    def test_affine_invariance(self, ctx30):
        with working_precision(ctx30):
            a, b = to_mpfr(-2), to_mpfr(3)
            base = quad_de(lambda x: gmpy2.exp(-x * x), 0, 1, ctx30)
            # same integral pulled back from [a, b]
            width = b - a
            pulled = quad_de(
                lambda t: gmpy2.exp(-(((t - a) / width) ** 2)) / width, a, b, ctx30
            )
            scale = max(abs(base.value), mpfr(1))
            assert abs(base.value - pulled.value) <= mpfr(10) ** (-ctx30.target_digits) * scale

    def test_error_bound_soundness(self, ctx30):
        with working_precision(ctx30):
            # beta integral with known value B(1/2, 1) = 2
            v = quad_de(lambda x: x ** mpfr("-0.5"), 0, 1, ctx30)
            assert abs(v.value - 2) <= 10 * max(v.abs_err, mpfr(10) ** (-ctx30.working_digits))

    def test_domain_errors(self, ctx30):
        with pytest.raises(DomainError):
            quad_de(lambda x: 1, 1, 0, ctx30)
        with pytest.raises(DomainError):
            # sqrt of a negative number is NaN in real arithmetic
            quad_de(lambda x: gmpy2.sqrt(x - mpfr(2)), 0, 1, ctx30)

    def test_quad_failure_on_level_cap(self):
        ctx = PrecisionContext(40, 70, max_quad_level=8)
        # non-integrable endpoint blows up level after level
        with pytest.raises((QuadFailure, DomainError)):
            quad_de(lambda x: 1 / x, 0, 1, ctx)


class TestNumValue:
    def test_mul_error_propagation_conservative(self, ctx30):
        with working_precision(ctx30):
            a = NumValue(to_mpfr("2.0"), to_mpfr("1e-20"))
            b = NumValue(to_mpfr("3.0"), to_mpfr("1e-21"))
            prod = a * b
            floor = abs(a.value) * b.abs_err + abs(b.value) * a.abs_err
            assert prod.abs_err >= floor

    def test_division_guard(self, ctx30):
        with working_precision(ctx30):
            num = NumValue.exact(1)
            tiny = NumValue(to_mpfr("1e-30"), to_mpfr("1e-29"))
            with pytest.raises(DomainError):
                num / tiny

    def test_pow_scalar_negative_base(self, ctx30):
        with working_precision(ctx30):
            with pytest.raises(DomainError):
                NumValue.exact(-2).pow_scalar("0.5")
