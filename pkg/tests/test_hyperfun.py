import random
from fractions import Fraction

import gmpy2
import pytest
from gmpy2 import mpfr

from feynhyp.errors import DomainError, PoleError
from feynhyp.hyperfun import (
    AppellF1Params,
    AppellF4Params,
    Gauss2F1Params,
    Hyp3F2Params,
    KdFParams,
    appell_f1,
    appell_f1_onefold,
    appell_f4,
    hyp2f1,
    hyp3f2,
    kdf_f210,
)
from feynhyp.numkernel import (
    PrecisionContext,
    gamma,
    quad_de,
    to_mpfr,
    working_precision,
)

from conftest import agree_digits, assert_close

TWO_LN_2 = "1.38629436111989061883446424291635313615100027"
# 50-term partial sum of 3F2(1/2, 1, 2; 3/4, 5/4; -1/24), frozen from the
# brute-force accumulation at doubled precision
F32_PARTIAL = "0.95757761013059040621031033756541154910707165"
# Euler-integral oracle value of 2F1(1/3, 2/3; 2; -0.7)
G2F1_QUAD = "0.937210678102190533657886684796699138307397076"
ONEFOLD_INTEGRAL_5 = "0.68982075183221045742017444678945967868897869"
# the matching F1 value itself: ((d-2)/2) * integral at d = 5
F1_VALUE_5 = "1.03473112774831568613026167018418951803346803"


class TestGauss2F1:
    def test_unit_argument_zero(self, ctx30):
        v = hyp2f1(Gauss2F1Params(0.37, 1.2, 2.9), 0, ctx30)
        assert v.value == 1

    def test_log_value(self, ctx30):
        v = hyp2f1(Gauss2F1Params(1, 1, 2), 0.5, ctx30)
        assert_close(v, TWO_LN_2, ctx30, label="2F1(1,1;2;1/2)")

    def test_euler_integral_oracle(self, ctx40):
        # independent oracle: Gamma(c)/(Gamma(b)Gamma(c-b)) * Euler integral,
        # assembled directly from quad_de (no 2F1 dispatch involved)
        with working_precision(ctx40):
            b, c = to_mpfr(Fraction(2, 3)), to_mpfr(2)
            a, z = to_mpfr(Fraction(1, 3)), to_mpfr("-0.7")
            quad = quad_de(
                lambda t: t ** (b - 1) * (1 - t) ** (c - b - 1) * (1 - z * t) ** (-a),
                0, 1, ctx40,
            )
            oracle = gamma(c, ctx40) / (gamma(b, ctx40) * gamma(c - b, ctx40)) * quad
            assert_close(oracle, G2F1_QUAD, ctx40, label="oracle regen")
            got = hyp2f1(Gauss2F1Params(a, b, c), z, ctx40)
        assert_close(got, oracle, ctx40, label="2F1 vs Euler oracle")

    @pytest.mark.parametrize("z", ["-30", "-5", "-0.9", "0.661", "0.9", "0.99"])
    def test_transformations_consistent_with_series_params(self, z, ctx30):
        # evaluation via transformations must agree with the plain series at
        # a reference point reachable both ways through a contiguous path:
        # compare against the Euler-integral assembly instead
        with working_precision(ctx30):
            a, b, c = to_mpfr("0.31"), to_mpfr("0.77"), to_mpfr("1.23")
            zv = to_mpfr(z)
            quad = quad_de(
                lambda t: t ** (b - 1) * (1 - t) ** (c - b - 1) * (1 - zv * t) ** (-a),
                0, 1, ctx30,
            )
            oracle = gamma(c, ctx30) / (gamma(b, ctx30) * gamma(c - b, ctx30)) * quad
            got = hyp2f1(Gauss2F1Params(a, b, c), zv, ctx30)
        assert_close(got, oracle, ctx30, label=f"2F1 route at z={z}")

    def test_logarithmic_degeneracy_falls_back_to_euler(self, ctx30):
        # c - a - b = 0 and a = b: every transformation is pole-blocked
        with working_precision(ctx30):
            half = to_mpfr(Fraction(1, 2))
            got = hyp2f1(Gauss2F1Params(half, half, 1), "0.77", ctx30)
            quad = quad_de(
                lambda t: t ** (half - 1) * (1 - t) ** (-half) * (1 - to_mpfr("0.77") * t) ** (-half),
                0, 1, ctx30,
            )
            oracle = gamma(1, ctx30) / (gamma(half, ctx30) ** 2) * quad
        assert_close(got, oracle, ctx30, label="log case")

    def test_terminating(self, ctx30):
        got = hyp2f1(Gauss2F1Params(-3, 0.77, 1.23), -7.5, ctx30)
        assert got.route == "terminating"
        with working_precision(ctx30):
            a, b, c, z = to_mpfr(-3), to_mpfr(0.77), to_mpfr(1.23), to_mpfr(-7.5)
            manual = 1 + a * b / c * z \
                + a * (a + 1) * b * (b + 1) / (c * (c + 1) * 2) * z ** 2 \
                + a * (a + 1) * (a + 2) * b * (b + 1) * (b + 2) / (c * (c + 1) * (c + 2) * 6) * z ** 3
            assert_close(got, manual, ctx30, label="terminating polynomial")

    def test_domain_and_pole_errors(self, ctx30):
        with pytest.raises(DomainError):
            hyp2f1(Gauss2F1Params(0.3, 0.7, 1.1), 1.0, ctx30)
        with pytest.raises(PoleError):
            hyp2f1(Gauss2F1Params(0.3, 0.7, -2), 0.4, ctx30)

    def test_contiguous_relation_in_c(self, ctx40):
        # c(c-1)(z-1) F(c-1) + c(c-1-(2c-a-b-1)z) F(c) + (c-a)(c-b) z F(c+1) = 0
        rng = random.Random(11)
        with working_precision(ctx40):
            for _ in range(6):
                a = to_mpfr(rng.uniform(0.2, 1.8))
                b = to_mpfr(rng.uniform(0.2, 1.8))
                c = to_mpfr(rng.uniform(1.2, 2.8))
                z = to_mpfr(rng.uniform(-0.8, 0.45))
                fm = hyp2f1(Gauss2F1Params(a, b, c - 1), z, ctx40).value
                f0 = hyp2f1(Gauss2F1Params(a, b, c), z, ctx40).value
                fp = hyp2f1(Gauss2F1Params(a, b, c + 1), z, ctx40).value
                resid = (
                    c * (c - 1) * (z - 1) * fm
                    + c * (c - 1 - (2 * c - a - b - 1) * z) * f0
                    + (c - a) * (c - b) * z * fp
                )
                scale = max(abs(f0), mpfr(1))
                assert abs(resid) <= mpfr(10) ** (-(ctx40.target_digits - 10)) * scale


class TestHyp3F2:
    def test_unit_at_zero(self, ctx30):
        assert hyp3f2(Hyp3F2Params(0.3, 0.7, 1.9, 1.1, 0.8), 0, ctx30).value == 1

    def test_parameter_cancellation(self, ctx30):
        got = hyp3f2(Hyp3F2Params(0.4, 1.3, 2.2, 1.7, 2.2), "0.35", ctx30)
        want = hyp2f1(Gauss2F1Params(0.4, 1.3, 1.7), "0.35", ctx30)
        assert_close(got, want, ctx30, label="3F2 a3=b2 collapse")

    def test_partial_sum_oracle(self, ctx30):
        # the full series agrees with the frozen 50-term brute-force partial
        # sum to far better than the partial sum's own truncation level; at
        # |z| = 1/24 the 50-term tail is below 10^-65, so compare fully
        got = hyp3f2(
            Hyp3F2Params(Fraction(1, 2), 1, 2, Fraction(3, 4), Fraction(5, 4)),
            Fraction(-1, 24), ctx30,
        )
        assert_close(got, F32_PARTIAL, ctx30, label="3F2 brute partial sum")

    def test_domains(self, ctx30):
        p = Hyp3F2Params(0.3, 0.4, 0.5, 2.0, 2.0)   # excess > 0
        hyp3f2(p, "0.97", ctx30)
        with pytest.raises(DomainError):
            hyp3f2(p, "-0.97", ctx30)
        with pytest.raises(DomainError):
            hyp3f2(p, "1.2", ctx30)
        bad = Hyp3F2Params(1.5, 1.5, 1.5, 0.9, 0.9)  # excess < 0
        with pytest.raises(DomainError):
            hyp3f2(bad, "0.97", ctx30)


class TestAppellF1:
    def test_unit_at_origin(self, ctx30):
        assert appell_f1(AppellF1Params(0.5, 2, 2, 1.5), 0, 0, ctx30).value == 1

    def test_second_argument_zero_collapse(self, ctx30):
        got = appell_f1(AppellF1Params(0.7, 1.1, 0.6, 2.3), "0.43", 0, ctx30)
        want = hyp2f1(Gauss2F1Params(0.7, 1.1, 2.3), "0.43", ctx30)
        assert_close(got, want, ctx30, label="F1(w, 0) collapse")

    def test_bp_zero_collapse(self, ctx30):
        got = appell_f1(AppellF1Params(0.7, 1.1, 0, 2.3), "0.43", "0.3", ctx30)
        want = hyp2f1(Gauss2F1Params(0.7, 1.1, 2.3), "0.43", ctx30)
        assert_close(got, want, ctx30, label="F1 bp=0 collapse")

    def test_reference_point_equals_3f2_reduction(self, ctx40):
        # F1(1/2, 2, 2; 3/2; -1/2, 1/3) against the 3F2 reduction value at
        # argument -1/24 (its two evaluators share no code path)
        got = appell_f1(
            AppellF1Params(Fraction(1, 2), 2, 2, Fraction(3, 2)),
            Fraction(-1, 2), Fraction(1, 3), ctx40,
        )
        want = hyp3f2(
            Hyp3F2Params(Fraction(1, 2), 1, 2, Fraction(3, 4), Fraction(5, 4)),
            Fraction(-1, 24), ctx40,
        )
        assert_close(got, want, ctx40, label="F1 reference point")

    def test_route_consistency_grid(self, ctx30):
        # wherever the series and Euler routes are both admissible they agree
        p = AppellF1Params(0.6, 0.8, 0.35, 1.7)
        with working_precision(ctx30):
            a, b, bp, c = (to_mpfr(v) for v in (0.6, 0.8, 0.35, 1.7))
            pts = [(-0.9 + 0.3 * i, -0.88 + 0.25 * j)
                   for i in range(7) for j in range(8)][:50]
            for (w, z) in pts:
                w, z = to_mpfr(w), to_mpfr(z)
                series = appell_f1(p, w, z, ctx30)
                assert series.route == "series"
                quad = quad_de(
                    lambda u: u ** (a - 1) * (1 - u) ** (c - a - 1)
                    * (1 - u * w) ** (-b) * (1 - u * z) ** (-bp),
                    0, 1, ctx30,
                )
                euler = gamma(c, ctx30) / (gamma(a, ctx30) * gamma(c - a, ctx30)) * quad
                assert agree_digits(series, euler, ctx30) >= ctx30.target_digits

    def test_argument_symmetry(self, ctx30):
        a = appell_f1(AppellF1Params(0.5, 0.9, 1.3, 2.1), "0.4", "-0.6", ctx30)
        b = appell_f1(AppellF1Params(0.5, 1.3, 0.9, 2.1), "-0.6", "0.4", ctx30)
        with working_precision(ctx30):
            assert a.value == b.value

    def test_reflection_self_inverse(self, ctx30):
        # one reflection rewrites F1(a, ...; w, z); a second reflection of the
        # rewritten side lands back on the original arguments and value
        from feynhyp.numkernel import NumValue
        with working_precision(ctx30):
            a, b, bp, c = (to_mpfr(v) for v in ("0.6", "0.9", "0.4", "1.8"))
            w, z = to_mpfr("-0.55"), to_mpfr("0.3")
            base = appell_f1(AppellF1Params(a, b, bp, c), w, z, ctx30)
            w1, z1 = w / (w - 1), z / (z - 1)
            w2, z2 = w1 / (w1 - 1), z1 / (z1 - 1)
            assert abs(w2 - w) <= to_mpfr("1e-45") and abs(z2 - z) <= to_mpfr("1e-45")
            pref1 = NumValue.exact(1 - w).pow_scalar(-b) * NumValue.exact(1 - z).pow_scalar(-bp)
            pref2 = NumValue.exact(1 - w1).pow_scalar(-b) * NumValue.exact(1 - z1).pow_scalar(-bp)
            twice = pref1 * pref2 * appell_f1(AppellF1Params(a, b, bp, c), w2, z2, ctx30)
        assert agree_digits(twice, base, ctx30) >= ctx30.target_digits

    def test_no_route_raises(self, ctx30):
        # w > 1 kills series, Euler, and reflection alike
        with pytest.raises(DomainError):
            appell_f1(AppellF1Params(0.5, 1, 1, 1.5), 1.2, 0.3, ctx30)


class TestOnefold:
    def test_normalization(self, ctx30):
        v = appell_f1_onefold(3.8, 0, 0, ctx30)
        assert_close(v, 1, ctx30, label="onefold at origin")

    def test_d4_elementary(self, ctx30):
        # at d = 4 the y-factor drops and the integral is -log(1-x)/x
        with working_precision(ctx30):
            x = to_mpfr("0.37")
            v = appell_f1_onefold(4, x, "0.53", ctx30)
            want = -gmpy2.log(1 - x) / x
        assert_close(v, want, ctx30, label="onefold d=4")

    def test_matches_double_series(self, ctx30):
        v = appell_f1_onefold(5, Fraction(1, 4), Fraction(1, 3), ctx30)
        assert_close(v, F1_VALUE_5, ctx30, label="onefold vs series value")
        w = appell_f1(
            AppellF1Params(1, 1, Fraction(-1, 2), Fraction(5, 2)),
            Fraction(1, 4), Fraction(1, 3), ctx30,
        )
        assert_close(v, w, ctx30, label="onefold vs appell_f1")

    def test_domain(self, ctx30):
        with pytest.raises(DomainError):
            appell_f1_onefold(1.8, 0.2, 0.2, ctx30)
        with pytest.raises(DomainError):
            appell_f1_onefold(4.0, 1.2, 0.2, ctx30)


class TestAppellF4:
    def test_unit_at_origin(self, ctx30):
        assert appell_f4(AppellF4Params(0.5, 0.75, 1.25, 0.9), 0, 0, ctx30).value == 1

    def test_y_zero_collapse(self, ctx30):
        got = appell_f4(AppellF4Params(0.5, 0.75, 1.25, 0.9), "0.3", 0, ctx30)
        want = hyp2f1(Gauss2F1Params(0.5, 0.75, 1.25), "0.3", ctx30)
        assert_close(got, want, ctx30, label="F4(x, 0) collapse")

    def test_bailey_reduction_point(self, ctx40):
        # F4(a, b; c, b; -x/((1-x)(1-y)), -y/((1-x)(1-y)))
        #   = ((1-x)(1-y))^a F1(a, c-b, 1+a-c; c; x, xy)
        with working_precision(ctx40):
            a, b, c = to_mpfr(Fraction(1, 2)), to_mpfr(Fraction(3, 4)), to_mpfr(Fraction(5, 4))
            x, y = to_mpfr(Fraction(1, 10)), to_mpfr(Fraction(1, 5))
            X = -x / ((1 - x) * (1 - y))
            Y = -y / ((1 - x) * (1 - y))
            from feynhyp.numkernel import NumValue
            lhs = appell_f4(AppellF4Params(a, b, c, b), X, Y, ctx40)
            rhs = NumValue.exact((1 - x) * (1 - y)).pow_scalar(a) * appell_f1(
                AppellF1Params(a, c - b, 1 + a - c, c), x, x * y, ctx40
            )
        assert_close(lhs, rhs, ctx40, label="F4 Bailey point")

    def test_domain(self, ctx30):
        with pytest.raises(DomainError):
            appell_f4(AppellF4Params(0.5, 0.75, 1.25, 0.9), 0.5, 0.5, ctx30)


class TestKdF:
    def test_unit_at_origin(self, ctx30):
        assert kdf_f210(KdFParams(1.5, 1.0, 2.0), 0, 0, ctx30).value == 1

    def test_x_zero_column(self, ctx30):
        got = kdf_f210(KdFParams(1.5, 1.0, 2.0), 0, "0.8", ctx30)
        want = hyp2f1(Gauss2F1Params(1.5, 1.0, 3.0), "0.8", ctx30)
        assert_close(got, want, ctx30, label="KdF x=0 column")

    def test_reduction_to_f1_point(self, ctx40):
        # (alpha, nu1, nu2, x, y) = (3/2, 1, 2, 0.09, 0.8), where
        # (x+y)^2 > 4x and the reduction arguments are real
        with working_precision(ctx40):
            x, y = to_mpfr("0.09"), to_mpfr("0.8")
            lhs = kdf_f210(KdFParams(1.5, 1, 2), x, y, ctx40)
            disc = gmpy2.sqrt((x + y) ** 2 - 4 * x)
            zm, zp = (x + y - disc) / 2, (x + y + disc) / 2
            rhs = appell_f1(AppellF1Params(1, 1.5, 1.5, 3), zm, zp, ctx40)
        assert_close(lhs, rhs, ctx40, label="KdF reduction point")

    def test_domain(self, ctx30):
        with pytest.raises(DomainError):
            kdf_f210(KdFParams(1.5, 1.0, 2.0), 0.6, 0.2, ctx30)
        with pytest.raises(DomainError):
            kdf_f210(KdFParams(1.5, 1.0, 2.0), 0.2, 0.9, ctx30)
