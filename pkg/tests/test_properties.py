"""Property-based checks of the numeric substrate."""

import gmpy2
from gmpy2 import mpfr
from hypothesis import given, settings, strategies as st

from feynhyp.numkernel import (
    NumValue,
    PrecisionContext,
    kallen,
    pochhammer,
    to_mpfr,
    working_precision,
)

CTX = PrecisionContext.for_digits(30)
HI_CTX = PrecisionContext.for_digits(90)

finite = st.floats(min_value=-10, max_value=10,
                   allow_nan=False, allow_infinity=False)
small_pos = st.floats(min_value=1e-3, max_value=5,
                      allow_nan=False, allow_infinity=False)


@settings(max_examples=60, deadline=None)
@given(x=finite, y=finite, z=finite)
def test_kallen_symmetry_in_last_two(x, y, z):
    with working_precision(CTX):
        assert kallen(x, y, z) == kallen(x, z, y)


@settings(max_examples=40, deadline=None)
@given(a=finite, k=st.integers(min_value=0, max_value=20))
def test_pochhammer_recurrence(a, k):
    with working_precision(CTX):
        left = pochhammer(a, k + 1, CTX).value
        right = pochhammer(a, k, CTX).value * (to_mpfr(a) + k)
        assert left == right


@settings(max_examples=60, deadline=None)
@given(a=finite, b=finite, ea=small_pos, eb=small_pos)
def test_numvalue_error_bounds_contain_true_perturbation(a, b, ea, eb):
    # for any perturbation within the stated bounds, the perturbed product
    # stays within the propagated bound of the nominal product
    ea, eb = ea * 1e-12, eb * 1e-12
    with working_precision(CTX):
        va = NumValue(to_mpfr(a), to_mpfr(ea))
        vb = NumValue(to_mpfr(b), to_mpfr(eb))
        prod = va * vb
        worst = (to_mpfr(a) + ea) * (to_mpfr(b) + eb)
        assert abs(worst - prod.value) <= prod.abs_err * (1 + mpfr("1e-20"))


@settings(max_examples=30, deadline=None)
@given(z=st.floats(min_value=-0.95, max_value=0.45,
                   allow_nan=False, allow_infinity=False))
def test_gauss_series_agrees_with_high_precision(z):
    # downsampled re-evaluation: the 30-digit result matches the 90-digit one
    from feynhyp.hyperfun import Gauss2F1Params, hyp2f1
    p = Gauss2F1Params(0.31, 0.77, 1.23)
    lo = hyp2f1(p, z, CTX)
    hi = hyp2f1(p, z, HI_CTX)
    with working_precision(HI_CTX):
        scale = max(abs(hi.value), mpfr(1))
        assert abs(lo.value - hi.value) <= mpfr(10) ** -29 * scale
