import gmpy2
import pytest

from feynhyp.numkernel import NumValue, PrecisionContext, to_mpfr, working_precision


@pytest.fixture
def ctx30():
    return PrecisionContext.for_digits(30)


@pytest.fixture
def ctx40():
    return PrecisionContext.for_digits(40)


@pytest.fixture
def ctx50():
    return PrecisionContext.for_digits(50)


def agree_digits(a, b, ctx) -> int:
    """Decimal digits of agreement between two scalars/NumValues."""
    with working_precision(ctx):
        av = a.value if isinstance(a, NumValue) else to_mpfr(a)
        bv = b.value if isinstance(b, NumValue) else to_mpfr(b)
        diff = abs(av - bv)
        scale = max(abs(av), abs(bv), to_mpfr(10) ** (-ctx.working_digits))
        if diff == 0:
            return ctx.working_digits
        return max(0, int(-gmpy2.log10(diff / scale)))


def assert_close(a, b, ctx, digits=None, label=""):
    digits = ctx.target_digits if digits is None else digits
    got = agree_digits(a, b, ctx)
    assert got >= digits, f"{label}: only {got} digits agree (need {digits})"
