import math

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from semifb.errors import InvalidWeightError, ZeroDivisionInSemiring
from semifb.semiring import (
    LOG,
    PROB,
    TROPICAL,
    LogWeight,
    ProbWeight,
    TropicalWeight,
    oplus,
    oslash,
    otimes,
)

NEG_INF = -math.inf

finite = st.floats(min_value=-50, max_value=50, allow_nan=False)
log_values = st.one_of(finite, st.sampled_from([NEG_INF, 0.0]))


def mp_logsumexp(*xs):
    mpmath.mp.dps = 50
    return float(mpmath.log(mpmath.fsum(mpmath.exp(mpmath.mpf(x)) for x in xs)))


class TestExamples:
    def test_zero_is_plus_identity(self):
        assert (LogWeight.zero() + LogWeight(3.0)).value == 3.0

    def test_log_one_plus_one(self):
        assert (LogWeight(0.0) + LogWeight(0.0)).value == pytest.approx(0.6931472, abs=1e-7)

    def test_tropical_max(self):
        assert (TropicalWeight(2.0) + TropicalWeight(5.0)).value == 5.0

    def test_large_operands_do_not_overflow(self):
        got = oplus(LogWeight(1e8), LogWeight(1e8)).value
        assert got == mp_logsumexp(1e8, 1e8)
        assert math.isfinite(got)

    def test_otimes(self):
        assert otimes(LogWeight(1.5), LogWeight(2.5)).value == 4.0
        assert otimes(LogWeight.zero(), LogWeight(7.0)).value == NEG_INF
        assert otimes(ProbWeight(0.5), ProbWeight(0.5)).value == 0.25

    def test_oslash(self):
        assert oslash(LogWeight(4.0), LogWeight(2.5)).value == 1.5
        assert oslash(LogWeight.zero(), LogWeight(1.0)).value == NEG_INF
        with pytest.raises(ZeroDivisionInSemiring):
            oslash(LogWeight(1.0), LogWeight.zero())
        with pytest.raises(ZeroDivisionInSemiring):
            ProbWeight(1.0) / ProbWeight(0.0)

    def test_identities(self):
        assert LogWeight.zero().value == NEG_INF
        assert LogWeight.one().value == 0.0
        assert ProbWeight.zero().value == 0.0
        assert ProbWeight.one().value == 1.0
        assert TropicalWeight.zero().value == NEG_INF

    def test_conversions(self):
        assert LogWeight.from_log_prob(-1.0) == LogWeight(-1.0)
        assert ProbWeight.from_log_prob(NEG_INF) == ProbWeight(0.0)
        assert TropicalWeight.from_log_prob(0.0) == TropicalWeight(0.0)
        assert ProbWeight.from_log_prob(-2.0).to_log_prob() == pytest.approx(-2.0, rel=1e-15)
        with pytest.raises(InvalidWeightError):
            ProbWeight.from_log_prob(1000.0)

    @pytest.mark.parametrize("cls", [LogWeight, TropicalWeight])
    @pytest.mark.parametrize("bad", [math.nan, math.inf])
    def test_rejects_nan_and_pos_inf(self, cls, bad):
        with pytest.raises(InvalidWeightError):
            cls(bad)

    @pytest.mark.parametrize("bad", [math.nan, math.inf, -0.5])
    def test_prob_rejects(self, bad):
        with pytest.raises(InvalidWeightError):
            ProbWeight(bad)

    def test_mixing_types_is_an_error(self):
        with pytest.raises(TypeError):
            LogWeight(0.0) + TropicalWeight(0.0)

    def test_both_zero(self):
        assert LOG.plus(NEG_INF, NEG_INF) == NEG_INF
        assert TROPICAL.plus(NEG_INF, NEG_INF) == NEG_INF


@settings(max_examples=300, deadline=None)
@given(a=finite, b=finite)
def test_log_plus_matches_shifted_formula(a, b):
    got = LOG.plus(a, b)
    assert got == max(a, b) + math.log1p(math.exp(-abs(a - b)))
    assert got >= max(a, b)


@settings(max_examples=200, deadline=None)
@given(a=st.floats(-1e300, 1e300), b=st.floats(-1e300, 1e300))
def test_log_plus_never_overflows(a, b):
    assert math.isfinite(LOG.plus(a, b))


@settings(max_examples=300, deadline=None)
@given(a=finite, a2=finite, b=log_values)
def test_monotone(a, a2, b):
    lo, hi = sorted((a, a2))
    for sr in (LOG, TROPICAL):
        assert sr.plus(lo, b) <= sr.plus(hi, b)


@settings(max_examples=300, deadline=None)
@given(a=finite, b=finite)
def test_semifield_division_inverts_times(a, b):
    # (a + b) - b rounds once each way; exact only when a + b is representable
    assert abs(LOG.divide(LOG.times(a, b), b) - a) <= 2 * math.ulp(100.0)


@settings(max_examples=100, deadline=None)
@given(a=st.integers(-10**6, 10**6), b=st.integers(-10**6, 10**6))
def test_semifield_division_exact_on_representable_sums(a, b):
    assert LOG.divide(LOG.times(float(a), float(b)), float(b)) == a
