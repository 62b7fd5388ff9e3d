import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from jittermon.core import (
    FIXED_DELAY_MAX,
    FixedDelay,
    JitterSeries,
    fixed_shr,
    fixed_sub_abs,
    microseconds,
    seconds,
)

delays = st.integers(0, FIXED_DELAY_MAX).map(FixedDelay)


def test_time_helpers():
    assert seconds(1) == 1_000_000_000
    assert seconds(0.25) == 250_000_000
    assert microseconds(50) == 50_000


def test_fixed_delay_range():
    assert int(FixedDelay(FIXED_DELAY_MAX)) == 2**48 - 1
    with pytest.raises(OverflowError):
        FixedDelay(2**48)
    with pytest.raises(OverflowError):
        FixedDelay(-1)
    with pytest.raises(TypeError):
        FixedDelay(1.5)
    with pytest.raises(TypeError):
        FixedDelay(True)


def test_from_ns_truncates_to_microseconds():
    assert FixedDelay.from_ns(120_999) == FixedDelay(120)
    assert FixedDelay.from_ns(0) == FixedDelay(0)
    with pytest.raises(ValueError):
        FixedDelay.from_ns(-1)


def test_sub_abs_examples():
    assert fixed_sub_abs(FixedDelay(300), FixedDelay(120)) == FixedDelay(180)
    assert fixed_sub_abs(FixedDelay(120), FixedDelay(300)) == FixedDelay(180)
    assert fixed_sub_abs(FixedDelay(7), FixedDelay(7)) == FixedDelay(0)


def test_shr_examples_and_bounds():
    assert fixed_shr(FixedDelay(1000), 4) == FixedDelay(62)
    assert fixed_shr(FixedDelay(1000), 0) == FixedDelay(1000)
    for bad in (-1, 17):
        with pytest.raises(ValueError):
            fixed_shr(FixedDelay(1), bad)


@given(delays, delays)
def test_sub_abs_matches_wide_int(a, b):
    out = fixed_sub_abs(a, b)
    assert out.value == abs(a.value - b.value)
    assert out == fixed_sub_abs(b, a)


@given(delays, st.integers(0, 16))
def test_shr_is_floor_division(a, m):
    assert fixed_shr(a, m).value == a.value // 2**m


def test_series_validation():
    s = JitterSeries.from_points("x", [(1, 0.5), (3, 2.0)])
    assert len(s) == 2 and s.points == [(1, 0.5), (3, 2.0)]
    assert not s.values.flags.writeable
    with pytest.raises(ValueError):
        JitterSeries.from_points("x", [(3, 1.0), (3, 1.0)])
    with pytest.raises(ValueError):
        JitterSeries.from_points("x", [(1, -1.0)])
    with pytest.raises(ValueError):
        JitterSeries.from_points("x", [(1, float("nan"))])
    assert JitterSeries.from_points("x", [(1, 2.0)]).scaled(3.0, "ms").values.tolist() == [6.0]


def test_empty_series():
    s = JitterSeries.from_points("x", [])
    assert len(s) == 0 and s.at.dtype == np.int64
