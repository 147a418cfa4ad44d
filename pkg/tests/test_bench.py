import pytest

from mcsa_decim import bench
from mcsa_decim.errors import InvalidLengthError, InvalidParameterError

EXPECTED_OPS = {
    1: (4980736, 9961472, 14942208),
    2: (2359296, 4718592, 7077888),
    4: (1114112, 2228224, 3342336),
    8: (524288, 1048576, 1572864),
    16: (245760, 491520, 737280),
}


@pytest.mark.parametrize(
    "n, expected",
    [(524288, EXPECTED_OPS[1]), (65536, EXPECTED_OPS[8]), (2, (1, 2, 3))],
)
def test_predicted_op_counts(n, expected):
    ops = bench.predicted_op_counts(n)
    assert (ops.complex_multiplications, ops.complex_additions, ops.total) == expected


@pytest.mark.parametrize("n", [0, 1, 3, 524287])
def test_predicted_rejects(n):
    with pytest.raises(InvalidLengthError):
        bench.predicted_op_counts(n)


def test_reduction_ratio():
    ratio = bench.predicted_op_counts(524288).total / bench.predicted_op_counts(32768).total
    assert ratio == 14942208 / 737280
    assert round(ratio) == 20


def test_small_cost_table():
    rows = bench.run_cost_table(base_n=4096, base_rate_hz=1000.0, factors=[4, 1, 2], repetitions=3)
    assert [r.factor for r in rows] == [1, 2, 4]
    assert [r.n_samples for r in rows] == [4096, 2048, 1024]
    assert [r.sample_rate_hz for r in rows] == [1000.0, 500.0, 250.0]
    for r in rows:
        assert r.measured_ops == r.predicted_ops
        assert r.mean_time_ms > 0 and r.std_time_ms >= 0 and r.repetitions == 3


def test_single_repetition_has_zero_spread():
    (row,) = bench.run_cost_table(base_n=256, factors=[1], repetitions=1)
    assert row.std_time_ms == 0.0


@pytest.mark.parametrize(
    "kwargs",
    [dict(factors=[3]), dict(factors=[8192]), dict(factors=[4096]), dict(repetitions=0)],
)
def test_cost_table_rejects(kwargs):
    with pytest.raises(InvalidParameterError):
        bench.run_cost_table(base_n=4096, **kwargs)


def test_cost_table_rejects_non_power_of_two_base():
    with pytest.raises(InvalidLengthError):
        bench.run_cost_table(base_n=1000, factors=[1])
