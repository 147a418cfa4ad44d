"""
FFT cost table: predicted butterfly counts against counted ones, plus the
mean wall-clock time of the FFT call at each decimated length.

Timing runs are sequential on the calling thread. Do not run this alongside
other timed work.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from . import dsp
from .errors import InvalidLengthError, InvalidParameterError

DEFAULT_BASE_N = 524288
DEFAULT_BASE_RATE_HZ = 5120.0
DEFAULT_FACTORS = (1, 2, 4, 8, 16)
DEFAULT_REPETITIONS = 30


@dataclass(frozen=True)
class CostRow:
    factor: int
    n_samples: int
    sample_rate_hz: float
    predicted_ops: dsp.OpCount
    measured_ops: dsp.OpCount
    mean_time_ms: float
    std_time_ms: float
    repetitions: int


def predicted_op_counts(n: int) -> dsp.OpCount:
    """Closed-form radix-2 cost: (n/2)*log2(n) multiplications, n*log2(n) additions."""
    m = dsp.log2_exact(n)
    if m < 1:
        raise InvalidLengthError("an FFT needs at least two points")
    return dsp.OpCount(complex_multiplications=(n // 2) * m, complex_additions=n * m)


def time_fft(values: np.ndarray, repetitions: int) -> tuple[dsp.OpCount, np.ndarray]:
    """Run the instrumented FFT `repetitions` times after one untimed warm-up.

    Returns the op count and the per-run times in milliseconds.
    """
    series = dsp.ComplexSeries(values)
    _, ops = dsp.fft(series)
    times = np.empty(repetitions)
    for i in range(repetitions):
        start = time.perf_counter()
        _, run_ops = dsp.fft(series)
        times[i] = (time.perf_counter() - start) * 1e3
        if run_ops != ops:
            raise RuntimeError("op count changed between repetitions")
    return ops, times


def run_cost_table(
    base_n: int = DEFAULT_BASE_N,
    base_rate_hz: float = DEFAULT_BASE_RATE_HZ,
    factors: Sequence[int] = DEFAULT_FACTORS,
    repetitions: int = DEFAULT_REPETITIONS,
    rng_seed: int = 0,
) -> List[CostRow]:
    """Build one CostRow per decimation factor, ordered by factor."""
    dsp.log2_exact(base_n)
    if int(repetitions) != repetitions or repetitions < 1:
        raise InvalidParameterError(f"repetitions must be >= 1, got {repetitions}")
    for p in factors:
        if int(p) != p or p < 1 or not dsp.is_power_of_two(int(p)) or base_n % p:
            raise InvalidParameterError(f"factor {p} is not a power of two dividing {base_n}")
        if base_n // p < 2:
            raise InvalidParameterError(f"factor {p} leaves fewer than two samples")

    rng = np.random.default_rng(rng_seed)
    rows = []
    for p in sorted(int(p) for p in set(factors)):
        n = base_n // p
        values = rng.standard_normal(n)
        ops, times = time_fft(values, int(repetitions))
        rows.append(
            CostRow(
                factor=p,
                n_samples=n,
                sample_rate_hz=base_rate_hz / p,
                predicted_ops=predicted_op_counts(n),
                measured_ops=ops,
                mean_time_ms=float(times.mean()),
                std_time_ms=float(times.std()),
                repetitions=int(repetitions),
            )
        )
    return rows
