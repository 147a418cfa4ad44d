"""
Signal-processing kernels: band-pass FIR design and filtering, block
averaging decimation, an instrumented radix-2 FFT and the Hilbert envelope.

The FFT is written from scratch so that every butterfly can be counted;
numpy is used only for vectorised arithmetic within each stage.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Union

import numpy as np

from .errors import EmptyOutputError, InvalidLengthError, InvalidParameterError
from .signal_model import TimeSeries

DEFAULT_BAND_HZ = (40.0, 70.0)
DEFAULT_NUM_TAPS = 513

DECIMATION_MODES = ("mean", "drop")


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def log2_exact(n: int) -> int:
    """Return m such that n == 2**m, or raise InvalidLengthError."""
    if not is_power_of_two(int(n)) or int(n) != n:
        raise InvalidLengthError(f"length {n} is not a power of two")
    return int(n).bit_length() - 1


def largest_power_of_two(n: int) -> int:
    """Largest power of two not exceeding n (n >= 1)."""
    if n < 1:
        raise EmptyOutputError("no power of two fits in an empty sequence")
    return 1 << (int(n).bit_length() - 1)


@dataclass(frozen=True)
class OpCount:
    """Complex multiplication and addition tally of one FFT invocation."""

    complex_multiplications: int
    complex_additions: int

    @property
    def total(self) -> int:
        return self.complex_multiplications + self.complex_additions

    def as_dict(self) -> dict:
        return {
            "complex_multiplications": self.complex_multiplications,
            "complex_additions": self.complex_additions,
            "total": self.total,
        }


@dataclass(frozen=True)
class ComplexSeries:
    values: np.ndarray
    sample_rate_hz: float = 1.0

    def __post_init__(self):
        values = np.array(self.values, dtype=np.complex128, copy=True)
        if values.ndim != 1 or values.size < 1:
            raise InvalidParameterError("values must be a non-empty 1-D sequence")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class Spectrum:
    """Single-sided amplitude spectrum.

    Bin 0 and bin N/2 hold |X[k]|/N, all other bins 2|X[k]|/N, so a sinusoid
    of amplitude A sitting exactly on a bin reads A.
    """

    magnitudes: np.ndarray
    bin_width_hz: float
    source_rate_hz: float
    source_len: int
    op_count: Optional[OpCount] = None

    def __post_init__(self):
        mags = np.array(self.magnitudes, dtype=np.float64, copy=True)
        mags.setflags(write=False)
        object.__setattr__(self, "magnitudes", mags)
        if mags.size != self.source_len // 2 + 1:
            raise InvalidParameterError("magnitude count does not match source length")

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(self.magnitudes.size) * self.bin_width_hz

    @property
    def nyquist_hz(self) -> float:
        return self.source_rate_hz / 2


@dataclass(frozen=True)
class FilterKernel:
    """Linear-phase FIR band-pass kernel."""

    taps: np.ndarray
    f_low_hz: float
    f_high_hz: float
    design_rate_hz: float

    def __post_init__(self):
        taps = np.array(self.taps, dtype=np.float64, copy=True)
        if taps.ndim != 1 or taps.size % 2 == 0:
            raise InvalidParameterError("a linear-phase kernel needs an odd number of taps")
        if not np.array_equal(taps, taps[::-1]):
            raise InvalidParameterError("kernel taps are not symmetric")
        if not 0 < self.f_low_hz < self.f_high_hz < self.design_rate_hz / 2:
            raise InvalidParameterError("band edges must satisfy 0 < f_low < f_high < rate/2")
        taps.setflags(write=False)
        object.__setattr__(self, "taps", taps)

    @property
    def num_taps(self) -> int:
        return self.taps.size

    @property
    def group_delay(self) -> int:
        return (self.taps.size - 1) // 2


# ---------------------------------------------------------------------------
# Filtering and decimation
# ---------------------------------------------------------------------------

def design_bandpass(
    f_low_hz: float = DEFAULT_BAND_HZ[0],
    f_high_hz: float = DEFAULT_BAND_HZ[1],
    sample_rate_hz: float = 5120.0,
    num_taps: int = DEFAULT_NUM_TAPS,
) -> FilterKernel:
    """Windowed-sinc band-pass FIR (Hamming window).

    The kernel is the difference of two Hamming-windowed low-pass kernels,
    each normalised to unit DC gain so the band-pass rejects DC exactly,
    then scaled to unit gain at the band centre.
    """
    if int(num_taps) != num_taps or num_taps < 11 or num_taps % 2 == 0:
        raise InvalidParameterError(f"num_taps must be an odd integer >= 11, got {num_taps}")
    if not 0 < f_low_hz < f_high_hz < sample_rate_hz / 2:
        raise InvalidParameterError(
            f"band ({f_low_hz}, {f_high_hz}) Hz does not fit below Nyquist of {sample_rate_hz} Hz"
        )
    num_taps = int(num_taps)
    n = np.arange(num_taps) - (num_taps - 1) / 2
    lo = f_low_hz / sample_rate_hz
    hi = f_high_hz / sample_rate_hz
    window = np.hamming(num_taps)

    def lowpass(cutoff):
        h = np.sinc(2 * cutoff * n) * window
        return h / h.sum()

    taps = lowpass(hi) - lowpass(lo)
    taps = 0.5 * (taps + taps[::-1])

    centre = 0.5 * (lo + hi)
    taps /= np.sum(taps * np.cos(2 * np.pi * centre * n))
    return FilterKernel(taps, float(f_low_hz), float(f_high_hz), float(sample_rate_hz))


def apply_filter(signal: TimeSeries, kernel: FilterKernel) -> TimeSeries:
    """Filter by direct convolution and compensate the group delay.

    The causal output is advanced by (num_taps - 1) / 2 samples; the tail
    left behind is zero-filled so the length is preserved.
    """
    if not np.isclose(signal.sample_rate_hz, kernel.design_rate_hz, rtol=1e-12, atol=0):
        raise InvalidParameterError(
            f"kernel designed for {kernel.design_rate_hz} Hz applied to a "
            f"{signal.sample_rate_hz} Hz signal"
        )
    n = len(signal)
    delay = kernel.group_delay
    causal = np.convolve(signal.samples, kernel.taps)[:n]
    out = np.zeros(n)
    if n > delay:
        out[: n - delay] = causal[delay:]
    return TimeSeries(out, signal.sample_rate_hz, signal.label)


def decimate(signal: TimeSeries, factor: int, mode: str = "mean") -> TimeSeries:
    """Reduce the sample rate by an integer factor.

    Args:
        signal: Input series.
        factor: Decimation factor p >= 1.
        mode: ``"mean"`` averages each block of p samples (default);
            ``"drop"`` keeps the first sample of each block.

    Returns:
        Series of floor(len/p) samples at rate/p. A trailing partial block
        is discarded.
    """
    if int(factor) != factor or factor < 1:
        raise InvalidParameterError(f"decimation factor must be a positive integer, got {factor}")
    if mode not in DECIMATION_MODES:
        raise InvalidParameterError(f"unknown decimation mode {mode!r}")
    factor = int(factor)
    n_out = len(signal) // factor
    if n_out < 1:
        raise EmptyOutputError(f"factor {factor} exceeds signal length {len(signal)}")
    blocks = signal.samples[: n_out * factor].reshape(n_out, factor)
    out = blocks.mean(axis=1) if mode == "mean" else blocks[:, 0]
    return TimeSeries(out, signal.sample_rate_hz / factor, signal.label)


def truncate_to_power_of_two(signal: TimeSeries) -> TimeSeries:
    n = largest_power_of_two(len(signal))
    if n == len(signal):
        return signal
    return TimeSeries(signal.samples[:n], signal.sample_rate_hz, signal.label)


def remove_dc(signal: TimeSeries) -> TimeSeries:
    return TimeSeries(signal.samples - signal.samples.mean(), signal.sample_rate_hz, signal.label)


# ---------------------------------------------------------------------------
# Instrumented radix-2 FFT
# ---------------------------------------------------------------------------

@lru_cache(maxsize=64)
def _bit_reversal(n: int) -> np.ndarray:
    bits = log2_exact(n)
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.intp)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    rev.setflags(write=False)
    return rev


@lru_cache(maxsize=64)
def _twiddles(size: int) -> np.ndarray:
    w = np.exp(-2j * np.pi * np.arange(size // 2) / size)
    w.setflags(write=False)
    return w


def _radix2(values: np.ndarray) -> tuple[np.ndarray, OpCount]:
    # Iterative decimation-in-time. Each stage runs N/2 butterflies
    # (one multiply, two adds); trivial twiddles are counted too.
    n = values.size
    log2_exact(n)
    a = values[_bit_reversal(n)].astype(np.complex128)
    mults = adds = 0
    size = 2
    while size <= n:
        half = size // 2
        blocks = a.reshape(-1, size)
        top = blocks[:, :half]
        bottom = blocks[:, half:] * _twiddles(size)
        mults += bottom.size
        blocks[:, half:] = top - bottom
        top += bottom
        adds += 2 * bottom.size
        size *= 2
    return a, OpCount(mults, adds)


def _as_complex_series(series: Union[ComplexSeries, TimeSeries, np.ndarray]) -> ComplexSeries:
    if isinstance(series, ComplexSeries):
        return series
    if isinstance(series, TimeSeries):
        return ComplexSeries(series.samples, series.sample_rate_hz)
    return ComplexSeries(series)


def fft(series: Union[ComplexSeries, TimeSeries, np.ndarray]) -> tuple[ComplexSeries, OpCount]:
    """Radix-2 DFT, X[k] = sum_n x[n] exp(-2j*pi*k*n/N), with butterfly counts.

    Real input is promoted to complex. The returned OpCount is exactly
    (N/2)*log2(N) multiplications and N*log2(N) additions.

    Raises:
        InvalidLengthError: if N is not a power of two.
    """
    series = _as_complex_series(series)
    out, ops = _radix2(series.values)
    return ComplexSeries(out, series.sample_rate_hz), ops


def inverse_fft(series: Union[ComplexSeries, np.ndarray]) -> ComplexSeries:
    series = _as_complex_series(series)
    out, _ = _radix2(np.conj(series.values))
    return ComplexSeries(np.conj(out) / out.size, series.sample_rate_hz)


def analytic_signal(signal: TimeSeries) -> ComplexSeries:
    """Analytic signal x + j*H[x] built in the frequency domain.

    Negative-frequency bins are zeroed and positive ones doubled; DC and the
    Nyquist bin are kept as they are.
    """
    spectrum, _ = fft(signal)
    n = len(signal)
    weights = np.zeros(n)
    weights[0] = 1.0
    if n > 1:
        weights[n // 2] = 1.0
        weights[1 : n // 2] = 2.0
    return inverse_fft(ComplexSeries(spectrum.values * weights, signal.sample_rate_hz))


def hilbert_envelope(signal: TimeSeries) -> TimeSeries:
    """Envelope |x + j*H[x]| of a power-of-two length signal."""
    z = analytic_signal(signal)
    return TimeSeries(np.abs(z.values), signal.sample_rate_hz, signal.label)


def amplitude_spectrum(signal: TimeSeries) -> Spectrum:
    transformed, ops = fft(signal)
    n = len(signal)
    mags = np.abs(transformed.values[: n // 2 + 1]) / n
    mags[1 : (n + 1) // 2] *= 2.0
    return Spectrum(
        magnitudes=mags,
        bin_width_hz=signal.sample_rate_hz / n,
        source_rate_hz=signal.sample_rate_hz,
        source_len=n,
        op_count=ops,
    )
