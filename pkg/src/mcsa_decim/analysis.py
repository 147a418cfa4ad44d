"""
Fault-frequency prediction, peak reading and the decimation sweep.

The processing chain for one decimation factor is

    band-pass (original rate) -> decimate -> truncate to 2**m
    -> Hilbert envelope -> [normalise by carrier] -> remove DC -> spectrum

and the sweep doubles the factor until the fault peak in the envelope
spectrum drifts in magnitude beyond a tolerance or moves off its bin.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import dsp
from .errors import EmptyOutputError, InvalidParameterError, UndefinedReferenceError
from .signal_model import MotorParams, TimeSeries

logger = logging.getLogger(__name__)

DEFAULT_WINDOW_HZ = 0.5
DEFAULT_TOLERANCE_PCT = 1.0
DEFAULT_MAX_EXPONENT = 6


@dataclass(frozen=True)
class FaultSignature:
    """Broken-bar sidebands (1 -/+ 2sk)f and the envelope line 2skf for one k."""

    k: int
    lower_hz: float
    upper_hz: float
    envelope_hz: float

    def as_dict(self) -> dict:
        return {"k": self.k, "lower_hz": self.lower_hz, "upper_hz": self.upper_hz,
                "envelope_hz": self.envelope_hz}


@dataclass(frozen=True)
class PeakReading:
    target_hz: float
    found_hz: float
    magnitude: float

    @property
    def lost(self) -> bool:
        """True when the target fell outside the spectrum and no peak was read."""
        return math.isnan(self.found_hz)

    def as_dict(self) -> dict:
        found = None if self.lost else self.found_hz
        return {"target_hz": self.target_hz, "found_hz": found, "magnitude": self.magnitude}


@dataclass(frozen=True)
class SweepReport:
    """Outcome of a decimation sweep.

    ``factors``, ``mean_error_pct``, ``peaks`` and ``passed`` are parallel
    lists over the attempted factors; the factor-1 reference is kept apart.
    """

    factors: List[int]
    mean_error_pct: List[float]
    peaks: List[List[PeakReading]]
    max_safe_factor: int
    tolerance_pct: float
    passed: List[bool] = field(default_factory=list)
    reference_peaks: List[PeakReading] = field(default_factory=list)
    bin_width_hz: float = 0.0

    def as_dict(self) -> dict:
        return {
            "factors": list(self.factors),
            "mean_error_pct": list(self.mean_error_pct),
            "passed": list(self.passed),
            "peaks": [[p.as_dict() for p in row] for row in self.peaks],
            "reference_peaks": [p.as_dict() for p in self.reference_peaks],
            "max_safe_factor": self.max_safe_factor,
            "tolerance_pct": self.tolerance_pct,
            "bin_width_hz": self.bin_width_hz,
        }


def fault_frequencies(motor: MotorParams) -> List[FaultSignature]:
    """Broken-rotor-bar frequencies for k = 1..k_max.

    Raises:
        InvalidParameterError: if 2*s*k_max >= 1, which would push the lower
            sideband to or below 0 Hz.
    """
    f, s = motor.supply_freq_hz, motor.slip
    if 2 * s * motor.k_max >= 1:
        raise InvalidParameterError(
            f"2*s*k_max = {2 * s * motor.k_max:g} >= 1: lower sideband would not be positive"
        )
    out = []
    for k in range(1, motor.k_max + 1):
        shift = 2 * s * k * f
        out.append(FaultSignature(k=k, lower_hz=f - shift, upper_hz=f + shift, envelope_hz=shift))
    return out


def extract_peak(spectrum: dsp.Spectrum, target_hz: float, window_hz: float) -> PeakReading:
    """Largest bin within [target - window, target + window].

    The lower edge is clipped at 0 Hz. Ties go to the lowest frequency.
    """
    bw = spectrum.bin_width_hz
    if window_hz < bw * (1 - 1e-12):
        raise InvalidParameterError(f"window {window_hz} Hz is narrower than one bin ({bw} Hz)")
    if target_hz < 0 or target_hz + window_hz > spectrum.nyquist_hz:
        raise InvalidParameterError(
            f"window {target_hz} +/- {window_hz} Hz leaves the spectrum range "
            f"[0, {spectrum.nyquist_hz}] Hz"
        )
    lo = max(target_hz - window_hz, 0.0)
    hi = target_hz + window_hz
    i_lo = int(math.ceil(lo / bw - 1e-9))
    i_hi = min(int(math.floor(hi / bw + 1e-9)), spectrum.magnitudes.size - 1)
    segment = spectrum.magnitudes[i_lo : i_hi + 1]
    i = i_lo + int(np.argmax(segment))
    return PeakReading(target_hz=float(target_hz), found_hz=i * bw, magnitude=float(spectrum.magnitudes[i]))


def _check_same_resolution(reference: dsp.Spectrum, test: dsp.Spectrum) -> None:
    if not math.isclose(reference.bin_width_hz, test.bin_width_hz, rel_tol=1e-9):
        raise InvalidParameterError(
            f"bin widths differ: {reference.bin_width_hz} vs {test.bin_width_hz} Hz"
        )


def peak_errors_pct(
    reference: Sequence[PeakReading], test: Sequence[PeakReading]
) -> List[float]:
    out = []
    for ref, tst in zip(reference, test):
        if ref.magnitude == 0:
            raise UndefinedReferenceError(f"reference peak at {ref.target_hz} Hz has zero magnitude")
        out.append(100.0 * abs(tst.magnitude - ref.magnitude) / ref.magnitude)
    return out


def spectrum_error(
    reference: dsp.Spectrum,
    test: dsp.Spectrum,
    targets: Sequence[float],
    window_hz: float = DEFAULT_WINDOW_HZ,
) -> float:
    """Mean relative peak-magnitude error, in percent, over `targets`."""
    if len(targets) == 0:
        raise InvalidParameterError("at least one target frequency is required")
    _check_same_resolution(reference, test)
    ref_peaks = [extract_peak(reference, t, window_hz) for t in targets]
    test_peaks = [extract_peak(test, t, window_hz) for t in targets]
    return float(np.mean(peak_errors_pct(ref_peaks, test_peaks)))


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------

def bandpass_stage(
    signal: TimeSeries,
    band: Tuple[float, float] = dsp.DEFAULT_BAND_HZ,
    num_taps: int = dsp.DEFAULT_NUM_TAPS,
) -> TimeSeries:
    kernel = dsp.design_bandpass(band[0], band[1], signal.sample_rate_hz, num_taps)
    return dsp.apply_filter(signal, kernel)


def envelope_spectrum(
    filtered: TimeSeries,
    factor: int,
    mode: str = "mean",
    relative: bool = True,
) -> dsp.Spectrum:
    """Decimate an already band-passed signal and return its envelope spectrum.

    With ``relative=True`` the envelope is divided by its mean before DC
    removal, so the spectrum reads modulation depth rather than absolute
    current. That cancels the carrier gain change introduced by block
    averaging, which is not information loss.
    """
    if not dsp.is_power_of_two(int(factor)) or int(factor) != factor:
        raise InvalidParameterError(f"factor must be a power of two, got {factor}")
    decimated = dsp.decimate(filtered, int(factor), mode=mode)
    if len(decimated) < 2:
        raise EmptyOutputError(f"factor {factor} leaves {len(decimated)} sample(s)")
    decimated = dsp.truncate_to_power_of_two(decimated)
    envelope = dsp.hilbert_envelope(decimated)
    if relative:
        level = envelope.samples.mean()
        if level > 0:
            envelope = TimeSeries(envelope.samples / level, envelope.sample_rate_hz, envelope.label)
    return dsp.amplitude_spectrum(dsp.remove_dc(envelope))


def run_pipeline(
    signal: TimeSeries,
    motor: MotorParams,
    factor: int = 1,
    band: Tuple[float, float] = dsp.DEFAULT_BAND_HZ,
    num_taps: int = dsp.DEFAULT_NUM_TAPS,
    mode: str = "mean",
    relative: bool = True,
) -> dsp.Spectrum:
    """Envelope spectrum of `signal` after decimation by `factor`.

    Filtering happens once, at the original rate, before decimation.
    """
    if not motor.supply_freq_hz > 0:
        raise InvalidParameterError("motor supply frequency must be positive")
    if not band[0] < motor.supply_freq_hz < band[1]:
        logger.warning("supply frequency %g Hz lies outside the band %s", motor.supply_freq_hz, band)
    filtered = bandpass_stage(signal, band, num_taps)
    return envelope_spectrum(filtered, factor, mode=mode, relative=relative)


def decimation_sweep(
    signal: TimeSeries,
    motor: MotorParams,
    tolerance_pct: float = DEFAULT_TOLERANCE_PCT,
    max_exponent: int = DEFAULT_MAX_EXPONENT,
    band: Tuple[float, float] = dsp.DEFAULT_BAND_HZ,
    num_taps: int = dsp.DEFAULT_NUM_TAPS,
    window_hz: float = DEFAULT_WINDOW_HZ,
    mode: str = "mean",
    relative: bool = True,
    spectra: Optional[dict] = None,
) -> SweepReport:
    """Find the largest power-of-two factor that keeps the fault peaks intact.

    Factors 2, 4, ..., 2**max_exponent are tried in order against the
    factor-1 reference. A factor fails when its mean peak error exceeds
    `tolerance_pct` or any peak lands more than one reference bin from its
    target; the sweep stops at the first failure.

    Args:
        spectra: Optional dict that receives every computed spectrum keyed by
            factor (1 for the reference).
    """
    if not tolerance_pct > 0:
        raise InvalidParameterError(f"tolerance_pct must be > 0, got {tolerance_pct}")
    if int(max_exponent) != max_exponent or max_exponent < 1:
        raise InvalidParameterError(f"max_exponent must be a positive integer, got {max_exponent}")

    targets = [sig.envelope_hz for sig in fault_frequencies(motor)]
    filtered = bandpass_stage(signal, band, num_taps)
    reference = envelope_spectrum(filtered, 1, mode=mode, relative=relative)
    bin_width = reference.bin_width_hz
    if any(t < bin_width for t in targets):
        raise UndefinedReferenceError("fault envelope frequency is below one bin: no fault line to track")
    ref_peaks = [extract_peak(reference, t, window_hz) for t in targets]
    if any(p.magnitude == 0 for p in ref_peaks):
        raise UndefinedReferenceError("reference spectrum has no fault peak")
    if spectra is not None:
        spectra[1] = reference

    factors, errors, peaks, passed = [], [], [], []
    max_safe = 1
    for exponent in range(1, int(max_exponent) + 1):
        factor = 2 ** exponent
        test = envelope_spectrum(filtered, factor, mode=mode, relative=relative)
        _check_same_resolution(reference, test)
        readings = [read_peak(test, t, window_hz) for t in targets]
        error = float(np.mean(peak_errors_pct(ref_peaks, readings)))
        in_place = all(
            not p.lost and abs(p.found_hz - p.target_hz) <= bin_width * (1 + 1e-9) for p in readings
        )
        ok = error <= tolerance_pct and in_place
        logger.debug("factor %d: error %.4f%% in_place=%s", factor, error, in_place)

        factors.append(factor)
        errors.append(error)
        peaks.append(readings)
        passed.append(ok)
        if spectra is not None:
            spectra[factor] = test
        if not ok:
            break
        max_safe = factor

    return SweepReport(
        factors=factors,
        mean_error_pct=errors,
        peaks=peaks,
        max_safe_factor=max_safe,
        tolerance_pct=float(tolerance_pct),
        passed=passed,
        reference_peaks=ref_peaks,
        bin_width_hz=bin_width,
    )


def read_peak(spectrum: dsp.Spectrum, target_hz: float, window_hz: float) -> PeakReading:
    """Like extract_peak, but a target beyond Nyquist yields a lost reading.

    Lost readings have ``found_hz = nan`` and zero magnitude.
    """
    if target_hz + window_hz > spectrum.nyquist_hz:
        return PeakReading(target_hz=float(target_hz), found_hz=math.nan, magnitude=0.0)
    return extract_peak(spectrum, target_hz, window_hz)


def aggregate_errors(reports: Iterable[SweepReport]) -> dict:
    """Mean error per factor across several sweeps (e.g. signals x loads).

    Only sweeps that reached a factor contribute to it.
    """
    collected: dict = {}
    for report in reports:
        for factor, error in zip(report.factors, report.mean_error_pct):
            collected.setdefault(factor, []).append(error)
    return {factor: float(np.mean(v)) for factor, v in sorted(collected.items())}
