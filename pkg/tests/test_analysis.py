import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcsa_decim import analysis, dsp
from mcsa_decim.errors import EmptyOutputError, InvalidParameterError, UndefinedReferenceError
from mcsa_decim.signal_model import FaultSignalConfig, MotorParams, TimeSeries, synthesize_fault_current

NAMEPLATE_SLIP = 0.036111
ENVELOPE_HZ = 2 * NAMEPLATE_SLIP * 60  # 4.33332 Hz
# Slip that puts the envelope line exactly on bin 444 of a 102.4 s record.
EXACT_BIN_SLIP = 444 * 0.009765625 / 120


def make_spectrum(mags, bin_width=0.5):
    mags = np.asarray(mags, dtype=float)
    n = 2 * (mags.size - 1)
    return dsp.Spectrum(mags, bin_width, bin_width * n, n)


# ---------------------------------------------------------------------------
# Fault frequencies
# ---------------------------------------------------------------------------

def test_zero_slip_degenerates():
    for sig in analysis.fault_frequencies(MotorParams(60, 0.0, 3)):
        assert sig.lower_hz == sig.upper_hz == 60 and sig.envelope_hz == 0


@pytest.mark.parametrize(
    "k, lower, upper, envelope",
    [(1, 55.667, 64.333, 4.333), (2, 51.333, 68.667, 8.667)],
)
def test_nameplate_fault_frequencies(k, lower, upper, envelope):
    sig = analysis.fault_frequencies(MotorParams(60, NAMEPLATE_SLIP, 2))[k - 1]
    assert sig.k == k
    assert sig.lower_hz == pytest.approx(lower, abs=1e-3)
    assert sig.upper_hz == pytest.approx(upper, abs=1e-3)
    assert sig.envelope_hz == pytest.approx(envelope, abs=1e-3)


def test_rejects_non_positive_lower_sideband():
    with pytest.raises(InvalidParameterError):
        analysis.fault_frequencies(MotorParams(60, 0.25, 2))


@given(f=st.floats(1, 1000), s=st.floats(0, 0.999), k_max=st.integers(1, 5))
def test_sideband_symmetry(f, s, k_max):
    if 2 * s * k_max >= 1:
        return
    for sig in analysis.fault_frequencies(MotorParams(f, s, k_max)):
        assert sig.upper_hz + sig.lower_hz == pytest.approx(2 * f, rel=1e-12)
        assert sig.upper_hz - sig.lower_hz == pytest.approx(4 * s * sig.k * f, rel=1e-12, abs=1e-12)
        assert sig.envelope_hz == pytest.approx((sig.upper_hz - sig.lower_hz) / 2, rel=1e-12, abs=1e-12)
        assert min(sig.lower_hz, sig.upper_hz, sig.envelope_hz) >= 0


# ---------------------------------------------------------------------------
# Peak extraction
# ---------------------------------------------------------------------------

class TestExtractPeak:
    def test_single_tone(self):
        fs, n = 1024.0, 1 << 16
        t = np.arange(n) / fs
        spec = dsp.amplitude_spectrum(TimeSeries(np.sin(2 * np.pi * ENVELOPE_HZ * t), fs))
        peak = analysis.extract_peak(spec, ENVELOPE_HZ, 0.5)
        assert abs(peak.found_hz - ENVELOPE_HZ) <= spec.bin_width_hz

    def test_flat_zero_tie_goes_low(self):
        spec = make_spectrum(np.zeros(33))
        peak = analysis.extract_peak(spec, 5.0, 1.0)
        assert peak.magnitude == 0 and peak.found_hz == 4.0

    def test_clips_at_zero(self):
        spec = make_spectrum([3.0, 1.0, 2.0, 0.0, 0.0])
        assert analysis.extract_peak(spec, 0.0, 0.6).found_hz == 0.0

    @pytest.mark.parametrize("target, window", [(15.8, 0.5), (5.0, 0.1), (-1.0, 1.0)])
    def test_rejects_bad_window(self, target, window):
        with pytest.raises(InvalidParameterError):
            analysis.extract_peak(make_spectrum(np.ones(33)), target, window)

    def test_envelope_line_amplitude(self):
        # Closed form: envelope A(1 + m cos) carries A*m at the fault line;
        # each current sideband carries A*m/2. Exact-bin tone, no window.
        amp, depth = 2.0, 0.02
        config = FaultSignalConfig(
            motor=MotorParams(60, EXACT_BIN_SLIP, 1),
            carrier_amplitude=amp,
            modulation_depths=(depth,),
        )
        x = synthesize_fault_current(config)
        env_spec = dsp.amplitude_spectrum(dsp.remove_dc(dsp.hilbert_envelope(x)))
        line = analysis.fault_frequencies(config.motor)[0]
        peak = analysis.extract_peak(env_spec, line.envelope_hz, 0.5)
        assert peak.magnitude == pytest.approx(amp * depth, rel=0.05)

        current = dsp.amplitude_spectrum(x)
        for f in (line.lower_hz, line.upper_hz):
            side = analysis.extract_peak(current, f, 0.05)
            assert side.magnitude == pytest.approx(amp * depth / 2, rel=0.05)


# ---------------------------------------------------------------------------
# Spectrum error
# ---------------------------------------------------------------------------

class TestSpectrumError:
    ref = make_spectrum([0, 1, 5, 1, 0, 0, 2, 7, 2, 0, 0])

    def test_identical(self):
        assert analysis.spectrum_error(self.ref, self.ref, [1.0, 3.5], 0.5) == 0.0

    def test_uniform_scaling(self):
        test = make_spectrum(self.ref.magnitudes * 1.01)
        assert analysis.spectrum_error(self.ref, test, [1.0, 3.5], 0.5) == pytest.approx(1.0, abs=1e-9)

    @given(c=st.floats(1e-6, 1e6), noise=st.lists(st.floats(0, 2), min_size=11, max_size=11))
    def test_scale_equivariance(self, c, noise):
        test = make_spectrum(self.ref.magnitudes + np.asarray(noise))
        base = analysis.spectrum_error(self.ref, test, [1.0, 3.5], 0.5)
        scaled = analysis.spectrum_error(
            make_spectrum(self.ref.magnitudes * c), make_spectrum(test.magnitudes * c), [1.0, 3.5], 0.5
        )
        assert scaled == pytest.approx(base, rel=1e-12, abs=1e-12)

    def test_zero_reference(self):
        with pytest.raises(UndefinedReferenceError):
            analysis.spectrum_error(make_spectrum(np.zeros(11)), self.ref, [1.0], 0.5)

    def test_resolution_mismatch(self):
        with pytest.raises(InvalidParameterError):
            analysis.spectrum_error(self.ref, make_spectrum(self.ref.magnitudes, 0.25), [1.0], 0.5)

    def test_requires_targets(self):
        with pytest.raises(InvalidParameterError):
            analysis.spectrum_error(self.ref, self.ref, [], 0.5)

    def test_factor16_beats_factor32(self, default_signal, default_motor):
        ref = analysis.run_pipeline(default_signal, default_motor, 1)
        e16 = analysis.spectrum_error(ref, analysis.run_pipeline(default_signal, default_motor, 16), [ENVELOPE_HZ])
        e32 = analysis.spectrum_error(ref, analysis.run_pipeline(default_signal, default_motor, 32), [ENVELOPE_HZ])
        assert e16 < e32


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------

class TestPipeline:
    def test_factor_one_peak(self, default_signal, default_motor):
        spec = analysis.run_pipeline(default_signal, default_motor, 1)
        peak = analysis.extract_peak(spec, ENVELOPE_HZ, 0.5)
        assert abs(peak.found_hz - ENVELOPE_HZ) <= spec.bin_width_hz
        assert spec.op_count.total == 14942208

    def test_factor_sixteen_matches_reference(self, default_signal, default_motor):
        ref = analysis.run_pipeline(default_signal, default_motor, 1)
        test = analysis.run_pipeline(default_signal, default_motor, 16)
        p_ref = analysis.extract_peak(ref, ENVELOPE_HZ, 0.5)
        p_test = analysis.extract_peak(test, ENVELOPE_HZ, 0.5)
        assert p_test.found_hz == p_ref.found_hz
        assert analysis.spectrum_error(ref, test, [ENVELOPE_HZ]) <= analysis.DEFAULT_TOLERANCE_PCT

    def test_empty_after_decimation(self):
        x = TimeSeries(np.ones(4), 5120.0)
        with pytest.raises(EmptyOutputError):
            analysis.run_pipeline(x, MotorParams(), 4, num_taps=11)

    def test_rejects_non_power_of_two_factor(self, default_motor):
        x = TimeSeries(np.ones(64), 5120.0)
        with pytest.raises(InvalidParameterError):
            analysis.run_pipeline(x, default_motor, 3, num_taps=11)

    def test_relative_spectrum_reads_modulation_depth(self):
        config = FaultSignalConfig(motor=MotorParams(60, EXACT_BIN_SLIP, 1), carrier_amplitude=5.0)
        x = synthesize_fault_current(config)
        spec = analysis.run_pipeline(x, config.motor, 1)
        peak = analysis.extract_peak(spec, analysis.fault_frequencies(config.motor)[0].envelope_hz, 0.5)
        # Band-pass gain differs at the two sidebands, so allow for it.
        assert 0.015 < peak.magnitude < 0.021

    def test_absolute_error_follows_block_average_droop(self, default_signal, default_motor):
        # Independent prediction: first-order envelope line is the band-pass
        # gain weighted mean of the block-average response at both sidebands.
        taps = dsp.design_bandpass().taps
        n = np.arange(taps.size)

        def gain(f):
            return abs(np.sum(taps * np.exp(-2j * np.pi * f / 5120 * n)))

        def block(f, p):
            return abs(math.sin(math.pi * f * p / 5120) / (p * math.sin(math.pi * f / 5120)))

        lo, hi = 60 - ENVELOPE_HZ, 60 + ENVELOPE_HZ
        report = analysis.decimation_sweep(
            default_signal, default_motor, tolerance_pct=1e9, max_exponent=5, relative=False
        )
        for p, err in zip(report.factors, report.mean_error_pct):
            predicted = 100 * (1 - (gain(lo) * block(lo, p) + gain(hi) * block(hi, p)) / (gain(lo) + gain(hi)))
            assert err == pytest.approx(predicted, abs=0.05)
        # With absolute magnitudes the droop alone exceeds 1% at p=8.
        assert report.mean_error_pct[2] > 1.0


# ---------------------------------------------------------------------------
# Sweep
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def report(default_signal, default_motor):
    return analysis.decimation_sweep(default_signal, default_motor, tolerance_pct=1.0)


class TestSweep:
    def test_default_signal(self, report):
        assert report.factors[0] == 2
        assert report.max_safe_factor >= 8
        passing = [e for e, ok in zip(report.mean_error_pct, report.passed) if ok]
        assert passing == sorted(passing)
        for row, ok in zip(report.peaks, report.passed):
            if ok:
                assert all(abs(p.found_hz - ENVELOPE_HZ) <= report.bin_width_hz for p in row)

    def test_monotonic_termination(self, report):
        assert all(report.passed[:-1])
        passing = [f for f, ok in zip(report.factors, report.passed) if ok]
        assert report.max_safe_factor == (passing[-1] if passing else 1)

    def test_factors_are_powers_of_two(self, report):
        assert report.factors == [2 ** (i + 1) for i in range(len(report.factors))]

    def test_loose_tolerance_reaches_max_factor(self, default_signal, default_motor):
        report = analysis.decimation_sweep(default_signal, default_motor, tolerance_pct=1e9, max_exponent=6)
        assert all(report.passed)
        assert report.max_safe_factor == 64

    def test_folding_displaces_peak(self):
        # 24 Hz modulation on a 60 Hz carrier: at p=64 the 80 Hz output rate
        # folds the upper sideband to 4 Hz and the envelope line moves.
        motor = MotorParams(60, 0.2, 1)
        config = FaultSignalConfig(motor=motor, modulation_depths=(0.2,), duration_s=12.8)
        x = synthesize_fault_current(config)
        report = analysis.decimation_sweep(x, motor, tolerance_pct=1e9, max_exponent=7, band=(20, 110))
        assert report.factors[-1] == 64 and not report.passed[-1]
        displaced = report.peaks[-1][0]
        assert abs(displaced.found_hz - 24.0) > report.bin_width_hz
        assert report.max_safe_factor == 32

    def test_target_beyond_nyquist_is_lost(self):
        motor = MotorParams(60, 0.2, 1)
        x = synthesize_fault_current(
            FaultSignalConfig(motor=motor, modulation_depths=(0.2,), duration_s=12.8, noise_std=0)
        )
        filtered = analysis.bandpass_stage(x, (20, 110))
        spec = analysis.envelope_spectrum(filtered, 128)
        reading = analysis.read_peak(spec, 24.0, 0.5)
        assert reading.lost and reading.magnitude == 0
        assert reading.as_dict()["found_hz"] is None

    def test_invalid_arguments(self, default_motor):
        x = TimeSeries(np.ones(1024), 5120.0)
        with pytest.raises(InvalidParameterError):
            analysis.decimation_sweep(x, default_motor, tolerance_pct=-1)
        with pytest.raises(InvalidParameterError):
            analysis.decimation_sweep(x, default_motor, max_exponent=0)

    def test_degenerate_reference(self):
        x = synthesize_fault_current(FaultSignalConfig(motor=MotorParams(60, 0.0, 1), duration_s=6.4))
        with pytest.raises(UndefinedReferenceError):
            analysis.decimation_sweep(x, MotorParams(60, 0.0, 1))

    def test_spectra_collected(self):
        x = synthesize_fault_current(FaultSignalConfig(duration_s=12.8))
        spectra = {}
        report = analysis.decimation_sweep(x, MotorParams(), max_exponent=3, spectra=spectra)
        assert sorted(spectra) == [1] + report.factors


def test_aggregate_errors():
    a = analysis.SweepReport([2, 4], [0.1, 0.3], [[], []], 4, 1.0)
    b = analysis.SweepReport([2, 4, 8], [0.2, 0.5, 2.0], [[], [], []], 4, 1.0)
    assert analysis.aggregate_errors([a, b]) == pytest.approx({2: 0.15, 4: 0.4, 8: 2.0})


@settings(max_examples=6, deadline=None)
@given(slip=st.floats(0.01, 0.05), seed=st.integers(0, 1000))
def test_peak_location_invariant_under_safe_decimation(slip, seed):
    motor = MotorParams(60, slip, 1)
    x = synthesize_fault_current(
        FaultSignalConfig(motor=motor, noise_std=0.0, duration_s=25.6, rng_seed=seed)
    )
    target = analysis.fault_frequencies(motor)[0].envelope_hz
    bin_width = 1 / 25.6
    filtered = analysis.bandpass_stage(x)
    ref = analysis.extract_peak(analysis.envelope_spectrum(filtered, 1), target, 0.5)
    for p in (2, 4, 8, 16, 32):
        got = analysis.extract_peak(analysis.envelope_spectrum(filtered, p), target, 0.5)
        assert abs(got.found_hz - ref.found_hz) <= bin_width * (1 + 1e-9)
