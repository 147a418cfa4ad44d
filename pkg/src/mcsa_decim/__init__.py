"""Broken-rotor-bar detection by Hilbert envelope analysis of stator current,
and a study of how far the current can be decimated before the fault
signature degrades."""

from .analysis import (
    FaultSignature,
    PeakReading,
    SweepReport,
    decimation_sweep,
    extract_peak,
    fault_frequencies,
    run_pipeline,
    spectrum_error,
)
from .bench import CostRow, predicted_op_counts, run_cost_table
from .dsp import (
    ComplexSeries,
    FilterKernel,
    OpCount,
    Spectrum,
    amplitude_spectrum,
    apply_filter,
    decimate,
    design_bandpass,
    fft,
    hilbert_envelope,
    inverse_fft,
    remove_dc,
)
from .errors import (
    EmptyOutputError,
    InvalidLengthError,
    InvalidParameterError,
    McsaError,
    SignalFormatError,
    UndefinedReferenceError,
)
from .signal_model import (
    FaultSignalConfig,
    MotorParams,
    TimeSeries,
    slip_from_speed,
    synthesize_fault_current,
)

__version__ = "0.1.0"
