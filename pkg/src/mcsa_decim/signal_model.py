"""
Synthetic stator-current signals for broken-rotor-bar studies.

A broken bar modulates the amplitude of the stator current at twice the
slip frequency (and its harmonics), so the faulty current is modelled as

    x(t) = A * (1 + sum_k m_k * cos(2*pi*2*k*s*f*t + phi_k)) * cos(2*pi*f*t) + n(t)

with n(t) white Gaussian noise. The ground-truth fault frequencies are
therefore known exactly, which is what the decimation study needs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidParameterError

# Nameplate of the reference machine: 4 poles, 60 Hz, 1735 rpm at full load.
NAMEPLATE_SYNC_RPM = 1800.0
NAMEPLATE_RPM = 1735.0

DEFAULT_SUPPLY_HZ = 60.0
DEFAULT_SLIP = 0.036111
DEFAULT_SAMPLE_RATE_HZ = 5120.0
DEFAULT_DURATION_S = 102.4
DEFAULT_MODULATION_DEPTH = 0.02
DEFAULT_NOISE_STD = 0.005

# Slip presets per load level, scaled proportionally from full-load slip.
# These are model inputs, not measured values.
LOAD_SLIP_PRESETS = {
    50: 0.018056,
    80: 0.028889,
    100: 0.036111,
}


def _frozen_array(values, dtype=np.float64) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class MotorParams:
    """Supply frequency, slip and highest fault harmonic order of a motor."""

    supply_freq_hz: float = DEFAULT_SUPPLY_HZ
    slip: float = DEFAULT_SLIP
    k_max: int = 1

    def __post_init__(self):
        if not self.supply_freq_hz > 0:
            raise InvalidParameterError(f"supply_freq_hz must be > 0, got {self.supply_freq_hz}")
        if not 0 <= self.slip < 1:
            raise InvalidParameterError(f"slip must be in [0, 1), got {self.slip}")
        if int(self.k_max) != self.k_max or self.k_max < 1:
            raise InvalidParameterError(f"k_max must be a positive integer, got {self.k_max}")


@dataclass(frozen=True)
class TimeSeries:
    """Uniformly sampled real signal."""

    samples: np.ndarray
    sample_rate_hz: float
    label: str = ""

    def __post_init__(self):
        samples = _frozen_array(self.samples)
        if samples.ndim != 1 or samples.size < 1:
            raise InvalidParameterError("samples must be a non-empty 1-D sequence")
        if not self.sample_rate_hz > 0:
            raise InvalidParameterError(f"sample_rate_hz must be > 0, got {self.sample_rate_hz}")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate_hz", float(self.sample_rate_hz))

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz

    def times(self) -> np.ndarray:
        return np.arange(self.samples.size) / self.sample_rate_hz


@dataclass(frozen=True)
class FaultSignalConfig:
    """Parameters of one synthetic faulty-current record.

    The defaults reproduce the acquisition geometry of the reference test
    bench (5120 Hz for 102.4 s, i.e. 524288 samples) at full load.
    """

    motor: MotorParams = field(default_factory=MotorParams)
    carrier_amplitude: float = 1.0
    modulation_depths: Sequence[float] = (DEFAULT_MODULATION_DEPTH,)
    modulation_phases: Sequence[float] = (0.0,)
    noise_std: float = DEFAULT_NOISE_STD
    sample_rate_hz: float = DEFAULT_SAMPLE_RATE_HZ
    duration_s: float = DEFAULT_DURATION_S
    rng_seed: int = 0

    def __post_init__(self):
        depths = tuple(float(m) for m in self.modulation_depths)
        phases = tuple(float(p) for p in self.modulation_phases)
        object.__setattr__(self, "modulation_depths", depths)
        object.__setattr__(self, "modulation_phases", phases)
        if not self.sample_rate_hz > 2 * self.motor.supply_freq_hz:
            raise InvalidParameterError(
                f"sample_rate_hz={self.sample_rate_hz} does not exceed twice the supply frequency"
            )
        if not self.duration_s > 0:
            raise InvalidParameterError(f"duration_s must be > 0, got {self.duration_s}")
        if len(depths) != self.motor.k_max or len(phases) != self.motor.k_max:
            raise InvalidParameterError(
                f"expected {self.motor.k_max} modulation depths and phases, "
                f"got {len(depths)} and {len(phases)}"
            )
        if any(m < 0 for m in depths):
            raise InvalidParameterError("modulation depths must be non-negative")
        if self.noise_std < 0:
            raise InvalidParameterError(f"noise_std must be >= 0, got {self.noise_std}")
        if round(self.sample_rate_hz * self.duration_s) < 1:
            raise InvalidParameterError("configuration yields no samples")

    @property
    def n_samples(self) -> int:
        return int(round(self.sample_rate_hz * self.duration_s))


def slip_from_speed(rotor_rpm: float, sync_rpm: float) -> float:
    """Slip of a rotor turning at `rotor_rpm` against a synchronous speed `sync_rpm`."""
    if not sync_rpm > 0 or not rotor_rpm > 0:
        raise InvalidParameterError("speeds must be positive")
    if rotor_rpm > sync_rpm:
        raise InvalidParameterError(f"rotor speed {rotor_rpm} exceeds synchronous speed {sync_rpm}")
    return (sync_rpm - rotor_rpm) / sync_rpm


def synchronous_rpm(supply_freq_hz: float, poles: int) -> float:
    """Synchronous speed in rev/min of a `poles`-pole machine."""
    if not supply_freq_hz > 0 or poles < 2 or poles % 2:
        raise InvalidParameterError("need a positive supply frequency and an even pole count")
    return 120.0 * supply_freq_hz / poles


def synthesize_fault_current(config: FaultSignalConfig) -> TimeSeries:
    """Generate an amplitude-modulated stator current with additive noise.

    Args:
        config: Signal parameters. Identical configs (seed included) give
            bit-identical output.

    Returns:
        TimeSeries with exactly ``round(sample_rate_hz * duration_s)`` samples.
    """
    motor = config.motor
    t = np.arange(config.n_samples) / config.sample_rate_hz
    f, s = motor.supply_freq_hz, motor.slip

    modulation = np.ones_like(t)
    for k, (depth, phase) in enumerate(zip(config.modulation_depths, config.modulation_phases), 1):
        if depth:
            modulation += depth * np.cos(2 * np.pi * 2 * k * s * f * t + phase)

    x = config.carrier_amplitude * modulation * np.cos(2 * np.pi * f * t)
    if config.noise_std > 0:
        rng = np.random.default_rng(config.rng_seed)
        x = x + rng.normal(0.0, config.noise_std, size=t.size)

    label = f"synthetic f={f:g}Hz s={s:g} seed={config.rng_seed}"
    return TimeSeries(x, config.sample_rate_hz, label)
