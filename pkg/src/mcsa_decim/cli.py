"""
Command-line front end.

    mcsa-decim synth    write a synthetic faulty-current signal
    mcsa-decim analyze  envelope spectrum at one decimation factor
    mcsa-decim sweep    find the largest safe decimation factor
    mcsa-decim bench    FFT operation counts and timings per factor

Exit codes: 0 success, 2 usage or validation error, 3 I/O or format error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from . import analysis, bench, dsp, signal_io
from .errors import InvalidParameterError, McsaError, SignalFormatError
from .signal_model import (
    DEFAULT_DURATION_S,
    DEFAULT_MODULATION_DEPTH,
    DEFAULT_NOISE_STD,
    DEFAULT_SAMPLE_RATE_HZ,
    DEFAULT_SLIP,
    DEFAULT_SUPPLY_HZ,
    LOAD_SLIP_PRESETS,
    FaultSignalConfig,
    MotorParams,
    slip_from_speed,
    synthesize_fault_current,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3

log = logging.getLogger("mcsa_decim")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# Argument helpers
# ---------------------------------------------------------------------------

def _band(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LOW:HIGH in hertz, got {text!r}")
    return lo, hi


def _float_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _int_list(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _add_motor_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("motor")
    g.add_argument("--supply-hz", type=float, default=DEFAULT_SUPPLY_HZ, help="supply frequency f (Hz)")
    slip = g.add_mutually_exclusive_group()
    slip.add_argument("--slip", type=float, help=f"slip s (default {DEFAULT_SLIP})")
    slip.add_argument("--rpm", type=float, help="rotor speed; requires --sync-rpm")
    slip.add_argument("--load", type=int, choices=sorted(LOAD_SLIP_PRESETS),
                      help="slip preset for a load level in percent (model input)")
    g.add_argument("--sync-rpm", type=float, help="synchronous speed used with --rpm")
    g.add_argument("--kmax", type=int, default=1, help="highest fault harmonic order k")


def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("pipeline")
    g.add_argument("--band", type=_band, default=dsp.DEFAULT_BAND_HZ, metavar="LOW:HIGH",
                   help="band-pass edges in Hz (default 40:70)")
    g.add_argument("--taps", type=int, default=dsp.DEFAULT_NUM_TAPS, help="FIR length (odd)")
    g.add_argument("--mode", choices=dsp.DECIMATION_MODES, default="mean",
                   help="block averaging or keep-one-drop-rest decimation")
    g.add_argument("--absolute", action="store_true",
                   help="report absolute envelope magnitudes instead of modulation depth")
    g.add_argument("--window-hz", type=float, default=analysis.DEFAULT_WINDOW_HZ,
                   help="half-width of the peak search window")
    g.add_argument("--fmax", type=float, default=None, help="crop spectrum CSVs above this frequency")


def _motor_from_args(args) -> MotorParams:
    if args.rpm is not None:
        if args.sync_rpm is None:
            raise UsageError("--rpm requires --sync-rpm")
        slip = slip_from_speed(args.rpm, args.sync_rpm)
    elif args.sync_rpm is not None:
        raise UsageError("--sync-rpm is only meaningful with --rpm")
    elif args.load is not None:
        slip = LOAD_SLIP_PRESETS[args.load]
    elif args.slip is not None:
        slip = args.slip
    else:
        slip = DEFAULT_SLIP
    return MotorParams(supply_freq_hz=args.supply_hz, slip=slip, k_max=args.kmax)


def _motor_dict(motor: MotorParams) -> dict:
    return {"supply_freq_hz": motor.supply_freq_hz, "slip": motor.slip, "k_max": motor.k_max}


def _signal_dict(signal) -> dict:
    return {"label": signal.label, "sample_rate_hz": signal.sample_rate_hz, "n_samples": len(signal)}


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_synth(args) -> int:
    motor = _motor_from_args(args)
    depths = args.depth
    if len(depths) == 1:
        depths = depths + [0.0] * (motor.k_max - 1)
    elif len(depths) != motor.k_max:
        raise UsageError(f"--depth needs 1 or {motor.k_max} values")
    if not args.duration > 0:
        raise UsageError(f"--duration must be positive, got {args.duration}")
    config = FaultSignalConfig(
        motor=motor,
        carrier_amplitude=args.amplitude,
        modulation_depths=depths,
        modulation_phases=[0.0] * motor.k_max,
        noise_std=args.noise,
        sample_rate_hz=args.fs,
        duration_s=args.duration,
        rng_seed=args.seed,
    )
    signal = synthesize_fault_current(config)
    generator = {
        "motor": _motor_dict(motor),
        "carrier_amplitude": config.carrier_amplitude,
        "modulation_depths": list(config.modulation_depths),
        "noise_std": config.noise_std,
        "duration_s": config.duration_s,
        "rng_seed": config.rng_seed,
    }
    payload, header = signal_io.write_signal(args.out, signal, extra=generator)
    print(f"wrote {len(signal)} samples at {signal.sample_rate_hz:g} Hz to {payload} (+ {header.name})")
    return EXIT_OK


def cmd_analyze(args) -> int:
    motor = _motor_from_args(args)
    signal = signal_io.read_signal(args.signal)
    if not dsp.is_power_of_two(args.factor):
        raise UsageError(f"--factor must be a power of two, got {args.factor}")
    faults = analysis.fault_frequencies(motor)
    spectrum = analysis.run_pipeline(
        signal, motor, args.factor, band=args.band, num_taps=args.taps,
        mode=args.mode, relative=not args.absolute,
    )
    peaks = [analysis.read_peak(spectrum, f.envelope_hz, args.window_hz) for f in faults]

    out = Path(args.out)
    report = {
        "format_version": 1,
        "signal": _signal_dict(signal),
        "motor": _motor_dict(motor),
        "factor": args.factor,
        "band_hz": list(args.band),
        "num_taps": args.taps,
        "mode": args.mode,
        "relative": not args.absolute,
        "decimated": {"sample_rate_hz": spectrum.source_rate_hz, "n_samples": spectrum.source_len},
        "bin_width_hz": spectrum.bin_width_hz,
        "faults": [f.as_dict() for f in faults],
        "peaks": [p.as_dict() for p in peaks],
        "op_count": spectrum.op_count.as_dict(),
    }
    csv_path = out.with_name(out.name + ".spectrum.csv")
    json_path = out.with_name(out.name + ".report.json")
    signal_io.write_spectrum_csv(csv_path, spectrum, args.fmax)
    signal_io.atomic_write(json_path, signal_io.dump_json(report))

    for p in peaks:
        found = "lost" if p.lost else f"{p.found_hz:.6f} Hz"
        print(f"target {p.target_hz:.6f} Hz -> {found}, magnitude {p.magnitude:.6g}")
    print(f"wrote {csv_path} and {json_path}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    motor = _motor_from_args(args)
    if not args.tolerance_pct > 0:
        raise UsageError(f"--tolerance-pct must be positive, got {args.tolerance_pct}")
    if args.max_exp < 1:
        raise UsageError(f"--max-exp must be >= 1, got {args.max_exp}")
    signal = signal_io.read_signal(args.signal)
    spectra: dict = {}
    report = analysis.decimation_sweep(
        signal, motor, tolerance_pct=args.tolerance_pct, max_exponent=args.max_exp,
        band=args.band, num_taps=args.taps, window_hz=args.window_hz,
        mode=args.mode, relative=not args.absolute, spectra=spectra,
    )

    out = Path(args.out)
    body = {
        "format_version": 1,
        "signal": _signal_dict(signal),
        "motor": _motor_dict(motor),
        "band_hz": list(args.band),
        "num_taps": args.taps,
        "mode": args.mode,
        "relative": not args.absolute,
        "window_hz": args.window_hz,
        "targets_hz": [p.target_hz for p in report.reference_peaks],
    }
    body.update(report.as_dict())
    signal_io.atomic_write(out / "sweep_report.json", signal_io.dump_json(body))
    signal_io.write_table_csv(
        out / "error_vs_factor.csv",
        ("factor", "mean_error_pct"),
        list(zip(report.factors, report.mean_error_pct)),
    )
    for factor, spectrum in sorted(spectra.items()):
        signal_io.write_spectrum_csv(out / f"spectrum_p{factor}.csv", spectrum, args.fmax)

    print(f"{'factor':>6}  {'error %':>10}  status")
    for factor, error, ok in zip(report.factors, report.mean_error_pct, report.passed):
        print(f"{factor:>6}  {error:>10.4f}  {'pass' if ok else 'FAIL'}")
    print(f"max safe factor: {report.max_safe_factor} (tolerance {report.tolerance_pct:g}%)")
    return EXIT_OK


BENCH_COLUMNS = ("factor", "n_samples", "mults", "adds", "total_ops",
                 "mean_time_ms", "std_time_ms", "repetitions")


def cmd_bench(args) -> int:
    if args.reps < 1:
        raise UsageError(f"--reps must be >= 1, got {args.reps}")
    rows = bench.run_cost_table(
        base_n=args.base_n, base_rate_hz=args.fs, factors=args.factors,
        repetitions=args.reps, rng_seed=args.seed,
    )
    for row in rows:
        if row.measured_ops != row.predicted_ops:
            raise RuntimeError(f"counted ops differ from closed form at factor {row.factor}")
    table = [
        (r.factor, r.n_samples, r.measured_ops.complex_multiplications,
         r.measured_ops.complex_additions, r.measured_ops.total,
         f"{r.mean_time_ms:.3f}", f"{r.std_time_ms:.3f}", r.repetitions)
        for r in rows
    ]
    out = Path(args.out)
    csv_path = out if out.suffix == ".csv" else out.with_name(out.name + ".csv")
    signal_io.write_table_csv(csv_path, BENCH_COLUMNS, table)

    print(f"{'factor':>6} {'samples':>8} {'rate Hz':>8} {'mults':>9} {'adds':>9} {'total':>9} {'mean ms':>9} {'std ms':>8}")
    for r in rows:
        print(f"{r.factor:>6} {r.n_samples:>8} {r.sample_rate_hz:>8g} "
              f"{r.measured_ops.complex_multiplications:>9} {r.measured_ops.complex_additions:>9} "
              f"{r.measured_ops.total:>9} {r.mean_time_ms:>9.3f} {r.std_time_ms:>8.3f}")
    print(f"wrote {csv_path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mcsa-decim", description=__doc__.split("\n\n")[0].strip())
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write a synthetic faulty-current signal")
    p.add_argument("--fs", type=float, default=DEFAULT_SAMPLE_RATE_HZ, help="sample rate (Hz)")
    p.add_argument("--duration", type=float, default=DEFAULT_DURATION_S, help="record length (s)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="signal", help="output basename (.f64 payload + .json header)")
    p.add_argument("--amplitude", type=float, default=1.0, help="carrier amplitude")
    p.add_argument("--depth", type=_float_list, default=[DEFAULT_MODULATION_DEPTH],
                   help="modulation depth(s) m_k, comma separated")
    p.add_argument("--noise", type=float, default=DEFAULT_NOISE_STD, help="noise standard deviation")
    _add_motor_flags(p)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("analyze", help="envelope spectrum at one decimation factor")
    p.add_argument("signal", help="signal basename, .f64/.json path, or time,amplitude CSV")
    p.add_argument("--factor", type=int, default=1)
    p.add_argument("--out", default="analysis", help="output basename")
    _add_motor_flags(p)
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sweep", help="find the largest safe decimation factor")
    p.add_argument("signal")
    p.add_argument("--tolerance-pct", type=float, default=analysis.DEFAULT_TOLERANCE_PCT)
    p.add_argument("--max-exp", type=int, default=analysis.DEFAULT_MAX_EXPONENT)
    p.add_argument("--out", default="sweep", help="output directory")
    _add_motor_flags(p)
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bench", help="FFT operation counts and timings per factor")
    p.add_argument("--reps", type=int, default=bench.DEFAULT_REPETITIONS)
    p.add_argument("--base-n", type=int, default=bench.DEFAULT_BASE_N)
    p.add_argument("--fs", type=float, default=bench.DEFAULT_BASE_RATE_HZ, help="base sample rate (Hz)")
    p.add_argument("--factors", type=_int_list, default=list(bench.DEFAULT_FACTORS))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="cost_table", help="output CSV path")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, InvalidParameterError) as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, SignalFormatError) as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_IO
    except McsaError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
