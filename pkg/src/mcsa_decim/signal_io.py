"""
Signal and result files.

A signal is stored as raw little-endian float64 samples (``<base>.f64``)
next to a JSON header (``<base>.json``). A two-column CSV of
``time_s,amplitude`` is also accepted on input. Every file is written to a
temporary name first and renamed into place.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .dsp import Spectrum
from .errors import SignalFormatError
from .signal_model import TimeSeries

FORMAT_VERSION = 1
PAYLOAD_SUFFIX = ".f64"
HEADER_SUFFIX = ".json"
FLOAT_FMT = "%.17g"

PathLike = Union[str, os.PathLike]


def atomic_write(path: PathLike, data: Union[bytes, str]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data.encode() if isinstance(data, str) else data)
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def signal_paths(base: PathLike) -> tuple[Path, Path]:
    """Payload and header paths for a signal basename (suffix optional)."""
    base = Path(base)
    if base.suffix in (PAYLOAD_SUFFIX, HEADER_SUFFIX):
        base = base.with_suffix("")
    return base.with_name(base.name + PAYLOAD_SUFFIX), base.with_name(base.name + HEADER_SUFFIX)


def write_signal(base: PathLike, signal: TimeSeries, extra: Optional[dict] = None) -> tuple[Path, Path]:
    payload_path, header_path = signal_paths(base)
    header = {
        "format_version": FORMAT_VERSION,
        "sample_rate_hz": signal.sample_rate_hz,
        "n_samples": len(signal),
        "label": signal.label,
        "dtype": "<f8",
    }
    if extra:
        header["generator"] = extra
    atomic_write(payload_path, signal.samples.astype("<f8").tobytes())
    atomic_write(header_path, dump_json(header))
    return payload_path, header_path


def read_signal(path: PathLike) -> TimeSeries:
    """Load a binary signal (by basename, payload or header path) or a CSV.

    Raises:
        OSError: if a file cannot be read.
        SignalFormatError: on a corrupt header, a version mismatch or a
            payload whose length disagrees with the header.
    """
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return read_csv_signal(path)
    payload_path, header_path = signal_paths(path)
    try:
        header = json.loads(header_path.read_text())
    except json.JSONDecodeError as exc:
        raise SignalFormatError(f"{header_path}: header is not valid JSON ({exc})") from exc
    if not isinstance(header, dict):
        raise SignalFormatError(f"{header_path}: header must be a JSON object")
    if header.get("format_version") != FORMAT_VERSION:
        raise SignalFormatError(f"{header_path}: unsupported format_version {header.get('format_version')!r}")
    try:
        rate = float(header["sample_rate_hz"])
        n = int(header["n_samples"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SignalFormatError(f"{header_path}: missing or invalid field ({exc})") from exc

    raw = payload_path.read_bytes()
    if len(raw) % 8:
        raise SignalFormatError(f"{payload_path}: payload is not a whole number of float64 values")
    samples = np.frombuffer(raw, dtype="<f8")
    if samples.size != n:
        raise SignalFormatError(f"{payload_path}: header says {n} samples, payload holds {samples.size}")
    if n < 1 or not rate > 0:
        raise SignalFormatError(f"{header_path}: empty signal or non-positive sample rate")
    return TimeSeries(samples.astype(np.float64), rate, str(header.get("label", "")))


def read_csv_signal(path: PathLike, rtol: float = 1e-6) -> TimeSeries:
    """Read a ``time_s,amplitude`` CSV; a header row is optional.

    The sample rate is inferred from the time column, which must be uniform.
    """
    path = Path(path)
    times, values = [], []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                t, v = float(row[0]), float(row[1])
            except (ValueError, IndexError) as exc:
                if lineno == 1:
                    continue  # header row
                raise SignalFormatError(f"{path}:{lineno}: cannot parse row {row!r}") from exc
            times.append(t)
            values.append(v)
    if len(values) < 2:
        raise SignalFormatError(f"{path}: need at least two samples")
    times = np.asarray(times)
    steps = np.diff(times)
    dt = (times[-1] - times[0]) / (times.size - 1)
    if not dt > 0 or np.max(np.abs(steps - dt)) > rtol * dt + 1e-12:
        raise SignalFormatError(f"{path}: time column is not uniformly increasing")
    return TimeSeries(np.asarray(values), 1.0 / dt, path.stem)


def _csv_text(header: Sequence[str], columns: Iterable[np.ndarray], fmts: Sequence[str]) -> str:
    buf = io.StringIO()
    np.savetxt(buf, np.column_stack(list(columns)), fmt=list(fmts), delimiter=",",
               header=",".join(header), comments="")
    return buf.getvalue()


def write_spectrum_csv(path: PathLike, spectrum: Spectrum, fmax_hz: Optional[float] = None) -> None:
    freqs = spectrum.frequencies
    mags = spectrum.magnitudes
    if fmax_hz is not None:
        keep = freqs <= fmax_hz
        freqs, mags = freqs[keep], mags[keep]
    atomic_write(path, _csv_text(("frequency_hz", "magnitude"), (freqs, mags), (FLOAT_FMT, FLOAT_FMT)))


def read_spectrum_csv(path: PathLike) -> tuple[np.ndarray, np.ndarray]:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1]


def write_table_csv(path: PathLike, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([FLOAT_FMT % v if isinstance(v, float) else v for v in row])
    atomic_write(path, buf.getvalue())
