"""Cover-signal ingestion and message packing.

Reads plain CSV sample files and WFDB format-212 ECG records (the MIT-BIH
arrhythmia packing: two 12-bit two's-complement samples per three bytes),
blocks signals into N-dimensional host vectors, and converts message byte
streams to and from coset-index symbols.  Embedded output is written as
full-precision CSV, never re-encoded to 212: embedded values are generally
not representable on the 12-bit ADC grid and re-quantizing would corrupt
the embedding.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

__all__ = [
    "SignalFormatError",
    "SignalBuffer",
    "WfdbHeader",
    "WfdbSignalInfo",
    "read_csv",
    "write_signal",
    "read_wfdb_header",
    "read_wfdb_212",
    "decode_212",
    "encode_212",
    "block_signal",
    "pack_message",
    "unpack_message",
    "synthetic_ecg",
]


class SignalFormatError(Exception):
    """Raised for malformed signal files (CSV or WFDB)."""


@dataclass(frozen=True)
class SignalBuffer:
    """A sequence of real samples in physical units plus provenance."""

    samples: np.ndarray
    sample_rate_hz: float
    channel_label: str = ""
    source: dict = field(default_factory=dict)

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        if samples.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        if samples.size and not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite")
        if not (self.sample_rate_hz > 0):
            raise ValueError("sample_rate_hz must be positive")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)


@dataclass(frozen=True)
class WfdbSignalInfo:
    file_name: str
    format_code: int
    gain: float
    baseline: int
    description: str = ""


@dataclass(frozen=True)
class WfdbHeader:
    record_name: str
    n_signals: int
    sampling_frequency: float
    n_samples: int
    signals: tuple


def read_csv(path) -> SignalBuffer:
    """Parse a CSV/one-per-line sample file; a single header line is allowed."""
    path = Path(path)
    samples = []
    header = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            tokens = [t for t in line.replace(",", " ").split() if t]
            try:
                values = [float(t) for t in tokens]
            except ValueError:
                if not samples and header is None:
                    header = line
                    continue
                raise SignalFormatError(
                    f"{path}: unparseable token on line {lineno}: {line!r}"
                )
            samples.extend(values)
    if not samples:
        raise SignalFormatError(f"{path}: no samples found")
    return SignalBuffer(
        samples=np.array(samples),
        sample_rate_hz=1.0,
        channel_label=header or "",
        source={"file": str(path), "format": "csv"},
    )


def write_signal(buffer: SignalBuffer, path, format: str = "CSV") -> None:
    """Write one sample per line at full precision (round-trip exact)."""
    if format.upper() != "CSV":
        raise ValueError(f"unsupported output format {format!r}")
    with open(path, "w", encoding="utf-8") as fh:
        for v in buffer.samples:
            fh.write(repr(float(v)))
            fh.write("\n")


def read_wfdb_header(path) -> WfdbHeader:
    """Parse a WFDB .hea file, restricted to format-212 signal lines."""
    path = Path(path)
    lines = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            lines.append(line)
    if not lines:
        raise SignalFormatError(f"{path}: empty header")
    head = lines[0].split()
    if len(head) < 2:
        raise SignalFormatError(f"{path}: malformed record line: {lines[0]!r}")
    record_name = head[0].split("/")[0]
    try:
        n_signals = int(head[1])
        fs = float(head[2].split("/")[0]) if len(head) > 2 else 250.0
        n_samples = int(head[3]) if len(head) > 3 else 0
    except ValueError:
        raise SignalFormatError(f"{path}: malformed record line: {lines[0]!r}")
    signals = []
    for line in lines[1:1 + n_signals]:
        fields = line.split()
        if len(fields) < 2:
            raise SignalFormatError(f"{path}: malformed signal line: {line!r}")
        fmt_token = fields[1]
        # strip xN/sN/dN modifiers; plain 212 only
        fmt_digits = fmt_token.split("x")[0].split(":")[0].split("+")[0]
        try:
            fmt = int(fmt_digits)
        except ValueError:
            raise SignalFormatError(f"{path}: bad format token {fmt_token!r}")
        if fmt != 212:
            raise SignalFormatError(
                f"{path}: unsupported WFDB format {fmt} (only plain 212 is supported)"
            )
        gain = 200.0
        baseline = None
        if len(fields) > 2:
            gtok = fields[2].split("/")[0]
            if "(" in gtok:
                gpart, bpart = gtok.split("(", 1)
                baseline = int(bpart.rstrip(")"))
                gtok = gpart
            gain = float(gtok) if gtok else 200.0
            if gain == 0.0:
                gain = 200.0
        adc_zero = int(fields[4]) if len(fields) > 4 else 0
        if baseline is None:
            baseline = adc_zero
        signals.append(WfdbSignalInfo(
            file_name=fields[0],
            format_code=fmt,
            gain=gain,
            baseline=baseline,
            description=" ".join(fields[9:]) if len(fields) > 9 else "",
        ))
    if len(signals) != n_signals:
        raise SignalFormatError(
            f"{path}: header declares {n_signals} signals, found {len(signals)}"
        )
    return WfdbHeader(
        record_name=record_name,
        n_signals=n_signals,
        sampling_frequency=fs,
        n_samples=n_samples,
        signals=tuple(signals),
    )


def decode_212(data: bytes) -> tuple:
    """Unpack format-212 bytes into two interleaved 12-bit sample streams.

    Layout per 3-byte frame: byte0 = low 8 bits of sample A; low nibble of
    byte1 = high 4 bits of A; high nibble of byte1 = high 4 bits of B;
    byte2 = low 8 bits of B.  Samples are sign-extended from 12 bits.
    """
    if len(data) % 3 != 0:
        raise SignalFormatError(
            f"truncated format-212 data: {len(data)} bytes is not a multiple of 3"
        )
    b = np.frombuffer(data, dtype=np.uint8)
    b0 = b[0::3].astype(np.int32)
    b1 = b[1::3].astype(np.int32)
    b2 = b[2::3].astype(np.int32)
    a = ((b1 & 0x0F) << 8) | b0
    c = ((b1 >> 4) << 8) | b2
    a = np.where(a >= 2048, a - 4096, a)
    c = np.where(c >= 2048, c - 4096, c)
    return a, c


def encode_212(first, second) -> bytes:
    """Inverse of decode_212; used to synthesize test records."""
    a = np.asarray(first, dtype=np.int64)
    c = np.asarray(second, dtype=np.int64)
    if a.shape != c.shape:
        raise ValueError("both sample streams must have equal length")
    if a.size and (a.min() < -2048 or a.max() > 2047 or c.min() < -2048 or c.max() > 2047):
        raise ValueError("samples must fit in 12-bit two's complement")
    ua = np.where(a < 0, a + 4096, a)
    uc = np.where(c < 0, c + 4096, c)
    out = np.empty(3 * a.size, dtype=np.uint8)
    out[0::3] = ua & 0xFF
    out[1::3] = ((uc >> 8) << 4) | (ua >> 8)
    out[2::3] = uc & 0xFF
    return out.tobytes()


def read_wfdb_212(header_path, dat_path=None, channel: int = 0) -> SignalBuffer:
    """Read one channel of a format-212 record in physical units.

    For 2-signal records the packed sample pairs alternate channel 0 and
    channel 1; for 1-signal records both halves belong to the same channel.
    """
    header = read_wfdb_header(header_path)
    if not (0 <= channel < header.n_signals):
        raise SignalFormatError(
            f"channel {channel} out of range for {header.n_signals}-signal record"
        )
    if header.n_signals > 2:
        raise SignalFormatError(
            "only 1- or 2-signal format-212 records are supported"
        )
    info = header.signals[channel]
    if dat_path is None:
        dat_path = Path(header_path).parent / header.signals[0].file_name
    with open(dat_path, "rb") as fh:
        data = fh.read()
    a, c = decode_212(data)
    if header.n_signals == 2:
        adc = a if channel == 0 else c
    else:
        adc = np.empty(a.size + c.size, dtype=np.int64)
        adc[0::2] = a
        adc[1::2] = c
    if header.n_samples:
        if adc.size < header.n_samples:
            raise SignalFormatError(
                f"{dat_path}: {adc.size} samples decoded, header declares "
                f"{header.n_samples}"
            )
        adc = adc[: header.n_samples]
    physical = (adc.astype(float) - info.baseline) / info.gain
    return SignalBuffer(
        samples=physical,
        sample_rate_hz=header.sampling_frequency,
        channel_label=info.description or f"ch{channel}",
        source={
            "file": str(dat_path),
            "format": "wfdb-212",
            "record": header.record_name,
            "channel": channel,
        },
    )


def block_signal(buffer: SignalBuffer, n: int) -> tuple:
    """Split into consecutive non-overlapping N-blocks; returns (blocks, dropped)."""
    if n < 1:
        raise ValueError("block dimension must be >= 1")
    total = buffer.samples.size
    count = total // n
    dropped = total - count * n
    blocks = buffer.samples[: count * n].reshape(count, n)
    return blocks, dropped


def pack_message(payload: bytes, bits_per_block: int) -> np.ndarray:
    """Split an MSB-first bit stream into k-bit symbols, zero-padded on the right."""
    k = bits_per_block
    if not (1 <= k <= 16):
        raise ValueError("bits_per_block must be in 1..16")
    if not payload:
        return np.zeros(0, dtype=np.int64)
    bits = np.unpackbits(np.frombuffer(payload, dtype=np.uint8))
    n_symbols = math.ceil(bits.size / k)
    padded = np.zeros(n_symbols * k, dtype=np.uint8)
    padded[: bits.size] = bits
    weights = 1 << np.arange(k - 1, -1, -1)
    return (padded.reshape(n_symbols, k) @ weights).astype(np.int64)


def unpack_message(symbols, bits_per_block: int, n_bytes: int) -> bytes:
    """Inverse of pack_message given the original payload length."""
    k = bits_per_block
    if not (1 <= k <= 16):
        raise ValueError("bits_per_block must be in 1..16")
    symbols = np.asarray(symbols, dtype=np.int64)
    if n_bytes == 0:
        return b""
    bits = ((symbols[:, None] >> np.arange(k - 1, -1, -1)) & 1).astype(np.uint8)
    bits = bits.reshape(-1)
    need = 8 * n_bytes
    if bits.size < need:
        raise ValueError(
            f"not enough symbols: {bits.size} bits for a {n_bytes}-byte payload"
        )
    return np.packbits(bits[:need]).tobytes()


def synthetic_ecg(n_samples: int, sample_rate_hz: float = 360.0,
                  seed: int = 0, heart_rate_bpm: float = 72.0) -> SignalBuffer:
    """Deterministic ECG-like excerpt: P/QRS/T bumps plus baseline wander.

    A stand-in cover for experiments when no real record is at hand;
    amplitudes are on the millivolt scale of typical ECG leads.
    """
    rng = np.random.default_rng(seed)
    t = np.arange(n_samples) / sample_rate_hz
    beat = 60.0 / heart_rate_bpm
    # per-beat jitter on timing and amplitude
    n_beats = int(t[-1] / beat) + 2 if n_samples else 0
    signal = np.zeros(n_samples)
    # (offset within beat [s], width [s], amplitude [mV])
    waves = [(-0.2, 0.025, 0.15),   # P
             (-0.03, 0.01, -0.12),  # Q
             (0.0, 0.012, 1.1),     # R
             (0.035, 0.012, -0.25), # S
             (0.25, 0.06, 0.3)]     # T
    for b in range(n_beats):
        center = b * beat * (1.0 + 0.03 * rng.standard_normal())
        amp = 1.0 + 0.05 * rng.standard_normal()
        for off, width, a in waves:
            signal += a * amp * np.exp(-0.5 * ((t - center - off) / width) ** 2)
    signal += 0.05 * np.sin(2 * np.pi * 0.25 * t)      # baseline wander
    signal += 0.01 * rng.standard_normal(n_samples)    # sensor noise
    return SignalBuffer(
        samples=signal,
        sample_rate_hz=sample_rate_hz,
        channel_label="synthetic",
        source={"format": "synthetic-ecg", "seed": seed},
    )
