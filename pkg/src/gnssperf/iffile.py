"""Binary IF sample file format and ground-truth sidecars.

Layout (little-endian, version 1):

    offset  size  field
    0       8     magic "GNSSIF01"
    8       4     version (u32) = 1
    12      8     sample_rate_hz (f64)
    20      1     sample_format (0=int8, 1=int16, 2=float32)
    21      1     layout (0=interleaved I/Q)
    22      10    reserved, zero
    32      8     scale (f64): full-scale amplitude for integer formats

Payload is interleaved I,Q pairs in the sample format. float32 round
trips single-precision buffers losslessly; integer formats quantize
against the recorded full scale (max |component| at write time).

A synthesized file gets a small text sidecar (<file>.truth) recording
the generating parameters, which is what closes the synth->acquire loop
for the oracles.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from gnssperf.buffers import IqBuffer, Precision
from gnssperf.errors import FormatError, InvalidInputError
from gnssperf.gnss_signal import SignalSpec

MAGIC = b"GNSSIF01"
VERSION = 1
_HEADER = struct.Struct("<8sId2B10sd")

FORMAT_INT8 = 0
FORMAT_INT16 = 1
FORMAT_FLOAT32 = 2
_FORMATS = {"int8": FORMAT_INT8, "int16": FORMAT_INT16, "float32": FORMAT_FLOAT32}
_WIDTHS = {FORMAT_INT8: 1, FORMAT_INT16: 2, FORMAT_FLOAT32: 4}
_LIMITS = {FORMAT_INT8: 127, FORMAT_INT16: 32767}


def sample_format_code(name: str) -> int:
    try:
        return _FORMATS[name]
    except KeyError:
        raise InvalidInputError(f"unknown sample format {name!r}") from None


def write_if_file(path, buf: IqBuffer, sample_format: str = "float32") -> None:
    fmt = sample_format_code(sample_format)
    interleaved = np.empty(2 * len(buf), dtype=np.float64)
    interleaved[0::2] = buf.samples.real
    interleaved[1::2] = buf.samples.imag

    if fmt == FORMAT_FLOAT32:
        scale = 1.0
        payload = interleaved.astype("<f4").tobytes()
    else:
        limit = _LIMITS[fmt]
        peak = float(np.max(np.abs(interleaved))) if interleaved.size else 0.0
        scale = peak if peak > 0 else 1.0
        q = np.round(interleaved / scale * limit).astype(np.int64)
        q = np.clip(q, -limit, limit)
        payload = q.astype("<i1" if fmt == FORMAT_INT8 else "<i2").tobytes()

    header = _HEADER.pack(MAGIC, VERSION, buf.sample_rate_hz, fmt, 0, b"\x00" * 10, scale)
    Path(path).write_bytes(header + payload)


def read_if_file(path, precision: Precision = Precision.SINGLE) -> IqBuffer:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise FormatError("file shorter than the header")
    magic, version, fs, fmt, layout, _reserved, scale = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}")
    if layout != 0:
        raise FormatError(f"unsupported layout {layout}")
    if fmt not in _WIDTHS:
        raise FormatError(f"unknown sample format byte {fmt}")
    payload = raw[_HEADER.size :]
    width = _WIDTHS[fmt]
    if len(payload) % (2 * width) != 0:
        raise FormatError("payload truncated: not a whole number of I/Q pairs")

    if fmt == FORMAT_FLOAT32:
        flat = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    else:
        limit = _LIMITS[fmt]
        ints = np.frombuffer(payload, dtype="<i1" if fmt == FORMAT_INT8 else "<i2")
        flat = ints.astype(np.float64) * (scale / limit)
    samples = (flat[0::2] + 1j * flat[1::2]).astype(precision.complex_dtype)
    return IqBuffer._wrap(samples, fs, precision)


_TRUTH_FIELDS = (
    "prn",
    "doppler_hz",
    "code_phase_samples",
    "carrier_phase_cycles",
    "sample_rate_hz",
    "duration_s",
    "noise_sigma",
    "seed",
)


def truth_sidecar_path(if_path) -> Path:
    return Path(str(if_path) + ".truth")


def write_truth_sidecar(if_path, spec: SignalSpec) -> Path:
    lines = [f"{name} = {getattr(spec, name)!r}" for name in _TRUTH_FIELDS]
    p = truth_sidecar_path(if_path)
    p.write_text("\n".join(lines) + "\n", encoding="ascii")
    return p


def read_truth_sidecar(if_path) -> dict:
    p = truth_sidecar_path(if_path)
    out = {}
    for line in p.read_text(encoding="ascii").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _TRUTH_FIELDS:
            raise FormatError(f"unknown truth key {key!r}")
        out[key] = int(value) if key in ("prn", "seed") else float(value)
    return out
