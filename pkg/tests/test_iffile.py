import numpy as np
import pytest

from gnssperf.buffers import IqBuffer, Precision
from gnssperf.errors import FormatError, InvalidInputError
from gnssperf.gnss_signal import SignalSpec, synthesize_signal
from gnssperf.iffile import (
    MAGIC,
    read_if_file,
    read_truth_sidecar,
    write_if_file,
    write_truth_sidecar,
)

from conftest import random_iq


def test_float32_round_trip_is_lossless(tmp_path, rng):
    buf = random_iq(rng, 81840)
    path = tmp_path / "capture.gnssif"
    write_if_file(path, buf, "float32")
    back = read_if_file(path)
    assert back.sample_rate_hz == buf.sample_rate_hz
    assert back.precision is Precision.SINGLE
    assert np.array_equal(back.samples.view(np.float32), buf.samples.view(np.float32))


def test_int8_quantization_bound(tmp_path, rng):
    buf = random_iq(rng, 4096)
    path = tmp_path / "q.gnssif"
    write_if_file(path, buf, "int8")
    back = read_if_file(path)
    full_scale = float(np.max(np.abs(
        np.concatenate([buf.samples.real, buf.samples.imag]))))
    err = np.max(np.abs(back.samples - buf.samples))
    assert err <= full_scale / 127


def test_int16_round_trip_tighter_than_int8(tmp_path, rng):
    buf = random_iq(rng, 4096)
    p8 = tmp_path / "a.gnssif"
    p16 = tmp_path / "b.gnssif"
    write_if_file(p8, buf, "int8")
    write_if_file(p16, buf, "int16")
    e8 = np.max(np.abs(read_if_file(p8).samples - buf.samples))
    e16 = np.max(np.abs(read_if_file(p16).samples - buf.samples))
    assert e16 < e8


def test_corrupted_magic_rejected(tmp_path, rng):
    path = tmp_path / "bad.gnssif"
    write_if_file(path, random_iq(rng, 64), "float32")
    raw = bytearray(path.read_bytes())
    raw[:8] = b"NOTGNSS!"
    path.write_bytes(bytes(raw))
    with pytest.raises(FormatError):
        read_if_file(path)


def test_truncated_payload_rejected(tmp_path, rng):
    path = tmp_path / "trunc.gnssif"
    write_if_file(path, random_iq(rng, 64), "float32")
    raw = path.read_bytes()
    path.write_bytes(raw[:-3])  # rip off part of one I/Q pair
    with pytest.raises(FormatError):
        read_if_file(path)


def test_bad_version_and_short_file(tmp_path, rng):
    path = tmp_path / "v.gnssif"
    write_if_file(path, random_iq(rng, 16), "float32")
    raw = bytearray(path.read_bytes())
    raw[8] = 99
    path.write_bytes(bytes(raw))
    with pytest.raises(FormatError):
        read_if_file(path)
    path.write_bytes(MAGIC)
    with pytest.raises(FormatError):
        read_if_file(path)


def test_all_zero_buffer_int_write(tmp_path):
    buf = IqBuffer(np.zeros(32, dtype=np.complex64), 1e6)
    path = tmp_path / "z.gnssif"
    write_if_file(path, buf, "int8")
    back = read_if_file(path)
    assert np.array_equal(back.samples, buf.samples)


def test_unknown_sample_format_rejected(tmp_path, rng):
    with pytest.raises(InvalidInputError):
        write_if_file(tmp_path / "x", random_iq(rng, 8), "float64")


def test_truth_sidecar_round_trip(tmp_path):
    spec = SignalSpec(prn=7, doppler_hz=-1234.5, code_phase_samples=678.25,
                      carrier_phase_cycles=0.125, sample_rate_hz=8.184e6,
                      duration_s=0.01, noise_sigma=2.5, seed=99)
    path = tmp_path / "sig.gnssif"
    write_if_file(path, synthesize_signal(spec), "float32")
    write_truth_sidecar(path, spec)
    truth = read_truth_sidecar(path)
    assert truth["prn"] == 7
    assert truth["doppler_hz"] == -1234.5
    assert truth["code_phase_samples"] == 678.25
    assert truth["seed"] == 99
