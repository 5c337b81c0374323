"""NCO-driven replica generation and synthetic IF signal synthesis.

Replica generation is the iterative phase-accumulator loop of a
hardware NCO, realized over exact fixed-point phase (see kernels.py),
which is what makes generation split at any sample boundary
bit-identical to a single long run.

Synthesis produces complex baseband with a known truth: Doppler applied
as a complex carrier rotation, and the code delayed by offsetting the
code NCO start phase (floor-indexed chips, no interpolation) at the
nominal chipping rate. Keeping the code at the nominal rate makes the
injected delay recoverable exactly by correlation: at a commensurate
sample rate the chip transitions of signal and replica share one grid,
so the discrete peak cannot be tipped off the true lag by a
parts-per-million rate perturbation.

Noise is reproducible everywhere: PCG64(seed) uniforms pushed through
the Box-Muller transform, one (u1, u2) pair per complex sample. The
generator and transform are pinned so fixtures are bit-stable across
runs and platforms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from gnssperf import kernels
from gnssperf.buffers import IqBuffer, Precision
from gnssperf.cacode import CHIP_RATE_HZ, CODE_LENGTH, CaCode, generate_ca_code
from gnssperf.errors import InvalidInputError

L1_CARRIER_HZ = 1575.42e6


@dataclass(frozen=True)
class NcoState:
    """Phase accumulator state: cycles in [0,1) for carrier, chips in [0,1023) for code."""

    phase: float = 0.0
    step_per_sample: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.phase) or not np.isfinite(self.step_per_sample):
            raise InvalidInputError("NcoState fields must be finite")


def carrier_replica(
    nco: NcoState,
    freq_hz: float,
    sample_rate_hz: float,
    n: int,
    precision: Precision = Precision.SINGLE,
) -> tuple[IqBuffer, NcoState]:
    """Generate out[k] = exp(-2pi i (phase0 + k*freq/fs)) and the continued state.

    This is the wipeoff replica: mixing a received carrier at +freq
    against it lands at baseband.
    """
    if n < 1:
        raise InvalidInputError("carrier_replica needs n >= 1")
    if sample_rate_hz <= 0:
        raise InvalidInputError("sample_rate_hz must be > 0")
    p0 = kernels.carrier_phase_to_fixed(nco.phase)
    step = kernels.carrier_step_to_fixed(freq_hz, sample_rate_hz)
    out = np.empty(n, dtype=precision.complex_dtype)
    p_end = kernels.carrier_replica_fixed(p0, step, n, out)
    new_state = NcoState(
        phase=p_end / kernels.CARRIER_SCALE, step_per_sample=freq_hz / sample_rate_hz
    )
    return IqBuffer._wrap(out, sample_rate_hz, precision), new_state


def sample_code_replica(
    code: CaCode,
    nco: NcoState,
    chip_rate_hz: float,
    sample_rate_hz: float,
    n: int,
    precision: Precision = Precision.SINGLE,
) -> tuple[IqBuffer, NcoState]:
    """Sample the spreading code at the NCO chip phase (floor-indexed, +/-1 real)."""
    if n < 1:
        raise InvalidInputError("sample_code_replica needs n >= 1")
    if chip_rate_hz <= 0 or sample_rate_hz <= 0:
        raise InvalidInputError("rates must be > 0")
    p0 = kernels.code_phase_to_fixed(nco.phase)
    step = kernels.code_step_to_fixed(chip_rate_hz, sample_rate_hz)
    idx = np.empty(n, dtype=np.int64)
    p_end = kernels.code_chip_indices(p0, step, n, idx)
    out = code.chips[idx].astype(precision.complex_dtype)
    new_state = NcoState(
        phase=p_end / kernels.CODE_SCALE, step_per_sample=chip_rate_hz / sample_rate_hz
    )
    return IqBuffer._wrap(out, sample_rate_hz, precision), new_state


@dataclass(frozen=True)
class SignalSpec:
    """Ground-truth description of one synthetic satellite signal."""

    prn: int
    doppler_hz: float = 0.0
    code_phase_samples: float = 0.0
    carrier_phase_cycles: float = 0.0
    sample_rate_hz: float = 8.184e6
    duration_s: float = 10e-3
    noise_sigma: float = 0.0
    seed: int = 0
    precision: Precision = Precision.SINGLE

    def __post_init__(self):
        if not 1 <= self.prn <= 32:
            raise InvalidInputError("prn must be in 1..32")
        if self.sample_rate_hz <= 0 or self.duration_s <= 0:
            raise InvalidInputError("sample rate and duration must be > 0")
        if self.noise_sigma < 0:
            raise InvalidInputError("noise_sigma must be >= 0")
        if not 0 <= self.code_phase_samples < self.samples_per_code_period:
            raise InvalidInputError("code_phase_samples must be < one code period of samples")

    @property
    def n_samples(self) -> int:
        return round(self.sample_rate_hz * self.duration_s)

    @property
    def chip_rate_hz(self) -> float:
        return CHIP_RATE_HZ

    @property
    def samples_per_code_period(self) -> float:
        return self.sample_rate_hz * CODE_LENGTH / CHIP_RATE_HZ


def gaussian_pairs(rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Box-Muller: n independent N(0,1) pairs from PCG64 uniforms."""
    u1 = 1.0 - rng.random(n)  # (0, 1], keeps log finite
    u2 = rng.random(n)
    r = np.sqrt(-2.0 * np.log(u1))
    theta = 2.0 * np.pi * u2
    return r * np.cos(theta), r * np.sin(theta)


def add_awgn(buf: IqBuffer, sigma: float, seed: int) -> IqBuffer:
    """Add complex white Gaussian noise, std sigma per component; sigma=0 is identity."""
    if sigma < 0:
        raise InvalidInputError("sigma must be >= 0")
    if sigma == 0:
        return buf
    rng = np.random.Generator(np.random.PCG64(seed))
    zi, zq = gaussian_pairs(rng, len(buf))
    noisy = buf.samples + (sigma * zi + 1j * (sigma * zq)).astype(buf.precision.complex_dtype)
    return IqBuffer._wrap(noisy.astype(buf.precision.complex_dtype), buf.sample_rate_hz, buf.precision)


def synthesize_signal(spec: SignalSpec) -> IqBuffer:
    """Delayed code replica times Doppler-rotated carrier, plus seeded AWGN.

    The transmitted carrier is the conjugate of the wipeoff replica:
    exp(+2pi i (carrier_phase + k*doppler/fs)). The code delay is
    realized by starting the code NCO at -code_phase_samples worth of
    chips, so a correlator peaks exactly at code_phase_samples lag.
    """
    n = spec.n_samples
    code = generate_ca_code(spec.prn)
    chips_per_sample = spec.chip_rate_hz / spec.sample_rate_hz
    code_phase0 = (-spec.code_phase_samples * chips_per_sample) % CODE_LENGTH
    code_buf, _ = sample_code_replica(
        code,
        NcoState(phase=code_phase0),
        spec.chip_rate_hz,
        spec.sample_rate_hz,
        n,
        spec.precision,
    )
    carrier_buf, _ = carrier_replica(
        NcoState(phase=(-spec.carrier_phase_cycles) % 1.0),
        -spec.doppler_hz,
        spec.sample_rate_hz,
        n,
        spec.precision,
    )
    clean = kernels.pointwise_multiply_arrays(code_buf.samples, carrier_buf.samples, False)
    signal = IqBuffer._wrap(clean, spec.sample_rate_hz, spec.precision)
    return add_awgn(signal, spec.noise_sigma, spec.seed)
