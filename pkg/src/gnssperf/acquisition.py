"""Coarse detection by parallel code phase search.

Per Doppler bin: wipe the carrier off (pointwise product against the
bin's replica), forward transform, multiply by the conjugate transform
of the sampled code, inverse transform, accumulate magnitude squared
over the noncoherent rounds. The (bin, lag) argmax yields Doppler and
code phase; the detection metric is the ratio of the peak power to the
strongest power outside one exclusion window around it in the winning
bin. Ties break toward the lowest bin index, then the lowest lag.

The conjugate code spectra are built once per (prn, fs, length,
precision) and shared read-only afterwards.

multiplications_performed counts the pointwise mixing products only:
two stages (carrier wipeoff, spectrum product) of N complex
multiplications per bin per round, i.e. the stage count the receiver
sizing arithmetic is based on (81840 per stage per bin at
fs=8.184 MHz with the full 10 ms coherent).
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

import numpy as np

from gnssperf import dsp
from gnssperf.buffers import IqBuffer, Precision
from gnssperf.cacode import CHIP_RATE_HZ, CODE_LENGTH, CaCode, generate_ca_code
from gnssperf.errors import InvalidInputError
from gnssperf.executor import EpochTask, ExecPlan, run_epochs
from gnssperf.gnss_signal import NcoState, carrier_replica, sample_code_replica

DEFAULT_DOPPLER_SPAN_HZ = 5000.0


def default_doppler_step_hz(coherent_ms: int) -> float:
    """Grid step 2/(3 T_coh), about 667 Hz at 1 ms."""
    return 2.0 / (3.0 * coherent_ms * 1e-3)


@dataclass(frozen=True)
class AcqConfig:
    doppler_min_hz: float = -DEFAULT_DOPPLER_SPAN_HZ
    doppler_max_hz: float = DEFAULT_DOPPLER_SPAN_HZ
    doppler_step_hz: float = field(default=0.0)
    coherent_ms: int = 1
    noncoherent_rounds: int = 10
    detection_threshold: float = 2.5
    exclusion_radius_samples: int = 0  # 0 means one chip worth of samples at use

    def __post_init__(self):
        if self.doppler_step_hz == 0.0:
            object.__setattr__(self, "doppler_step_hz", default_doppler_step_hz(self.coherent_ms))
        if self.doppler_min_hz > self.doppler_max_hz:
            raise InvalidInputError("doppler_min_hz must be <= doppler_max_hz")
        if self.doppler_step_hz <= 0:
            raise InvalidInputError("doppler_step_hz must be > 0")
        if self.coherent_ms < 1 or self.noncoherent_rounds < 1:
            raise InvalidInputError("coherent_ms and noncoherent_rounds must be >= 1")
        if self.detection_threshold <= 1:
            raise InvalidInputError("detection_threshold must be > 1")
        if self.exclusion_radius_samples < 0:
            raise InvalidInputError("exclusion_radius_samples must be >= 0")

    def doppler_bins_hz(self) -> np.ndarray:
        n = int(math.floor((self.doppler_max_hz - self.doppler_min_hz) / self.doppler_step_hz + 1e-9)) + 1
        return self.doppler_min_hz + self.doppler_step_hz * np.arange(n)


@dataclass(frozen=True)
class AcqResult:
    prn: int
    doppler_hz: float
    code_phase_samples: int
    peak_metric: float
    detected: bool
    bins_searched: int
    multiplications_performed: int


_code_spectrum_cache: dict = {}
_cache_lock = threading.Lock()


def conjugate_code_spectrum(prn: int, sample_rate_hz: float, n: int, precision: Precision):
    """conj(fft(code replica)) for one channel invocation, cached immutably."""
    key = (prn, float(sample_rate_hz), int(n), precision)
    spec = _code_spectrum_cache.get(key)
    if spec is not None:
        return spec
    with _cache_lock:
        spec = _code_spectrum_cache.get(key)
        if spec is None:
            code = generate_ca_code(prn)
            replica, _ = sample_code_replica(
                code, NcoState(), CHIP_RATE_HZ, sample_rate_hz, n, precision
            )
            bins = np.conj(dsp.fft(replica).bins)
            bins.setflags(write=False)
            _code_spectrum_cache[key] = bins
            spec = bins
    return spec


def samples_per_code_period(sample_rate_hz: float) -> int:
    return round(sample_rate_hz * CODE_LENGTH / CHIP_RATE_HZ)


def acquire_channel(samples: IqBuffer, code: CaCode, config: AcqConfig) -> AcqResult:
    """Search the Doppler/code-phase grid for one satellite."""
    fs = samples.sample_rate_hz
    precision = samples.precision
    n_coh = round(fs * config.coherent_ms * 1e-3)
    period = samples_per_code_period(fs)
    if len(samples) < period:
        raise InvalidInputError("buffer shorter than one code period")
    if len(samples) < n_coh * config.noncoherent_rounds:
        raise InvalidInputError(
            f"buffer holds {len(samples)} samples, "
            f"{n_coh * config.noncoherent_rounds} needed for the configured integration"
        )
    if n_coh < period:
        raise InvalidInputError("coherent window shorter than one code period")

    bins = config.doppler_bins_hz()
    code_spec_conj = conjugate_code_spectrum(code.prn, fs, n_coh, precision)
    lag_span = min(period, n_coh)
    power_map = np.zeros((bins.size, lag_span), dtype=precision.real_dtype)
    mults = 0

    blocks = [
        IqBuffer._wrap(samples.samples[r * n_coh : (r + 1) * n_coh], fs, precision)
        for r in range(config.noncoherent_rounds)
    ]
    for bi, f in enumerate(bins):
        replica, _ = carrier_replica(NcoState(), float(f), fs, n_coh, precision)
        for block in blocks:
            wiped = dsp.pointwise_multiply(block, replica)
            mults += n_coh
            spec = dsp.fft(wiped)
            prod = dsp.pointwise_multiply(
                spec, dsp.Spectrum._wrap(code_spec_conj, precision), conjugate_b=False
            )
            mults += n_coh
            corr = dsp.ifft(prod, fs)
            power_map[bi] += dsp.magnitude_sq(corr)[:lag_span]

    flat_idx = int(np.argmax(power_map))  # row-major: lowest bin, then lowest lag, wins ties
    bin_idx, lag = divmod(flat_idx, lag_span)
    peak = float(power_map[bin_idx, lag])

    radius = config.exclusion_radius_samples or math.ceil(fs / CHIP_RATE_HZ)
    row = power_map[bin_idx]
    excluded = (np.abs((np.arange(lag_span) - lag + lag_span // 2) % lag_span - lag_span // 2)) <= radius
    outside = row[~excluded]
    floor = float(outside.max()) if outside.size else 0.0
    metric = peak / floor if floor > 0 else float("inf")

    return AcqResult(
        prn=code.prn,
        doppler_hz=float(bins[bin_idx]),
        code_phase_samples=int(lag),
        peak_metric=metric,
        detected=metric >= config.detection_threshold,
        bins_searched=int(bins.size),
        multiplications_performed=mults,
    )


class _AcqChannelTask(EpochTask):
    """One-epoch wrapper: phase1 runs the search, phase2 reports completion."""

    def __init__(self, samples: IqBuffer, prn: int, config: AcqConfig):
        super().__init__(channel_id=prn)
        self._samples = samples
        self._prn = prn
        self._config = config
        self.result: AcqResult | None = None

    def phase1(self):
        self.result = acquire_channel(self._samples, generate_ca_code(self._prn), self._config)

    def phase2(self) -> bool:
        return True


def acquire_all(
    samples: IqBuffer,
    prns: list[int],
    config: AcqConfig,
    plan: ExecPlan | None = None,
) -> list[AcqResult]:
    """Run independent acquisition channels under an execution plan.

    Results are ordered like `prns` and are bit-identical to sequential
    per-channel invocation for any worker count or schedule.
    """
    if not prns:
        raise InvalidInputError("prns must be non-empty")
    if len(set(prns)) != len(prns):
        raise InvalidInputError("prns must be distinct")
    plan = plan or ExecPlan(worker_count=1)
    tasks = [_AcqChannelTask(samples, prn, config) for prn in prns]
    run_epochs(tasks, plan)
    return [t.result for t in tasks]
