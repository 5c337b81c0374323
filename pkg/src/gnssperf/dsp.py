"""Precision-parameterized DSP kernels: transforms, mixing, correlation.

Conventions fixed here and relied on everywhere else:

* forward FFT is unnormalized, the inverse carries the 1/N factor, so
  fft(impulse) = ones and the circular correlation identity
  ifft(fft(x) * conj(fft(y))) holds without scale fudging,
* transforms run at native length; arbitrary composite sizes are
  supported (81840 = 2^4*3*5*11*31 included), no power-of-two padding,
* every transform submission (single or batch) bumps the backend
  dispatch counters, which is how callers prove "no transforms on the
  tracking path" and "one submission per batch".

The scalar/accelerated split is the paper-style minimum-iteration gate:
below ``ComputePathPolicy.min_iterations`` plain Python loops run,
otherwise the kernel path (numba or vectorized numpy, see kernels.py).
Elementwise operations return bit-identical results on every path; the
dot product accumulates sequentially left-to-right on all paths as its
documented reduction order.
"""

from __future__ import annotations

import math
import threading
from typing import NamedTuple, Union

import numpy as np
from scipy import fft as _sfft

from gnssperf import kernels
from gnssperf.buffers import ComputePath, ComputePathPolicy, IqBuffer, Precision, Spectrum
from gnssperf.errors import InvalidInputError

DEFAULT_POLICY = ComputePathPolicy(min_iterations=64)
_active_policy = DEFAULT_POLICY


def set_min_iterations(min_iterations: int) -> None:
    """Replace the process-wide default compute-path policy."""
    global _active_policy
    _active_policy = ComputePathPolicy(min_iterations=min_iterations)


def active_policy() -> ComputePathPolicy:
    return _active_policy


class TransformCounters(NamedTuple):
    fft_calls: int
    ifft_calls: int
    batch_calls: int

    @property
    def total_submissions(self):
        return self.fft_calls + self.ifft_calls + self.batch_calls


class TransformBackend:
    """FFT backend wrapper counting dispatch submissions.

    The counters are the only shared mutable state in this module; they
    are lock-protected so concurrent channels may submit freely.
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._fft = 0
        self._ifft = 0
        self._batch = 0

    def counters(self) -> TransformCounters:
        with self._lock:
            return TransformCounters(self._fft, self._ifft, self._batch)

    def reset(self):
        with self._lock:
            self._fft = 0
            self._ifft = 0
            self._batch = 0

    def fft(self, arr: np.ndarray) -> np.ndarray:
        with self._lock:
            self._fft += 1
        return _sfft.fft(arr)

    def ifft(self, arr: np.ndarray) -> np.ndarray:
        with self._lock:
            self._ifft += 1
        return _sfft.ifft(arr)

    def fft_batch(self, arr2d: np.ndarray) -> np.ndarray:
        # one submission regardless of how many rows ride in it
        with self._lock:
            self._batch += 1
        return _sfft.fft(arr2d, axis=1)


BACKEND = TransformBackend()


def select_compute_path(length: int, policy: ComputePathPolicy | None = None) -> ComputePath:
    """Scalar loop below the minimum-iteration threshold, accelerated at or above."""
    policy = policy or _active_policy
    return ComputePath.SCALAR_LOOP if length < policy.min_iterations else ComputePath.ACCELERATED


def fft(buf: IqBuffer) -> Spectrum:
    """Forward DFT, unnormalized: bins[k] = sum_n x[n] exp(-2pi i kn/N)."""
    if len(buf) < 1:
        raise InvalidInputError("fft needs length >= 1")
    return Spectrum._wrap(BACKEND.fft(buf.samples), buf.precision)


def ifft(spec: Spectrum, sample_rate_hz: float = 1.0) -> IqBuffer:
    """Inverse DFT with the 1/N normalization; exact inverse of fft()."""
    if len(spec) < 1:
        raise InvalidInputError("ifft needs length >= 1")
    return IqBuffer._wrap(BACKEND.ifft(spec.bins), sample_rate_hz, spec.precision)


def batch_fft(bufs) -> list[Spectrum]:
    """Transform equal-length buffers in one backend submission.

    Inputs are coalesced into one contiguous 2-D block first, then a
    single batched transform runs over it; the dispatch counter records
    exactly one batch call no matter the batch size.
    """
    bufs = list(bufs)
    if not bufs:
        raise InvalidInputError("batch_fft needs at least one buffer")
    n = len(bufs[0])
    precision = bufs[0].precision
    for b in bufs:
        if len(b) != n:
            raise InvalidInputError("batch_fft buffers must share one length")
        if b.precision is not precision:
            raise InvalidInputError("batch_fft buffers must share one precision")
    block = np.ascontiguousarray(np.stack([b.samples for b in bufs]))
    out = BACKEND.fft_batch(block)
    return [Spectrum._wrap(out[i].copy(), precision) for i in range(len(bufs))]


def _check_pair(a, b):
    if type(a) is not type(b):
        raise InvalidInputError("operands must be the same kind (both IqBuffer or both Spectrum)")
    if len(a) != len(b):
        raise InvalidInputError(f"length mismatch: {len(a)} vs {len(b)}")
    if a.precision is not b.precision:
        raise InvalidInputError("precision mismatch")


def _data(x):
    return x.samples if isinstance(x, IqBuffer) else x.bins


def _rewrap(template, arr):
    if isinstance(template, IqBuffer):
        return IqBuffer._wrap(arr, template.sample_rate_hz, template.precision)
    return Spectrum._wrap(arr, template.precision)


def _pointwise_scalar_loop(a, b, conjugate_b):
    out = np.empty_like(a)
    for i in range(a.shape[0]):
        out[i] = a[i] * (np.conj(b[i]) if conjugate_b else b[i])
    return out


def pointwise_multiply(
    a: Union[IqBuffer, Spectrum],
    b: Union[IqBuffer, Spectrum],
    conjugate_b: bool = False,
    policy: ComputePathPolicy | None = None,
):
    """Elementwise product a[n]*b[n] (optionally a[n]*conj(b[n])); inputs untouched."""
    _check_pair(a, b)
    da, db = _data(a), _data(b)
    if select_compute_path(da.shape[0], policy) is ComputePath.SCALAR_LOOP:
        out = _pointwise_scalar_loop(da, db, conjugate_b)
    else:
        out = kernels.pointwise_multiply_arrays(da, db, conjugate_b)
    return _rewrap(a, out)


def dot_product(
    a: IqBuffer,
    b: IqBuffer,
    conjugate_b: bool = True,
    policy: ComputePathPolicy | None = None,
) -> complex:
    """sum_n a[n]*(conj)b[n], accumulated sequentially left to right."""
    if len(a) != len(b):
        raise InvalidInputError(f"length mismatch: {len(a)} vs {len(b)}")
    da, db = a.samples, b.samples
    if select_compute_path(da.shape[0], policy) is ComputePath.SCALAR_LOOP:
        acc = da.dtype.type(0)
        for i in range(da.shape[0]):
            acc += da[i] * (np.conj(db[i]) if conjugate_b else db[i])
        return complex(acc)
    return complex(kernels.dot_sequential(da, db, conjugate_b))


def magnitude_sq(buf: IqBuffer, policy: ComputePathPolicy | None = None) -> np.ndarray:
    """Per-sample Re^2 + Im^2 as a real array in the buffer's precision."""
    if len(buf) < 1:
        raise InvalidInputError("magnitude_sq needs length >= 1")
    d = buf.samples
    if select_compute_path(d.shape[0], policy) is ComputePath.SCALAR_LOOP:
        out = np.empty(d.shape[0], dtype=buf.precision.real_dtype)
        for i in range(d.shape[0]):
            out[i] = d[i].real * d[i].real + d[i].imag * d[i].imag
        return out
    return kernels.magnitude_squared_arrays(d)


class CorrelationMethod:
    FREQUENCY_DOMAIN = "frequency_domain"
    DIRECT = "direct"


class CorrelationResult(NamedTuple):
    buffer: IqBuffer
    multiplications: int
    method: str


def direct_multiplication_count(n: int) -> int:
    """Shift-and-multiply cost of one full-lag direct correlation: N^2."""
    return n * n


def frequency_domain_multiplication_count(n: int) -> int:
    """Standard accounting model for the transform route: 3 N log2 N + N."""
    return int(3 * n * math.log2(n)) + n if n > 1 else 1


def circular_correlate(
    x: IqBuffer, y: IqBuffer, method: str = CorrelationMethod.FREQUENCY_DOMAIN
) -> CorrelationResult:
    """Circular cross-correlation out[tau] = sum_n x[n] conj(y[(n-tau) mod N]).

    FREQUENCY_DOMAIN computes ifft(fft(x) * conj(fft(y))) at native
    length; DIRECT executes the full N-lag shift-and-multiply loop. The
    result reports the multiplication count of the route taken (N^2 for
    DIRECT, the 3NlogN+N model for the transform route).
    """
    if len(x) != len(y):
        raise InvalidInputError(f"length mismatch: {len(x)} vs {len(y)}")
    n = len(x)
    if method == CorrelationMethod.DIRECT:
        out = kernels.direct_circular_correlate(x.samples, y.samples)
        return CorrelationResult(
            IqBuffer._wrap(out, x.sample_rate_hz, x.precision),
            direct_multiplication_count(n),
            method,
        )
    if method == CorrelationMethod.FREQUENCY_DOMAIN:
        prod = pointwise_multiply(fft(x), fft(y), conjugate_b=True)
        buf = ifft(prod, x.sample_rate_hz)
        return CorrelationResult(buf, frequency_domain_multiplication_count(n), method)
    raise InvalidInputError(f"unknown correlation method {method!r}")
