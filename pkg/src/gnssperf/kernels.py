"""Hot numeric kernels with two interchangeable implementations.

Every kernel here exists twice: a numba @njit loop and a pure-numpy
fallback. The active set is chosen once at import time; setting the
environment variable ``GNSSPERF_NO_NUMBA=1`` (or having no numba
installed) selects the numpy path. Both paths are constructed to be
bit-identical for integer phase math, elementwise complex products,
magnitude-squared, and the sequential dot product:

* complex products are evaluated with the naive (ac-bd, ad+bc) formula;
  the numpy side decomposes into real planes so no fused/rearranged
  complex multiply can change the rounding,
* the dot product accumulates strictly left to right (np.cumsum is a
  left-to-right running sum, matching the jit loop),
* NCO phases are 48-bit (carrier) / 42-bit (code) fixed-point integers,
  so phase accumulation is exact, wrap-around is exact, and a replica
  split at any sample boundary continues bit-identically.

Only the transcendental evaluations (cos/sin of the carrier angle) may
differ between the two paths, by at most an ulp of libm.

benchmarks/kernel_benchmark.py compares the two paths side by side.
"""

from __future__ import annotations

import math
import os

import numpy as np

_NUMBA_DISABLED = os.environ.get("GNSSPERF_NO_NUMBA", "").strip() not in ("", "0")

if not _NUMBA_DISABLED:
    try:
        from numba import njit

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - exercised via env flag instead
        NUMBA_ENABLED = False
else:
    NUMBA_ENABLED = False

TWO_PI = 2.0 * math.pi

# fixed-point phase accumulators; both moduli round-trip exactly through float64
CARRIER_FRAC_BITS = 48
CARRIER_SCALE = 1 << CARRIER_FRAC_BITS
_CARRIER_MASK = np.uint64(CARRIER_SCALE - 1)

CODE_FRAC_BITS = 42
CODE_SCALE = 1 << CODE_FRAC_BITS
CODE_MODULUS = 1023 * CODE_SCALE


def carrier_phase_to_fixed(phase_cycles: float) -> int:
    """Quantize a wrapped carrier phase (cycles) to the 48-bit accumulator."""
    return int(round((phase_cycles % 1.0) * CARRIER_SCALE)) % CARRIER_SCALE


def carrier_step_to_fixed(freq_hz: float, sample_rate_hz: float) -> int:
    return int(round((freq_hz / sample_rate_hz) * CARRIER_SCALE)) % CARRIER_SCALE


def code_phase_to_fixed(phase_chips: float) -> int:
    return int(round((phase_chips % 1023.0) * CODE_SCALE)) % CODE_MODULUS


def code_step_to_fixed(chip_rate_hz: float, sample_rate_hz: float) -> int:
    return int(round((chip_rate_hz / sample_rate_hz) * CODE_SCALE))


# ---------------------------------------------------------------------------
# pure-numpy implementations
# ---------------------------------------------------------------------------


def _pointwise_multiply_np(a, b, conjugate_b):
    ar = a.real
    ai = a.imag
    br = b.real
    bi = -b.imag if conjugate_b else b.imag
    out = np.empty_like(a)
    out.real = ar * br - ai * bi
    out.imag = ar * bi + ai * br
    return out


def _magnitude_squared_np(a):
    return a.real * a.real + a.imag * a.imag


def _dot_sequential_np(a, b, conjugate_b):
    prod = _pointwise_multiply_np(a, b, conjugate_b)
    return prod.dtype.type(np.cumsum(prod)[-1])


def _direct_circular_correlate_np(x, y):
    n = x.shape[0]
    out = np.empty_like(x)
    for tau in range(n):
        out[tau] = np.cumsum(_pointwise_multiply_np(x, np.roll(y, tau), True))[-1]
    return out


def _carrier_replica_np(phase_fixed, step_fixed, n, out):
    k = np.arange(n, dtype=np.uint64)
    phases = (np.uint64(phase_fixed) + k * np.uint64(step_fixed)) & _CARRIER_MASK
    theta = phases.astype(np.float64) * (TWO_PI / CARRIER_SCALE)
    out.real = np.cos(theta)
    out.imag = -np.sin(theta)
    end = (phase_fixed + n * step_fixed) % CARRIER_SCALE
    return end


def _code_chip_indices_np(phase_fixed, step_fixed, n, indices):
    # chunk so that phase_fixed + chunk*step never overflows uint64
    max_chunk = max(1, (1 << 62) // max(step_fixed, 1))
    pos = 0
    p = phase_fixed
    while pos < n:
        chunk = min(max_chunk, n - pos)
        k = np.arange(chunk, dtype=np.uint64)
        ph = (np.uint64(p) + k * np.uint64(step_fixed)) % np.uint64(CODE_MODULUS)
        indices[pos : pos + chunk] = (ph >> np.uint64(CODE_FRAC_BITS)).astype(np.int64)
        p = (p + chunk * step_fixed) % CODE_MODULUS
        pos += chunk
    return p


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if NUMBA_ENABLED:

    @njit(cache=True, nogil=True)
    def _pointwise_multiply_nb(a, b, conjugate_b):
        out = np.empty_like(a)
        for i in range(a.shape[0]):
            if conjugate_b:
                out[i] = a[i] * np.conj(b[i])
            else:
                out[i] = a[i] * b[i]
        return out

    @njit(cache=True, nogil=True)
    def _magnitude_squared_nb(a):
        out = np.empty(a.shape[0], dtype=a.real.dtype)
        for i in range(a.shape[0]):
            out[i] = a[i].real * a[i].real + a[i].imag * a[i].imag
        return out

    @njit(cache=True, nogil=True)
    def _dot_sequential_nb(a, b, conjugate_b):
        acc = a.dtype.type(0)
        for i in range(a.shape[0]):
            if conjugate_b:
                acc += a[i] * np.conj(b[i])
            else:
                acc += a[i] * b[i]
        return acc

    @njit(cache=True, nogil=True)
    def _direct_circular_correlate_nb(x, y):
        n = x.shape[0]
        out = np.empty_like(x)
        for tau in range(n):
            acc = x.dtype.type(0)
            for i in range(n):
                acc += x[i] * np.conj(y[(i - tau) % n])
            out[tau] = acc
        return out

    @njit(cache=True, nogil=True)
    def _carrier_replica_nb(phase_fixed, step_fixed, n, out):
        mask = np.uint64(CARRIER_SCALE - 1)
        p = np.uint64(phase_fixed)
        s = np.uint64(step_fixed)
        inv = TWO_PI / CARRIER_SCALE
        for i in range(n):
            theta = np.float64(p) * inv
            out[i] = complex(math.cos(theta), -math.sin(theta))
            p = (p + s) & mask
        return int(p)

    @njit(cache=True, nogil=True)
    def _code_chip_indices_nb(phase_fixed, step_fixed, n, indices):
        mod = np.uint64(CODE_MODULUS)
        p = np.uint64(phase_fixed)
        s = np.uint64(step_fixed)
        shift = np.uint64(CODE_FRAC_BITS)
        for i in range(n):
            indices[i] = np.int64(p >> shift)
            p = (p + s) % mod
        return int(p)


if NUMBA_ENABLED:
    pointwise_multiply_arrays = _pointwise_multiply_nb
    magnitude_squared_arrays = _magnitude_squared_nb
    dot_sequential = _dot_sequential_nb
    direct_circular_correlate = _direct_circular_correlate_nb
    carrier_replica_fixed = _carrier_replica_nb
    code_chip_indices = _code_chip_indices_nb
else:
    pointwise_multiply_arrays = _pointwise_multiply_np
    magnitude_squared_arrays = _magnitude_squared_np
    dot_sequential = _dot_sequential_np
    direct_circular_correlate = _direct_circular_correlate_np
    carrier_replica_fixed = _carrier_replica_np
    code_chip_indices = _code_chip_indices_np
