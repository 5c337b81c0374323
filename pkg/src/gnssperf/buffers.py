"""Sample buffers and precision handling.

Everything downstream works on IqBuffer (time domain) and Spectrum
(frequency domain). Both carry an explicit precision tag so the whole
engine can run end to end in single or double precision from one code
path; single is the default.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from gnssperf.errors import InvalidInputError


class Precision(enum.Enum):
    SINGLE = "single"
    DOUBLE = "double"

    @property
    def complex_dtype(self):
        return np.complex64 if self is Precision.SINGLE else np.complex128

    @property
    def real_dtype(self):
        return np.float32 if self is Precision.SINGLE else np.float64

    @classmethod
    def from_str(cls, s: str) -> "Precision":
        try:
            return cls(s.lower())
        except ValueError:
            raise InvalidInputError(f"unknown precision {s!r}") from None


def _as_readonly(arr: np.ndarray) -> np.ndarray:
    if arr.flags.writeable:
        arr = arr.copy() if not arr.flags.owndata else arr
        arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class IqBuffer:
    """Finite sequence of complex baseband samples.

    samples are stored read-only at the dtype implied by `precision`
    (complex64 for single, complex128 for double); constructing a buffer
    copies/validates, the `_wrap` fast path is for internally produced
    arrays that are known to be clean.
    """

    samples: np.ndarray
    sample_rate_hz: float
    precision: Precision = Precision.SINGLE

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=self.precision.complex_dtype)
        if arr.ndim != 1 or arr.size < 1:
            raise InvalidInputError("IqBuffer needs a 1-D sequence of length >= 1")
        if self.sample_rate_hz <= 0:
            raise InvalidInputError("sample_rate_hz must be > 0")
        if not np.all(np.isfinite(arr.view(self.precision.real_dtype))):
            raise InvalidInputError("IqBuffer samples must be finite")
        object.__setattr__(self, "samples", _as_readonly(arr))

    @classmethod
    def _wrap(cls, arr: np.ndarray, sample_rate_hz: float, precision: Precision) -> "IqBuffer":
        # trusted constructor: skips the finite scan, still locks the array
        obj = object.__new__(cls)
        object.__setattr__(obj, "samples", _as_readonly(np.ascontiguousarray(arr)))
        object.__setattr__(obj, "sample_rate_hz", float(sample_rate_hz))
        object.__setattr__(obj, "precision", precision)
        return obj

    def __len__(self):
        return self.samples.size

    def astype(self, precision: Precision) -> "IqBuffer":
        if precision is self.precision:
            return self
        return IqBuffer._wrap(
            self.samples.astype(precision.complex_dtype), self.sample_rate_hz, precision
        )


@dataclass(frozen=True)
class Spectrum:
    """Frequency-domain coefficients of one transform, same length as its source."""

    bins: np.ndarray
    precision: Precision = Precision.SINGLE

    def __post_init__(self):
        arr = np.asarray(self.bins, dtype=self.precision.complex_dtype)
        if arr.ndim != 1 or arr.size < 1:
            raise InvalidInputError("Spectrum needs a 1-D sequence of length >= 1")
        object.__setattr__(self, "bins", _as_readonly(arr))

    @classmethod
    def _wrap(cls, arr: np.ndarray, precision: Precision) -> "Spectrum":
        obj = object.__new__(cls)
        object.__setattr__(obj, "bins", _as_readonly(np.ascontiguousarray(arr)))
        object.__setattr__(obj, "precision", precision)
        return obj

    def __len__(self):
        return self.bins.size


@dataclass(frozen=True)
class ComputePathPolicy:
    """Dispatch gate between plain scalar loops and the accelerated path.

    Lengths below `min_iterations` run the scalar loop; at or above it the
    accelerated path is used. Selection depends only on (length, policy),
    never on data, and both paths return identical values for elementwise
    kernels.
    """

    min_iterations: int = 64

    def __post_init__(self):
        if self.min_iterations < 0:
            raise InvalidInputError("min_iterations must be >= 0")


class ComputePath(enum.Enum):
    SCALAR_LOOP = "scalar_loop"
    ACCELERATED = "accelerated"
