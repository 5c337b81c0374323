"""Independent oracle implementations used by the tests.

Everything here is written against first principles (definitions, brute
force, closed forms) and never calls the production code paths it is
used to check.
"""

import numpy as np


def dft_at_bin(x, k):
    """Direct O(N) evaluation of one DFT coefficient in double precision."""
    n = np.arange(x.shape[0])
    return complex(np.sum(np.asarray(x, dtype=np.complex128) * np.exp(-2j * np.pi * k * n / x.shape[0])))


def brute_circular_correlation(x, y):
    """out[tau] = sum_n x[n] * conj(y[(n - tau) mod N]), double precision."""
    x = np.asarray(x, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    n = x.shape[0]
    out = np.empty(n, dtype=np.complex128)
    for tau in range(n):
        acc = 0.0 + 0.0j
        for i in range(n):
            acc += x[i] * np.conj(y[(i - tau) % n])
        out[tau] = acc
    return out


def brute_circular_correlation_fast(x, y):
    """Same definition, vectorized per lag; still independent of any FFT identity."""
    x = np.asarray(x, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    n = x.shape[0]
    out = np.empty(n, dtype=np.complex128)
    for tau in range(n):
        out[tau] = np.sum(x * np.conj(np.roll(y, tau)))
    return out


# --- C/A code oracle: delayed-G2 construction (vs the tap-select production path)

_G2_DELAYS = [
    5, 6, 7, 8, 17, 18, 139, 140, 141, 251, 252, 254, 255, 256, 257, 258,
    469, 470, 471, 472, 473, 474, 509, 512, 513, 514, 515, 516, 859, 860, 861, 862,
]


def ca_code_by_delay(prn):
    """C/A chips for PRN 1..32 via G1 xor delayed G2, as +/-1 ints."""
    g1 = [1] * 10
    g2 = [1] * 10
    g1_seq = np.empty(1023, dtype=np.int64)
    g2_seq = np.empty(1023, dtype=np.int64)
    for i in range(1023):
        g1_seq[i] = g1[9]
        g2_seq[i] = g2[9]
        f1 = g1[2] ^ g1[9]
        f2 = g2[1] ^ g2[2] ^ g2[5] ^ g2[7] ^ g2[8] ^ g2[9]
        g1 = [f1] + g1[:9]
        g2 = [f2] + g2[:9]
    delay = _G2_DELAYS[prn - 1]
    bits = g1_seq ^ np.roll(g2_seq, delay)
    return 2 * bits - 1


def code_autocorrelation_all_lags(chips):
    """Brute-force circular autocorrelation over all 1023 lags (integer exact)."""
    c = np.asarray(chips, dtype=np.int64)
    return np.array([int(np.dot(c, np.roll(c, lag))) for lag in range(1023)])


def triangle_autocorrelation(tau_chips):
    """Normalized C/A autocorrelation amplitude model: max(0, 1 - |tau|)."""
    return max(0.0, 1.0 - abs(tau_chips))


def sequential_dot_double(a, b, conjugate_b=True):
    """Left-to-right accumulation in double precision."""
    acc = 0.0 + 0.0j
    bb = np.conj(b) if conjugate_b else b
    for i in range(a.shape[0]):
        acc += complex(a[i]) * complex(bb[i])
    return acc


def wrap_chips(delta, period=1023.0):
    """Map a chip difference into [-period/2, period/2)."""
    return (delta + period / 2.0) % period - period / 2.0
