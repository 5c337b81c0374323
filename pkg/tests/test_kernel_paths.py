"""Numba path vs pure-numpy fallback: value agreement and flag plumbing."""

import os
import subprocess
import sys

import numpy as np
import pytest

from gnssperf import kernels


requires_numba = pytest.mark.skipif(
    not kernels.NUMBA_ENABLED, reason="numba path not active in this environment"
)


def _pair(rng, n, dtype=np.complex64):
    a = (rng.standard_normal(n) + 1j * rng.standard_normal(n)).astype(dtype)
    b = (rng.standard_normal(n) + 1j * rng.standard_normal(n)).astype(dtype)
    return a, b


@requires_numba
@pytest.mark.parametrize("dtype", [np.complex64, np.complex128])
@pytest.mark.parametrize("conj", [False, True])
def test_pointwise_paths_bitwise_equal(rng, dtype, conj):
    a, b = _pair(rng, 4097, dtype)
    nb = kernels._pointwise_multiply_nb(a, b, conj)
    npy = kernels._pointwise_multiply_np(a, b, conj)
    view = np.float32 if dtype == np.complex64 else np.float64
    assert np.array_equal(nb.view(view), npy.view(view))


@requires_numba
def test_magnitude_paths_bitwise_equal(rng):
    a, _ = _pair(rng, 4097)
    assert np.array_equal(kernels._magnitude_squared_nb(a), kernels._magnitude_squared_np(a))


@requires_numba
@pytest.mark.parametrize("conj", [False, True])
def test_dot_paths_bitwise_equal(rng, conj):
    a, b = _pair(rng, 8192)
    assert kernels._dot_sequential_nb(a, b, conj) == kernels._dot_sequential_np(a, b, conj)


@requires_numba
def test_direct_correlation_paths_agree(rng):
    a, b = _pair(rng, 128)
    nb = kernels._direct_circular_correlate_nb(a, b)
    npy = kernels._direct_circular_correlate_np(a, b)
    assert np.array_equal(nb.view(np.float32), npy.view(np.float32))


@requires_numba
def test_carrier_nco_paths_phase_exact_trig_close(rng):
    p0 = kernels.carrier_phase_to_fixed(0.37)
    step = kernels.carrier_step_to_fixed(1572.5, 8.184e6)
    out_nb = np.empty(8192, dtype=np.complex128)
    out_np = np.empty(8192, dtype=np.complex128)
    end_nb = kernels._carrier_replica_nb(p0, step, 8192, out_nb)
    end_np = kernels._carrier_replica_np(p0, step, 8192, out_np)
    assert end_nb == end_np  # integer phase accumulators are exact on both paths
    assert np.max(np.abs(out_nb - out_np)) < 1e-12  # trig may differ by an ulp


@requires_numba
def test_code_nco_paths_bitwise_equal(rng):
    p0 = kernels.code_phase_to_fixed(511.7)
    step = kernels.code_step_to_fixed(1.023e6, 8.184e6)
    idx_nb = np.empty(81840, dtype=np.int64)
    idx_np = np.empty(81840, dtype=np.int64)
    end_nb = kernels._code_chip_indices_nb(p0, step, 81840, idx_nb)
    end_np = kernels._code_chip_indices_np(p0, step, 81840, idx_np)
    assert end_nb == end_np
    assert np.array_equal(idx_nb, idx_np)


def test_env_flag_selects_numpy_fallback():
    code = (
        "from gnssperf import kernels\n"
        "assert not kernels.NUMBA_ENABLED\n"
        "assert kernels.pointwise_multiply_arrays is kernels._pointwise_multiply_np\n"
        "import numpy as np\n"
        "a = np.arange(8, dtype=np.complex64) + 1j\n"
        "out = kernels.pointwise_multiply_arrays(a, a, True)\n"
        "assert out.dtype == np.complex64\n"
        "print('fallback-ok')\n"
    )
    env = dict(os.environ, GNSSPERF_NO_NUMBA="1")
    proc = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True, timeout=120
    )
    assert proc.returncode == 0, proc.stderr
    assert "fallback-ok" in proc.stdout


def test_fixed_point_round_trips():
    for phase in (0.0, 0.25, 1 / 3, 0.999999):
        p = kernels.carrier_phase_to_fixed(phase)
        assert 0 <= p < kernels.CARRIER_SCALE
        assert kernels.carrier_phase_to_fixed(p / kernels.CARRIER_SCALE) == p
    for chips in (0.0, 17.25, 1022.999, 511.3):
        p = kernels.code_phase_to_fixed(chips)
        assert 0 <= p < kernels.CODE_MODULUS
        assert kernels.code_phase_to_fixed(p / kernels.CODE_SCALE) == p
