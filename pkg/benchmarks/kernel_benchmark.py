#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

The kernel path is fixed at import time by GNSSPERF_NO_NUMBA, so this
script re-runs itself in two subprocesses (one per path) and prints the
timings side by side. Values are medians over repeated calls after a
warm-up (which also absorbs jit compilation).

Usage:
    python benchmarks/kernel_benchmark.py [--repeats N]
"""

import argparse
import json
import os
import statistics
import subprocess
import sys
import time


def _time(fn, repeats):
    fn()  # warm-up / jit compile
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def run_worker(repeats):
    import numpy as np

    from gnssperf import kernels
    from gnssperf.buffers import IqBuffer, Precision
    from gnssperf.cacode import CHIP_RATE_HZ, generate_ca_code
    from gnssperf.gnss_signal import NcoState, carrier_replica, sample_code_replica
    from gnssperf.tracking import TrackConfig, TrackState, track_epoch
    from gnssperf.gnss_signal import SignalSpec, synthesize_signal

    rng = np.random.default_rng(1)
    n = 81840
    a = (rng.standard_normal(n) + 1j * rng.standard_normal(n)).astype(np.complex64)
    b = (rng.standard_normal(n) + 1j * rng.standard_normal(n)).astype(np.complex64)
    small = a[:2048]

    code = generate_ca_code(5)
    p0 = kernels.carrier_phase_to_fixed(0.37)
    step = kernels.carrier_step_to_fixed(1500.0, 8.184e6)
    carrier_out = np.empty(n, dtype=np.complex64)
    idx_out = np.empty(n, dtype=np.int64)
    code_step = kernels.code_step_to_fixed(CHIP_RATE_HZ, 8.184e6)

    sig = synthesize_signal(SignalSpec(prn=5, doppler_hz=1000.0, sample_rate_hz=8.184e6,
                                       duration_s=1e-3))
    state = TrackState(prn=5, code_phase_chips=0.0, carrier_phase_cycles=0.0,
                       doppler_hz=1000.0, code_rate_hz=CHIP_RATE_HZ,
                       sample_rate_hz=8.184e6)
    config = TrackConfig()

    results = {
        "path": "numba" if kernels.NUMBA_ENABLED else "numpy",
        "pointwise_multiply_81840": _time(
            lambda: kernels.pointwise_multiply_arrays(a, b, True), repeats),
        "magnitude_squared_81840": _time(
            lambda: kernels.magnitude_squared_arrays(a), repeats),
        "dot_sequential_81840": _time(
            lambda: kernels.dot_sequential(a, b, True), repeats),
        "carrier_nco_81840": _time(
            lambda: kernels.carrier_replica_fixed(p0, step, n, carrier_out), repeats),
        "code_nco_81840": _time(
            lambda: kernels.code_chip_indices(p0 % kernels.CODE_MODULUS, code_step, n,
                                              idx_out), repeats),
        "direct_correlate_2048": _time(
            lambda: kernels.direct_circular_correlate(small, small), max(3, repeats // 4)),
        "track_epoch_8184": _time(
            lambda: track_epoch(sig, state, config), repeats),
    }
    print(json.dumps(results))


def run_orchestrator(repeats):
    rows = {}
    for disable, label in (("0", "numba"), ("1", "numpy")):
        env = dict(os.environ, GNSSPERF_NO_NUMBA=disable)
        proc = subprocess.run(
            [sys.executable, os.path.abspath(__file__), "--worker", "--repeats", str(repeats)],
            env=env, capture_output=True, text=True, check=True,
        )
        rows[label] = json.loads(proc.stdout.strip().splitlines()[-1])

    keys = [k for k in rows["numba"] if k != "path"]
    name_w = max(len(k) for k in keys) + 2
    print(f"{'kernel':<{name_w}} {'numba':>12} {'pure numpy':>12} {'speedup':>9}")
    print("-" * (name_w + 37))
    for k in keys:
        t_nb = rows["numba"][k]
        t_np = rows["numpy"][k]
        print(f"{k:<{name_w}} {t_nb * 1e3:>9.3f} ms {t_np * 1e3:>9.3f} ms "
              f"{t_np / t_nb:>8.2f}x")


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    parser.add_argument("--repeats", type=int, default=20)
    args = parser.parse_args()
    if args.worker:
        run_worker(args.repeats)
    else:
        run_orchestrator(args.repeats)


if __name__ == "__main__":
    main()
