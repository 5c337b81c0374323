"""Multi-instance throughput measurement.

The figure of merit is the effective running time: launch N instances
of the workload simultaneously, take the makespan (first start to last
finish), divide by N. Sweeping N maps out the saturation plateau of the
host; sweeping the per-instance worker count M maps the
competition-vs-utilization trade.

Instances default to process isolation (fork where available, spawn
otherwise) so they really do compete for the machine the way separate
application invocations would; an in-process thread mode exists for
fast CI runs. Each instance self-reports its monotonic start/stop
timestamps (CLOCK_MONOTONIC is shared across processes on the platforms
this targets), and the orchestrator records the launch skew per cell
rather than pretending starts were simultaneous. Failed cells keep
their failure cause in the report; numbers are never fabricated.

A small CPU-bound synthetic workload (a fixed count of frequency-domain
correlations driven through the epoch engine) ships with the harness so
throughput properties are testable without long receiver runs.
"""

from __future__ import annotations

import multiprocessing as mp
import os
import statistics
import time
from dataclasses import dataclass, field

import numpy as np

from gnssperf import dsp
from gnssperf.acquisition import AcqConfig, acquire_all
from gnssperf.buffers import IqBuffer, Precision
from gnssperf.errors import InvalidInputError
from gnssperf.executor import EpochTask, ExecPlan, Schedule, run_epochs
from gnssperf.gnss_signal import SignalSpec, synthesize_signal


class Isolation:
    PROCESS = "process"
    IN_PROCESS = "inprocess"


def effective_running_time(makespan_s: float, n: int) -> float:
    """Total running time of n simultaneous instances divided by n."""
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    if makespan_s < 0:
        raise InvalidInputError("makespan must be >= 0")
    return makespan_s / n


def detect_saturation(ert_curve, epsilon: float = 0.05):
    """Smallest n whose relative improvement to the next point drops below epsilon.

    The curve must be (n, ert) pairs sorted by n with at least two
    points; returns None when the curve is still improving at its end.
    """
    curve = list(ert_curve)
    if len(curve) < 2:
        raise InvalidInputError("saturation needs at least two curve points")
    ns = [n for n, _ in curve]
    if ns != sorted(ns) or len(set(ns)) != len(ns):
        raise InvalidInputError("curve must be sorted by strictly increasing n")
    for (n, ert), (_, ert_next) in zip(curve, curve[1:]):
        if ert <= 0:
            raise InvalidInputError("ert values must be > 0")
        if (ert - ert_next) / ert < epsilon:
            return n
    return None


# ---------------------------------------------------------------------------
# workloads
# ---------------------------------------------------------------------------


class _CorrelationTask(EpochTask):
    def __init__(self, channel_id, buf, rounds, epochs):
        super().__init__(channel_id)
        self._buf = buf
        self._rounds = rounds
        self._epochs = epochs
        self._done = 0

    def phase1(self):
        for _ in range(self._rounds):
            dsp.circular_correlate(self._buf, self._buf, dsp.CorrelationMethod.FREQUENCY_DOMAIN)

    def phase2(self) -> bool:
        self._done += 1
        return self._done >= self._epochs


@dataclass(frozen=True)
class SyntheticWorkload:
    """Fixed amount of correlation work spread over epoch-engine channels."""

    n_tasks: int = 12
    length: int = 8192
    rounds_per_epoch: int = 2
    epochs: int = 8
    seed: int = 1

    def run(self, worker_count: int = 1):
        rng = np.random.Generator(np.random.PCG64(self.seed))
        samples = (rng.standard_normal(self.length) + 1j * rng.standard_normal(self.length))
        buf = IqBuffer(samples.astype(np.complex64), 1.0, Precision.SINGLE)
        tasks = [
            _CorrelationTask(i, buf, self.rounds_per_epoch, self.epochs)
            for i in range(self.n_tasks)
        ]
        run_epochs(tasks, ExecPlan(worker_count=worker_count, schedule=Schedule.DYNAMIC))


@dataclass(frozen=True)
class GnssWorkload:
    """Acquisition over a channel list, from a signal file or a synthesis spec."""

    prns: tuple = tuple(range(1, 13))
    if_file: str = ""
    prn_present: int = 1
    doppler_hz: float = 1500.0
    code_phase_samples: float = 4000.0
    sample_rate_hz: float = 8.184e6
    duration_ms: float = 10.0
    noise_sigma: float = 0.0
    seed: int = 1
    precision: str = "single"
    schedule: str = "dynamic"

    def _buffer(self) -> IqBuffer:
        if self.if_file:
            from gnssperf.iffile import read_if_file

            return read_if_file(self.if_file)
        return synthesize_signal(
            SignalSpec(
                prn=self.prn_present,
                doppler_hz=self.doppler_hz,
                code_phase_samples=self.code_phase_samples,
                sample_rate_hz=self.sample_rate_hz,
                duration_s=self.duration_ms * 1e-3,
                noise_sigma=self.noise_sigma,
                seed=self.seed,
                precision=Precision.from_str(self.precision),
            )
        )

    def run(self, worker_count: int = 1):
        buf = self._buffer()
        plan = ExecPlan(worker_count=worker_count, schedule=Schedule(self.schedule))
        return acquire_all(buf, list(self.prns), AcqConfig(), plan)


# ---------------------------------------------------------------------------
# measurement
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BenchConfig:
    instance_counts: tuple
    worker_counts: tuple
    repetitions: int = 5
    workload: object = field(default_factory=SyntheticWorkload)
    isolation: str = Isolation.PROCESS

    def __post_init__(self):
        if not self.instance_counts or not self.worker_counts:
            raise InvalidInputError("instance_counts and worker_counts must be non-empty")
        if any(n < 1 for n in self.instance_counts) or any(m < 1 for m in self.worker_counts):
            raise InvalidInputError("instance and worker counts must be >= 1")
        if self.repetitions < 1:
            raise InvalidInputError("repetitions must be >= 1")


@dataclass
class RepetitionResult:
    repetition: int
    makespan_s: float
    ert_s: float
    per_instance_s: list
    launch_skew_s: float
    pids: list


@dataclass
class CellResult:
    n_instances: int
    workers: int
    repetitions: list  # RepetitionResult
    failed: bool = False
    cause: str | None = None

    @property
    def median_makespan_s(self):
        if self.failed or not self.repetitions:
            return None
        return statistics.median(r.makespan_s for r in self.repetitions)

    @property
    def median_ert_s(self):
        m = self.median_makespan_s
        return None if m is None else m / self.n_instances


@dataclass
class EffectiveRunReport:
    grid: dict  # (n_instances, workers) -> CellResult
    environment: dict
    isolation: str
    saturation_n: int | None = None
    saturation_by_workers: dict = field(default_factory=dict)

    def ert_curve(self, workers: int):
        pts = [
            (n, cell.median_ert_s)
            for (n, m), cell in sorted(self.grid.items())
            if m == workers and not cell.failed
        ]
        return pts


def _instance_entry(workload, worker_count, index, queue):
    try:
        t0 = time.monotonic()
        workload.run(worker_count)
        t1 = time.monotonic()
        queue.put((index, os.getpid(), t0, t1, None))
    except BaseException as exc:  # noqa: BLE001 - reported to the orchestrator
        queue.put((index, os.getpid(), 0.0, 0.0, repr(exc)))


def _mp_context():
    try:
        return mp.get_context("fork")
    except ValueError:  # pragma: no cover - non-fork platforms
        return mp.get_context("spawn")


def _run_cell_once(workload, n, m, isolation, repetition) -> RepetitionResult:
    results = []
    if isolation == Isolation.PROCESS:
        ctx = _mp_context()
        queue = ctx.SimpleQueue()
        procs = [
            ctx.Process(target=_instance_entry, args=(workload, m, i, queue))
            for i in range(n)
        ]
        for p in procs:
            p.start()
        for _ in range(n):
            results.append(queue.get())
        for p in procs:
            p.join()
    else:
        import queue as queue_mod
        import threading

        q = queue_mod.SimpleQueue()
        threads = [
            threading.Thread(target=_instance_entry, args=(workload, m, i, q))
            for i in range(n)
        ]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        for _ in range(n):
            results.append(q.get())

    errors = [r for r in results if r[4] is not None]
    if errors:
        raise RuntimeError(f"instance {errors[0][0]} failed: {errors[0][4]}")
    starts = [r[2] for r in results]
    ends = [r[3] for r in results]
    makespan = max(ends) - min(starts)
    return RepetitionResult(
        repetition=repetition,
        makespan_s=makespan,
        ert_s=effective_running_time(makespan, n),
        per_instance_s=[r[3] - r[2] for r in sorted(results)],
        launch_skew_s=max(starts) - min(starts),
        pids=[r[1] for r in sorted(results)],
    )


def host_environment() -> dict:
    env = {"cpu_count": os.cpu_count() or 1}
    try:
        env["memory_bytes"] = os.sysconf("SC_PAGE_SIZE") * os.sysconf("SC_PHYS_PAGES")
    except (ValueError, OSError, AttributeError):  # pragma: no cover
        env["memory_bytes"] = None
    return env


def run_bench(config: BenchConfig) -> EffectiveRunReport:
    """Measure the whole (instances x workers) grid; median over repetitions."""
    grid = {}
    for m in config.worker_counts:
        for n in config.instance_counts:
            reps = []
            cell = CellResult(n_instances=n, workers=m, repetitions=reps)
            try:
                for rep in range(config.repetitions):
                    reps.append(_run_cell_once(config.workload, n, m, config.isolation, rep))
            except (RuntimeError, OSError, MemoryError) as exc:
                cell.failed = True
                cell.cause = str(exc)
            grid[(n, m)] = cell

    report = EffectiveRunReport(
        grid=grid, environment=host_environment(), isolation=config.isolation
    )
    for m in config.worker_counts:
        curve = report.ert_curve(m)
        if len(curve) >= 2:
            report.saturation_by_workers[m] = detect_saturation(curve)
    first_m = min(config.worker_counts)
    report.saturation_n = report.saturation_by_workers.get(first_m)
    return report


# ---------------------------------------------------------------------------
# precision study
# ---------------------------------------------------------------------------


@dataclass
class PrecisionCase:
    seed: int
    prn: int
    true_doppler_hz: float
    true_code_phase: int
    detected: dict
    doppler_hz: dict
    code_phase_samples: dict
    wall_s: dict

    @property
    def decision_match(self):
        return self.detected["single"] == self.detected["double"]

    @property
    def code_phase_delta(self):
        return abs(self.code_phase_samples["single"] - self.code_phase_samples["double"])

    @property
    def doppler_delta(self):
        return abs(self.doppler_hz["single"] - self.doppler_hz["double"])


@dataclass
class PrecisionReport:
    cases: list
    mismatches: int
    total_wall_s: dict

    @property
    def max_code_phase_delta(self):
        return max((c.code_phase_delta for c in self.cases), default=0)

    @property
    def max_doppler_delta(self):
        return max((c.doppler_delta for c in self.cases), default=0.0)


def sigma_for_cn0_dbhz(cn0_dbhz: float, sample_rate_hz: float, amplitude: float = 1.0) -> float:
    """Per-component noise std giving the requested carrier-to-noise density."""
    return amplitude * np.sqrt(sample_rate_hz / (2.0 * 10.0 ** (cn0_dbhz / 10.0)))


def compare_precision(
    suite_size: int = 50,
    sample_rate_hz: float = 8.184e6,
    cn0_dbhz: float = 45.0,
    base_seed: int = 1000,
    acq_config: AcqConfig | None = None,
) -> PrecisionReport:
    """Run seeded acquisition cases under both precisions and compare.

    Detection decisions must agree; estimate deltas and per-precision
    wall times ride along in the report (speed is reported, never
    asserted).
    """
    config = acq_config or AcqConfig()
    sigma = sigma_for_cn0_dbhz(cn0_dbhz, sample_rate_hz)
    case_rng = np.random.Generator(np.random.PCG64(base_seed))
    cases = []
    totals = {"single": 0.0, "double": 0.0}
    for i in range(suite_size):
        prn = int(case_rng.integers(1, 33))
        doppler = float(case_rng.uniform(-4000.0, 4000.0))
        phase = int(case_rng.integers(0, 8000))
        results = {}
        walls = {}
        for precision in (Precision.SINGLE, Precision.DOUBLE):
            spec = SignalSpec(
                prn=prn,
                doppler_hz=doppler,
                code_phase_samples=phase,
                sample_rate_hz=sample_rate_hz,
                duration_s=config.coherent_ms * config.noncoherent_rounds * 1e-3,
                noise_sigma=sigma,
                seed=base_seed + i,
                precision=precision,
            )
            buf = synthesize_signal(spec)
            t0 = time.perf_counter()
            results[precision.value] = acquire_all(buf, [prn], config)[0]
            walls[precision.value] = time.perf_counter() - t0
            totals[precision.value] += walls[precision.value]
        cases.append(
            PrecisionCase(
                seed=base_seed + i,
                prn=prn,
                true_doppler_hz=doppler,
                true_code_phase=phase,
                detected={k: r.detected for k, r in results.items()},
                doppler_hz={k: r.doppler_hz for k, r in results.items()},
                code_phase_samples={k: r.code_phase_samples for k, r in results.items()},
                wall_s=walls,
            )
        )
    mismatches = sum(0 if c.decision_match else 1 for c in cases)
    return PrecisionReport(cases=cases, mismatches=mismatches, total_wall_s=totals)
