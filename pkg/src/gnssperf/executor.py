"""Two-phase epoch execution over independent channel tasks.

The engine reproduces the persistent-pool loop structure: workers are
created once, spin over epochs, and meet at barriers so that within an
epoch every phase-1 unit finishes before any phase-2 unit starts, and
every phase-2 unit finishes before the next epoch's phase 1. A run
continues while any channel still reports incomplete work (the
done-flag aggregation), with the flag reset and re-aggregated under the
barrier actions so it is never raced.

Work distribution is either a balanced contiguous static partition, or
dynamic claim-next-available with a granularity of one task per claim.
A dedicated mode (one worker per channel) mirrors the original
one-thread-per-channel layout for baseline comparisons. A
non-persistent mode spawns fresh workers for every phase of every epoch
to reproduce why that layout was slower.

Thread priority hints are best effort: applied through the platform
scheduler when permitted, silently downgraded otherwise, and the
outcome is recorded in the report.
"""

from __future__ import annotations

import enum
import os
import threading
import time
from dataclasses import dataclass, field

from gnssperf.errors import InvalidInputError, PipelineError, ResourceError


class Schedule(enum.Enum):
    STATIC = "static"
    DYNAMIC = "dynamic"


class PriorityHint(enum.Enum):
    NORMAL = "normal"
    HIGH = "high"


@dataclass(frozen=True)
class ExecPlan:
    worker_count: int = 1
    schedule: Schedule = Schedule.DYNAMIC
    priority_hint: PriorityHint = PriorityHint.NORMAL
    persistent_pool: bool = True

    def __post_init__(self):
        if self.worker_count < 1:
            raise InvalidInputError("worker_count must be >= 1")

    @classmethod
    def dedicated(cls, n_channels: int, priority_hint: PriorityHint = PriorityHint.NORMAL):
        """One worker per channel, the original one-to-one layout."""
        return cls(
            worker_count=n_channels,
            schedule=Schedule.STATIC,
            priority_hint=priority_hint,
            persistent_pool=True,
        )


class EpochTask:
    """One channel's work for the engine.

    phase1() runs the heavy unit; phase2() runs the follow-up unit and
    returns True when this channel has no more epochs to process. The
    two phases of one channel touch no other channel's state.
    """

    def __init__(self, channel_id):
        self.channel_id = channel_id

    def phase1(self):  # pragma: no cover - abstract
        raise NotImplementedError

    def phase2(self) -> bool:  # pragma: no cover - abstract
        raise NotImplementedError


@dataclass(frozen=True)
class TraceEvent:
    channel_id: object
    phase: int
    epoch: int
    worker_id: int
    start_ns: int
    end_ns: int


class ExecTrace:
    """Per-event instrumentation; events are appended per worker, merged on read."""

    def __init__(self):
        self._per_worker: dict[int, list[TraceEvent]] = {}

    def _list_for(self, worker_id: int) -> list:
        return self._per_worker.setdefault(worker_id, [])

    def events(self) -> list[TraceEvent]:
        out = []
        for evs in self._per_worker.values():
            out.extend(evs)
        return sorted(out, key=lambda e: (e.start_ns, e.end_ns))

    def per_worker(self) -> dict[int, list[TraceEvent]]:
        return {w: list(evs) for w, evs in self._per_worker.items()}


@dataclass(frozen=True)
class OrderingViolation:
    epoch: int
    kind: str
    detail: str


def verify_ordering(trace: ExecTrace) -> list[OrderingViolation]:
    """Check the barrier contract: empty list iff phases never overlapped.

    For every epoch k: max end(phase1, k) <= min start(phase2, k), and
    max end(phase2, k) <= min start(phase1, k+1).
    """
    events = trace.events()
    for e in events:
        if e.phase not in (1, 2) or e.end_ns < e.start_ns:
            raise InvalidInputError(f"malformed trace event: {e}")
    by_epoch: dict[int, dict[int, list[TraceEvent]]] = {}
    for e in events:
        by_epoch.setdefault(e.epoch, {1: [], 2: []})[e.phase].append(e)
    violations = []
    for epoch in sorted(by_epoch):
        phases = by_epoch[epoch]
        if phases[1] and phases[2]:
            p1_end = max(e.end_ns for e in phases[1])
            p2_start = min(e.start_ns for e in phases[2])
            if p1_end > p2_start:
                violations.append(
                    OrderingViolation(epoch, "phase2_before_phase1_done",
                                      f"phase1 end {p1_end} > phase2 start {p2_start}")
                )
        nxt = by_epoch.get(epoch + 1)
        if phases[2] and nxt and nxt[1]:
            p2_end = max(e.end_ns for e in phases[2])
            n1_start = min(e.start_ns for e in nxt[1])
            if p2_end > n1_start:
                violations.append(
                    OrderingViolation(epoch, "next_epoch_before_phase2_done",
                                      f"phase2 end {p2_end} > next phase1 start {n1_start}")
                )
    return violations


@dataclass
class PipelineReport:
    epochs_run: int
    workers_created: int
    worker_count: int
    schedule: Schedule
    persistent_pool: bool
    priority_requested: bool
    priority_applied: bool
    elapsed_s: float
    all_complete: bool = True
    completed_channels: list = field(default_factory=list)


def plan_partition(n_tasks: int, n_workers: int, schedule: Schedule):
    """Describe how tasks map onto workers.

    Static: balanced contiguous blocks; the first (n mod W) workers get
    one extra task, e.g. 12 over 5 -> sizes 3,3,2,2,2. Dynamic: no fixed
    assignment, workers claim the next unclaimed index at run time, each
    task claimed exactly once.
    """
    if n_tasks < 1 or n_workers < 1:
        raise InvalidInputError("n_tasks and n_workers must be >= 1")
    if schedule is Schedule.DYNAMIC:
        return {"schedule": schedule, "blocks": None, "contract": "claim-next-available"}
    q, r = divmod(n_tasks, n_workers)
    blocks = []
    start = 0
    for w in range(n_workers):
        size = q + (1 if w < r else 0)
        blocks.append(range(start, start + size))
        start += size
    return {"schedule": schedule, "blocks": blocks, "contract": "contiguous-blocks"}


def _apply_priority(hint: PriorityHint) -> bool:
    if hint is not PriorityHint.HIGH:
        return False
    try:
        tid = threading.get_native_id()
        os.setpriority(os.PRIO_PROCESS, tid, -5)
        return True
    except (AttributeError, OSError):
        return False


class _RunState:
    """Shared engine state; every mutable field is reset or read under a barrier action."""

    def __init__(self, n_tasks: int):
        self.n_tasks = n_tasks
        self.lock = threading.Lock()
        self.next_index = 0
        self.done_processing = True
        self.stop = False
        self.epoch = 0
        self.errors: list[tuple[object, BaseException]] = []

    def claim(self):
        with self.lock:
            if self.next_index >= self.n_tasks:
                return None
            i = self.next_index
            self.next_index += 1
            return i

    def flag_incomplete(self):
        with self.lock:
            self.done_processing = False

    def record_error(self, channel_id, exc):
        with self.lock:
            self.errors.append((channel_id, exc))


def _run_units(tasks, indices, phase, state, trace, worker_id, epoch):
    for i in indices:
        task = tasks[i]
        t0 = time.monotonic_ns()
        try:
            if phase == 1:
                task.phase1()
            else:
                if not task.phase2():
                    state.flag_incomplete()
        except BaseException as exc:  # noqa: BLE001 - attributed and re-raised by the engine
            state.record_error(task.channel_id, exc)
            return
        if trace is not None:
            t1 = time.monotonic_ns()
            trace._list_for(worker_id).append(
                TraceEvent(task.channel_id, phase, epoch, worker_id, t0, t1)
            )


def _indices_for(plan, state, blocks, worker_id):
    if plan.schedule is Schedule.STATIC:
        return iter(blocks[worker_id])

    def claims():
        while True:
            i = state.claim()
            if i is None:
                return
            yield i

    return claims()


def run_epochs(
    tasks: list[EpochTask],
    plan: ExecPlan,
    trace: ExecTrace | None = None,
    max_epochs: int | None = None,
) -> PipelineReport:
    """Drive all tasks to completion under the plan; see the module docstring."""
    if not tasks:
        raise InvalidInputError("tasks must be non-empty")
    if plan.persistent_pool:
        return _run_persistent(tasks, plan, trace, max_epochs)
    return _run_per_epoch_pools(tasks, plan, trace, max_epochs)


def _run_persistent(tasks, plan, trace, max_epochs):
    w = plan.worker_count
    state = _RunState(len(tasks))
    blocks = plan_partition(len(tasks), w, Schedule.STATIC)["blocks"]
    priority_results = [False] * w

    def reset_phase1():
        state.next_index = 0
        state.done_processing = True

    def reset_phase2():
        state.next_index = 0

    def close_epoch():
        state.epoch += 1
        if state.errors or state.done_processing:
            state.stop = True
        elif max_epochs is not None and state.epoch >= max_epochs:
            state.stop = True

    start_barrier = threading.Barrier(w, action=reset_phase1)
    mid_barrier = threading.Barrier(w, action=reset_phase2)
    end_barrier = threading.Barrier(w, action=close_epoch)

    def worker(worker_id):
        priority_results[worker_id] = _apply_priority(plan.priority_hint)
        while True:
            start_barrier.wait()
            epoch = state.epoch
            _run_units(tasks, _indices_for(plan, state, blocks, worker_id), 1,
                       state, trace, worker_id, epoch)
            mid_barrier.wait()
            _run_units(tasks, _indices_for(plan, state, blocks, worker_id), 2,
                       state, trace, worker_id, epoch)
            end_barrier.wait()
            if state.stop:
                return

    t_start = time.monotonic()
    threads = [threading.Thread(target=worker, args=(i,), name=f"gnssperf-worker-{i}")
               for i in range(w)]
    workers_created = len(threads)
    try:
        for t in threads:
            t.start()
    except RuntimeError as exc:
        state.stop = True
        raise ResourceError(f"worker startup failed: {exc}") from exc
    for t in threads:
        t.join()
    elapsed = time.monotonic() - t_start

    if state.errors:
        channel_id, exc = state.errors[0]
        raise PipelineError(channel_id, repr(exc)) from exc
    return PipelineReport(
        epochs_run=state.epoch,
        workers_created=workers_created,
        worker_count=w,
        schedule=plan.schedule,
        persistent_pool=True,
        priority_requested=plan.priority_hint is PriorityHint.HIGH,
        priority_applied=all(priority_results) if plan.priority_hint is PriorityHint.HIGH else False,
        elapsed_s=elapsed,
        all_complete=state.done_processing,
    )


def _run_per_epoch_pools(tasks, plan, trace, max_epochs):
    """Naive layout: start and stop a fresh pool for every phase of every epoch."""
    w = plan.worker_count
    state = _RunState(len(tasks))
    blocks = plan_partition(len(tasks), w, Schedule.STATIC)["blocks"]
    workers_created = 0
    priority_applied = []

    def spawn_phase(phase, epoch):
        nonlocal workers_created
        state.next_index = 0

        def worker(worker_id):
            priority_applied.append(_apply_priority(plan.priority_hint))
            _run_units(tasks, _indices_for(plan, state, blocks, worker_id), phase,
                       state, trace, worker_id, epoch)

        threads = [threading.Thread(target=worker, args=(i,)) for i in range(w)]
        workers_created += len(threads)
        try:
            for t in threads:
                t.start()
        except RuntimeError as exc:
            raise ResourceError(f"worker startup failed: {exc}") from exc
        for t in threads:
            t.join()

    t_start = time.monotonic()
    epoch = 0
    while True:
        state.done_processing = True
        spawn_phase(1, epoch)
        if state.errors:
            break
        spawn_phase(2, epoch)
        epoch += 1
        if state.errors or state.done_processing:
            break
        if max_epochs is not None and epoch >= max_epochs:
            break
    elapsed = time.monotonic() - t_start

    if state.errors:
        channel_id, exc = state.errors[0]
        raise PipelineError(channel_id, repr(exc)) from exc
    return PipelineReport(
        epochs_run=epoch,
        workers_created=workers_created,
        worker_count=w,
        schedule=plan.schedule,
        persistent_pool=False,
        priority_requested=plan.priority_hint is PriorityHint.HIGH,
        priority_applied=all(priority_applied) if priority_applied and plan.priority_hint is PriorityHint.HIGH else False,
        elapsed_s=elapsed,
        all_complete=state.done_processing,
    )
