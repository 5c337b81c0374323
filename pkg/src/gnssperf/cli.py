"""Command-line surface: synth, acquire, track, run, bench, report.

Exit codes: 0 success, 2 usage error, 3 I/O or file-format error,
4 pipeline error. Failures print one machine-parseable line to stderr:
``error: <category>: <message>``.
"""

from __future__ import annotations

import argparse
import json
import sys

from gnssperf import dsp, reports
from gnssperf.acquisition import AcqConfig, acquire_all
from gnssperf.buffers import IqBuffer, Precision
from gnssperf.errors import FormatError, GnssPerfError
from gnssperf.executor import ExecPlan, PriorityHint, Schedule
from gnssperf.gnss_signal import SignalSpec, synthesize_signal
from gnssperf.harness import (
    BenchConfig,
    CellResult,
    EffectiveRunReport,
    GnssWorkload,
    Isolation,
    RepetitionResult,
    SyntheticWorkload,
    run_bench,
)
from gnssperf.iffile import read_if_file, write_if_file, write_truth_sidecar
from gnssperf.runconfig import load_run_config
from gnssperf.tracking import TrackConfig, init_from_acquisition, track_epoch

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_PIPELINE = 4


def _int_list(text):
    return [int(tok) for tok in text.split(",") if tok.strip()]


def _build_parser():
    parser = argparse.ArgumentParser(prog="gnssperf", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="synthesize an IF sample file with known truth")
    synth.add_argument("--prn", type=int, required=True)
    synth.add_argument("--doppler", type=float, default=0.0)
    synth.add_argument("--code-phase", type=float, default=0.0, help="true delay in samples")
    synth.add_argument("--carrier-phase", type=float, default=0.0, help="cycles")
    synth.add_argument("--fs", type=float, default=8.184e6)
    synth.add_argument("--dur-ms", type=float, default=10.0)
    synth.add_argument("--noise-sigma", type=float, default=0.0)
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--format", choices=["int8", "int16", "float32"], default="float32")
    synth.add_argument("--precision", choices=["single", "double"], default="single")
    synth.add_argument("-o", "--output", required=True)

    def add_exec_flags(p):
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--schedule", choices=["static", "dynamic"], default="dynamic")
        p.add_argument("--priority", choices=["normal", "high"], default="normal")
        p.add_argument("--precision", choices=["single", "double"], default="single")
        p.add_argument("--min-iterations", type=int, default=64,
                       help="scalar-loop threshold for the compute-path gate")

    def add_acq_flags(p):
        p.add_argument("--prns", type=_int_list, default=list(range(1, 13)))
        p.add_argument("--doppler-min", type=float, default=-5000.0)
        p.add_argument("--doppler-max", type=float, default=5000.0)
        p.add_argument("--doppler-step", type=float, default=0.0)
        p.add_argument("--coherent-ms", type=int, default=1)
        p.add_argument("--rounds", type=int, default=10)
        p.add_argument("--threshold", type=float, default=2.5)

    acquire = sub.add_parser("acquire", help="coarse search over Doppler and code phase")
    acquire.add_argument("input")
    add_acq_flags(acquire)
    add_exec_flags(acquire)
    acquire.add_argument("-o", "--output", default=None, help="CSV path, default stdout")

    track = sub.add_parser("track", help="acquire one PRN, then run tracking epochs")
    track.add_argument("input")
    track.add_argument("--prn", type=int, required=True)
    track.add_argument("--epochs", type=int, default=0, help="0 = as many as the file holds")
    track.add_argument("--spacing", type=float, default=0.5)
    track.add_argument("--dll-bw", type=float, default=2.0)
    track.add_argument("--pll-bw", type=float, default=15.0)
    add_acq_flags(track)
    add_exec_flags(track)
    track.add_argument("-o", "--output", default=None)

    run = sub.add_parser("run", help="acquisition pipeline driven by a config file")
    run.add_argument("input")
    run.add_argument("--config", required=True)
    run.add_argument("-o", "--output", default=None)

    bench = sub.add_parser("bench", help="effective-running-time grid measurement")
    bench.add_argument("--instances", type=_int_list, default=[1, 2, 4])
    bench.add_argument("--workers", type=_int_list, default=[1])
    bench.add_argument("--repetitions", type=int, default=5)
    bench.add_argument("--workload", choices=["synthetic", "gnss"], default="synthetic")
    bench.add_argument("--isolation", choices=["process", "inprocess"], default="process")
    bench.add_argument("--epochs", type=int, default=8, help="synthetic workload epochs")
    bench.add_argument("--length", type=int, default=8192, help="synthetic correlation length")
    bench.add_argument("--json", default=None, help="also write the full report as JSON")
    bench.add_argument("-o", "--output", default=None, help="CSV path, default stdout")

    report = sub.add_parser("report", help="render a bench JSON report as CSV")
    report.add_argument("input")
    report.add_argument("-o", "--output", default=None)

    return parser


def _write_text(path, text):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _plan_from_args(args) -> ExecPlan:
    return ExecPlan(
        worker_count=args.workers,
        schedule=Schedule(args.schedule),
        priority_hint=PriorityHint(args.priority),
    )


def _acq_config_from_args(args) -> AcqConfig:
    return AcqConfig(
        doppler_min_hz=args.doppler_min,
        doppler_max_hz=args.doppler_max,
        doppler_step_hz=args.doppler_step,
        coherent_ms=args.coherent_ms,
        noncoherent_rounds=args.rounds,
        detection_threshold=args.threshold,
    )


def _cmd_synth(args):
    spec = SignalSpec(
        prn=args.prn,
        doppler_hz=args.doppler,
        code_phase_samples=args.code_phase,
        carrier_phase_cycles=args.carrier_phase,
        sample_rate_hz=args.fs,
        duration_s=args.dur_ms * 1e-3,
        noise_sigma=args.noise_sigma,
        seed=args.seed,
        precision=Precision.from_str(args.precision),
    )
    buf = synthesize_signal(spec)
    write_if_file(args.output, buf, args.format)
    write_truth_sidecar(args.output, spec)
    print(f"wrote {len(buf)} samples to {args.output}")
    return EXIT_OK


def _cmd_acquire(args):
    dsp.set_min_iterations(args.min_iterations)
    buf = read_if_file(args.input, Precision.from_str(args.precision))
    results = acquire_all(buf, args.prns, _acq_config_from_args(args), _plan_from_args(args))
    _write_text(args.output, reports.emit_acquisition_csv(results))
    return EXIT_OK


def _cmd_track(args):
    dsp.set_min_iterations(args.min_iterations)
    buf = read_if_file(args.input, Precision.from_str(args.precision))
    acq = acquire_all(buf, [args.prn], _acq_config_from_args(args), _plan_from_args(args))[0]
    state = init_from_acquisition(acq, buf.sample_rate_hz)
    config = TrackConfig(
        correlator_spacing_chips=args.spacing,
        dll_bandwidth_hz=args.dll_bw,
        pll_bandwidth_hz=args.pll_bw,
    )
    n = round(buf.sample_rate_hz * config.integration_ms * 1e-3)
    available = len(buf) // n
    epochs = min(args.epochs, available) if args.epochs else available
    rows = []
    for ep in range(epochs):
        block = IqBuffer._wrap(
            buf.samples[ep * n : (ep + 1) * n], buf.sample_rate_hz, buf.precision
        )
        state, out = track_epoch(block, state, config)
        rows.append((args.prn, ep, out, state))
    _write_text(args.output, reports.emit_tracking_csv(rows))
    return EXIT_OK


def _cmd_run(args):
    cfg = load_run_config(args.config)
    dsp.set_min_iterations(cfg.min_iterations)
    buf = read_if_file(args.input, Precision.from_str(cfg.precision))
    acq_config = AcqConfig(
        doppler_min_hz=cfg.doppler_min_hz,
        doppler_max_hz=cfg.doppler_max_hz,
        doppler_step_hz=cfg.doppler_step_hz,
        coherent_ms=cfg.coherent_ms,
        noncoherent_rounds=cfg.noncoherent_rounds,
        detection_threshold=cfg.threshold,
    )
    plan = ExecPlan(
        worker_count=cfg.workers,
        schedule=Schedule(cfg.schedule),
        priority_hint=PriorityHint(cfg.priority),
    )
    results = acquire_all(buf, cfg.prns, acq_config, plan)
    _write_text(args.output, reports.emit_acquisition_csv(results))
    return EXIT_OK


def _report_to_json(report: EffectiveRunReport) -> dict:
    return {
        "isolation": report.isolation,
        "environment": report.environment,
        "saturation_n": report.saturation_n,
        "saturation_by_workers": {str(k): v for k, v in report.saturation_by_workers.items()},
        "grid": [
            {
                "n_instances": n,
                "workers": m,
                "failed": cell.failed,
                "cause": cell.cause,
                "repetitions": [
                    {
                        "repetition": r.repetition,
                        "makespan_s": r.makespan_s,
                        "ert_s": r.ert_s,
                        "per_instance_s": r.per_instance_s,
                        "launch_skew_s": r.launch_skew_s,
                        "pids": r.pids,
                    }
                    for r in cell.repetitions
                ],
            }
            for (n, m), cell in sorted(report.grid.items())
        ],
    }


def _report_from_json(doc: dict) -> EffectiveRunReport:
    grid = {}
    for entry in doc["grid"]:
        reps = [
            RepetitionResult(
                repetition=r["repetition"],
                makespan_s=r["makespan_s"],
                ert_s=r["ert_s"],
                per_instance_s=r["per_instance_s"],
                launch_skew_s=r["launch_skew_s"],
                pids=r["pids"],
            )
            for r in entry["repetitions"]
        ]
        grid[(entry["n_instances"], entry["workers"])] = CellResult(
            n_instances=entry["n_instances"],
            workers=entry["workers"],
            repetitions=reps,
            failed=entry["failed"],
            cause=entry["cause"],
        )
    return EffectiveRunReport(
        grid=grid,
        environment=doc.get("environment", {}),
        isolation=doc.get("isolation", Isolation.PROCESS),
        saturation_n=doc.get("saturation_n"),
        saturation_by_workers={int(k): v for k, v in doc.get("saturation_by_workers", {}).items()},
    )


def _cmd_bench(args):
    if args.workload == "synthetic":
        workload = SyntheticWorkload(length=args.length, epochs=args.epochs)
    else:
        workload = GnssWorkload()
    config = BenchConfig(
        instance_counts=tuple(args.instances),
        worker_counts=tuple(args.workers),
        repetitions=args.repetitions,
        workload=workload,
        isolation=args.isolation,
    )
    report = run_bench(config)
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            json.dump(_report_to_json(report), fh, indent=2)
    _write_text(args.output, reports.emit_bench_csv(report))
    return EXIT_OK


def _cmd_report(args):
    with open(args.input, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    _write_text(args.output, reports.emit_bench_csv(_report_from_json(doc)))
    return EXIT_OK


_COMMANDS = {
    "synth": _cmd_synth,
    "acquire": _cmd_acquire,
    "track": _cmd_track,
    "run": _cmd_run,
    "bench": _cmd_bench,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (FormatError, FileNotFoundError, PermissionError, IsADirectoryError, json.JSONDecodeError) as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return EXIT_IO
    except GnssPerfError as exc:
        print(f"error: pipeline: {exc}", file=sys.stderr)
        return EXIT_PIPELINE


if __name__ == "__main__":
    sys.exit(main())
