"""CSV report schemas.

Column orders are fixed, decimals are always '.', booleans are 0/1, and
floats are written with repr so parsing the text back reproduces every
value exactly.

    acquisition: prn,detected,doppler_hz,code_phase_samples,peak_metric
    bench:       n_instances,workers,repetition,makespan_s,ert_s,failed,cause
    tracking:    prn,epoch,ip,qp,ie,qe,il,ql,doppler_hz,code_phase_chips,
                 dll_error_chips,pll_error_cycles,lock_metric
"""

from __future__ import annotations

import csv
import io

from gnssperf.acquisition import AcqResult
from gnssperf.errors import InvalidInputError
from gnssperf.harness import EffectiveRunReport

ACQ_COLUMNS = ["prn", "detected", "doppler_hz", "code_phase_samples", "peak_metric"]
BENCH_COLUMNS = ["n_instances", "workers", "repetition", "makespan_s", "ert_s", "failed", "cause"]
TRACK_COLUMNS = [
    "prn", "epoch", "ip", "qp", "ie", "qe", "il", "ql",
    "doppler_hz", "code_phase_chips", "dll_error_chips", "pll_error_cycles", "lock_metric",
]


def _writer(buf):
    return csv.writer(buf, lineterminator="\n")


def emit_acquisition_csv(results) -> str:
    buf = io.StringIO()
    w = _writer(buf)
    w.writerow(ACQ_COLUMNS)
    for r in results:
        w.writerow([r.prn, int(r.detected), repr(r.doppler_hz), r.code_phase_samples,
                    repr(r.peak_metric)])
    return buf.getvalue()


def parse_acquisition_csv(text: str) -> list:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != ACQ_COLUMNS:
        raise InvalidInputError("not an acquisition CSV")
    out = []
    for row in rows[1:]:
        out.append(
            dict(
                prn=int(row[0]),
                detected=bool(int(row[1])),
                doppler_hz=float(row[2]),
                code_phase_samples=int(row[3]),
                peak_metric=float(row[4]),
            )
        )
    return out


def emit_bench_csv(report: EffectiveRunReport) -> str:
    buf = io.StringIO()
    w = _writer(buf)
    w.writerow(BENCH_COLUMNS)
    for (n, m), cell in sorted(report.grid.items()):
        if cell.failed:
            w.writerow([n, m, "", "", "", 1, cell.cause or ""])
            continue
        for rep in cell.repetitions:
            w.writerow([n, m, rep.repetition, repr(rep.makespan_s), repr(rep.ert_s), 0, ""])
    return buf.getvalue()


def parse_bench_csv(text: str) -> list:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != BENCH_COLUMNS:
        raise InvalidInputError("not a bench CSV")
    out = []
    for row in rows[1:]:
        failed = bool(int(row[5]))
        out.append(
            dict(
                n_instances=int(row[0]),
                workers=int(row[1]),
                repetition=None if failed else int(row[2]),
                makespan_s=None if failed else float(row[3]),
                ert_s=None if failed else float(row[4]),
                failed=failed,
                cause=row[6] or None,
            )
        )
    return out


def emit_tracking_csv(rows) -> str:
    """rows: iterable of (prn, epoch, TrackOutput, TrackState-after)."""
    buf = io.StringIO()
    w = _writer(buf)
    w.writerow(TRACK_COLUMNS)
    for prn, epoch, out, state in rows:
        w.writerow([
            prn, epoch,
            repr(out.ip), repr(out.qp), repr(out.ie), repr(out.qe), repr(out.il), repr(out.ql),
            repr(state.doppler_hz), repr(state.code_phase_chips),
            repr(out.dll_error_chips), repr(out.pll_error_cycles), repr(out.lock_metric),
        ])
    return buf.getvalue()


def emit_csv(report) -> str:
    """Schema dispatch: acquisition result lists or bench reports."""
    if isinstance(report, EffectiveRunReport):
        return emit_bench_csv(report)
    if isinstance(report, (list, tuple)):
        if all(isinstance(r, AcqResult) for r in report):
            return emit_acquisition_csv(report)
    raise InvalidInputError(f"no CSV schema for {type(report).__name__}")
