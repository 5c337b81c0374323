import pytest

from gnssperf.acquisition import AcqResult
from gnssperf.errors import InvalidInputError
from gnssperf.harness import CellResult, EffectiveRunReport, RepetitionResult
from gnssperf.reports import (
    ACQ_COLUMNS,
    emit_acquisition_csv,
    emit_bench_csv,
    emit_csv,
    emit_tracking_csv,
    parse_acquisition_csv,
    parse_bench_csv,
)


def _acq(prn, detected=True):
    return AcqResult(prn=prn, doppler_hz=-1333.3333333333333, code_phase_samples=4000,
                     peak_metric=27.125, detected=detected, bins_searched=16,
                     multiplications_performed=123456)


def _bench_report(failed=False):
    reps = [RepetitionResult(repetition=0, makespan_s=0.123456789012345, ert_s=0.0617283945061725,
                             per_instance_s=[0.12, 0.11], launch_skew_s=0.001, pids=[1, 2])]
    cell = CellResult(n_instances=2, workers=1, repetitions=[] if failed else reps,
                      failed=failed, cause="out of memory" if failed else None)
    return EffectiveRunReport(grid={(2, 1): cell}, environment={"cpu_count": 2},
                              isolation="process")


def test_acquisition_csv_round_trip():
    results = [_acq(1), _acq(2, detected=False)]
    text = emit_acquisition_csv(results)
    lines = text.strip().split("\n")
    assert lines[0] == ",".join(ACQ_COLUMNS)
    parsed = parse_acquisition_csv(text)
    assert parsed[0]["prn"] == 1
    assert parsed[0]["detected"] is True
    assert parsed[1]["detected"] is False
    # exact float reproduction through repr
    assert parsed[0]["doppler_hz"] == -1333.3333333333333
    assert parsed[0]["peak_metric"] == 27.125


def test_empty_results_emit_header_only():
    assert emit_acquisition_csv([]).strip() == ",".join(ACQ_COLUMNS)


def test_bench_csv_one_cell_one_rep_is_two_lines():
    text = emit_bench_csv(_bench_report())
    lines = text.strip().split("\n")
    assert len(lines) == 2
    parsed = parse_bench_csv(text)
    assert parsed[0]["n_instances"] == 2
    assert parsed[0]["ert_s"] == 0.0617283945061725
    assert parsed[0]["makespan_s"] == 0.123456789012345
    assert not parsed[0]["failed"]


def test_bench_csv_failed_cell_row():
    text = emit_bench_csv(_bench_report(failed=True))
    parsed = parse_bench_csv(text)
    assert parsed[0]["failed"] is True
    assert parsed[0]["cause"] == "out of memory"
    assert parsed[0]["makespan_s"] is None


def test_emit_csv_dispatch():
    assert emit_csv([_acq(1)]).startswith("prn,")
    assert emit_csv(_bench_report()).startswith("n_instances,")
    with pytest.raises(InvalidInputError):
        emit_csv({"weird": 1})
    with pytest.raises(InvalidInputError):
        parse_acquisition_csv("not,a,csv\n")


def test_tracking_csv_shape():
    from gnssperf.tracking import TrackOutput, TrackState

    out = TrackOutput(ie=1, qe=2, ip=3, qp=4, il=5, ql=6, dll_error_chips=0.01,
                      pll_error_cycles=-0.02, lock_metric=0.9)
    state = TrackState(prn=5, code_phase_chips=10.5, carrier_phase_cycles=0.25,
                       doppler_hz=1500.0, code_rate_hz=1.023e6)
    text = emit_tracking_csv([(5, 0, out, state)])
    lines = text.strip().split("\n")
    assert len(lines) == 2
    assert lines[1].startswith("5,0,")
