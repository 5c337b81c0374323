import numpy as np
import pytest

from gnssperf import dsp
from gnssperf.acquisition import AcqResult
from gnssperf.buffers import IqBuffer, Precision
from gnssperf.cacode import CHIP_RATE_HZ, CODE_LENGTH
from gnssperf.errors import DegenerateInputError, InvalidConfigError, InvalidInputError
from gnssperf.executor import EpochTask, ExecPlan, Schedule, run_epochs
from gnssperf.gnss_signal import L1_CARRIER_HZ, SignalSpec, synthesize_signal
from gnssperf.tracking import (
    TrackConfig,
    TrackOutput,
    TrackState,
    block_length,
    dll_discriminator,
    epl_correlate,
    init_from_acquisition,
    loop_filter,
    pll_discriminator,
    track_epoch,
)

from oracles import triangle_autocorrelation, wrap_chips

FS = 8.184e6

# wide-band noise-free pull-in configuration; bw * T = 0.24 stays inside the guard
PULL_IN_CONFIG = TrackConfig(correlator_spacing_chips=0.5, dll_bandwidth_hz=240.0,
                             pll_bandwidth_hz=240.0, integration_ms=1)
PULL_IN_FS = 8.192e6  # incommensurate samples/chip smooths the floor-indexed discriminator


def acq(prn=5, doppler=0.0, phase=0, detected=True):
    return AcqResult(prn=prn, doppler_hz=doppler, code_phase_samples=phase,
                     peak_metric=10.0, detected=detected, bins_searched=1,
                     multiplications_performed=0)


def make_scenario(doppler=1200.0, delay_samples=2000.0, fs=FS, epochs=12, prn=5,
                  carrier_phase=0.0, sigma=0.0, seed=3):
    n = round(fs * 1e-3)
    spec = SignalSpec(prn=prn, doppler_hz=doppler, code_phase_samples=delay_samples,
                      carrier_phase_cycles=carrier_phase, sample_rate_hz=fs,
                      duration_s=epochs * 1e-3, noise_sigma=sigma, seed=seed)
    buf = synthesize_signal(spec)
    blocks = [IqBuffer._wrap(buf.samples[k * n:(k + 1) * n], fs, buf.precision)
              for k in range(epochs)]
    cps = CHIP_RATE_HZ / fs
    true_phase0 = (-delay_samples * cps) % CODE_LENGTH

    def truth_phase_at_block(k):
        return (true_phase0 + k * n * cps) % CODE_LENGTH

    return blocks, true_phase0, truth_phase_at_block


def aligned_state(doppler, true_phase0, fs=FS, code_err_chips=0.0, doppler_err=0.0, prn=5):
    return TrackState(
        prn=prn,
        code_phase_chips=(true_phase0 - code_err_chips) % CODE_LENGTH,
        carrier_phase_cycles=0.0,
        doppler_hz=doppler - doppler_err,
        code_rate_hz=CHIP_RATE_HZ * (1.0 + (doppler - doppler_err) / L1_CARRIER_HZ),
        sample_rate_hz=fs,
    )


# --- init_from_acquisition ---------------------------------------------------


def test_init_zero_case():
    state = init_from_acquisition(acq(doppler=1000.0, phase=0), FS)
    assert state.doppler_hz == 1000.0
    assert state.code_phase_chips == 0.0
    assert state.dll_filter_state == (0.0, 0.0)
    assert state.epoch == 0


@pytest.mark.parametrize("k", [1, 3, 7])
def test_init_whole_code_periods(k):
    state = init_from_acquisition(acq(phase=8184 * k), FS)
    # 8184k samples * (1.023e6 / 8.184e6) chips/sample = 1023k = 0 mod 1023
    assert state.code_phase_chips == pytest.approx(0.0, abs=1e-9)


def test_init_rejects_undetected():
    with pytest.raises(InvalidInputError):
        init_from_acquisition(acq(detected=False), FS)


def test_init_code_rate_is_carrier_aided():
    state = init_from_acquisition(acq(doppler=2000.0), FS)
    assert state.code_rate_hz == pytest.approx(CHIP_RATE_HZ * (1 + 2000.0 / L1_CARRIER_HZ))


# --- epl_correlate -----------------------------------------------------------


def test_epl_aligned_prompt_dominates():
    blocks, phase0, _ = make_scenario(doppler=0.0, delay_samples=0.0)
    state = aligned_state(0.0, phase0)
    out = epl_correlate(blocks[0], state, TrackConfig())
    n = 8184
    assert out.ip == pytest.approx(n, rel=1e-3)
    assert abs(out.qp) <= 1e-3 * n
    e = out.ie**2 + out.qe**2
    l = out.il**2 + out.ql**2
    assert e == pytest.approx(l, rel=1e-3)


def test_epl_quarter_chip_offset_early_exceeds_late():
    blocks, phase0, _ = make_scenario(doppler=0.0, delay_samples=1000.0)
    late_state = aligned_state(0.0, phase0, code_err_chips=0.25)  # replica late
    out = epl_correlate(blocks[0], late_state, TrackConfig())
    e = out.ie**2 + out.qe**2
    l = out.il**2 + out.ql**2
    assert e > l
    assert dll_discriminator(out, 0.5) > 0


def test_epl_prompt_power_follows_triangle():
    blocks, phase0, _ = make_scenario(doppler=0.0, delay_samples=500.0)
    aligned = epl_correlate(blocks[0], aligned_state(0.0, phase0), TrackConfig())
    offset = epl_correlate(
        blocks[0], aligned_state(0.0, phase0, code_err_chips=0.5), TrackConfig()
    )
    ratio = (offset.ip**2 + offset.qp**2) / (aligned.ip**2 + aligned.qp**2)
    expected = triangle_autocorrelation(0.5) ** 2
    assert ratio == pytest.approx(expected, abs=0.10 * expected)


def test_epl_rejects_wrong_block_length():
    blocks, phase0, _ = make_scenario()
    short = IqBuffer(blocks[0].samples[:100], FS)
    with pytest.raises(InvalidInputError):
        epl_correlate(short, aligned_state(1200.0, phase0), TrackConfig())


def test_epl_multiplication_metadata_paper_size():
    spec = SignalSpec(prn=5, sample_rate_hz=FS, duration_s=10e-3)
    buf = synthesize_signal(spec)
    state = aligned_state(0.0, 0.0)
    config = TrackConfig(integration_ms=10)
    out = epl_correlate(buf, state, config)
    assert out.multiplications == 4 * 81840
    assert out.direct_equivalent_multiplications == 81840 * 81840 == 6_697_785_600


# --- discriminators ----------------------------------------------------------


def test_dll_zero_when_balanced():
    out = TrackOutput(ie=3.0, qe=4.0, ip=10.0, qp=0.0, il=4.0, ql=3.0)
    assert dll_discriminator(out, 0.5) == 0.0


def test_dll_sign_matches_offset_sign():
    blocks, phase0, _ = make_scenario(doppler=0.0, delay_samples=1000.0)
    for err, sign in ((+0.25, +1), (-0.25, -1)):
        out = epl_correlate(blocks[0], aligned_state(0.0, phase0, code_err_chips=err),
                            TrackConfig())
        assert np.sign(dll_discriminator(out, 0.5)) == sign


def test_dll_monotone_over_quarter_chip_sweep():
    blocks, phase0, _ = make_scenario(doppler=0.0, delay_samples=1000.0, fs=PULL_IN_FS)
    offsets = np.linspace(-0.25, 0.25, 11)
    values = []
    for err in offsets:
        out = epl_correlate(blocks[0],
                            aligned_state(0.0, phase0, code_err_chips=err, fs=PULL_IN_FS),
                            TrackConfig())
        values.append(dll_discriminator(out, 0.5))
    diffs = np.diff(values)
    assert np.all(diffs >= -1e-6)
    assert values[-1] > values[0]


def test_dll_degenerate():
    with pytest.raises(DegenerateInputError):
        dll_discriminator(TrackOutput(0, 0, 0, 0, 0, 0), 0.5)


def test_pll_zero_and_quarter():
    assert pll_discriminator(TrackOutput(ie=0, qe=0, ip=5.0, qp=0.0, il=0, ql=0)) == 0.0
    out = TrackOutput(ie=0, qe=0, ip=0.0, qp=2.0, il=0, ql=0)
    assert pll_discriminator(out) == pytest.approx(0.25)


def test_pll_reads_injected_phase_error():
    blocks, phase0, _ = make_scenario(doppler=0.0, delay_samples=0.0, carrier_phase=0.05)
    out = epl_correlate(blocks[0], aligned_state(0.0, phase0), TrackConfig())
    assert pll_discriminator(out) == pytest.approx(0.05, abs=0.005)


def test_pll_costas_sign_flip_invariance():
    out = TrackOutput(ie=0, qe=0, ip=3.0, qp=1.0, il=0, ql=0)
    flipped = TrackOutput(ie=0, qe=0, ip=-3.0, qp=-1.0, il=0, ql=0)
    assert pll_discriminator(out) == pll_discriminator(flipped)
    with pytest.raises(DegenerateInputError):
        pll_discriminator(TrackOutput(0, 0, 0, 0, 0, 0))


# --- loop filter -------------------------------------------------------------


def test_loop_filter_zero_error_stream():
    state = (0.0, 0.0)
    for _ in range(5):
        correction, state = loop_filter(0.0, state, 15.0, 1e-3)
        assert correction == 0.0
    assert state == (0.0, 0.0)


def test_loop_filter_constant_error_ramps_toward_cancel():
    # discrete-time simulation oracle: constant positive error must produce
    # positive, growing corrections (the integrator winds toward canceling it)
    state = (0.0, 0.0)
    last = 0.0
    for k in range(10):
        correction, state = loop_filter(0.1, state, 15.0, 1e-3)
        assert correction > 0
        if k:
            assert correction > last
        last = correction


def test_loop_filter_bandwidth_doubling_raises_first_step():
    c1, _ = loop_filter(0.1, (0.0, 0.0), 10.0, 1e-3)
    c2, _ = loop_filter(0.1, (0.0, 0.0), 20.0, 1e-3)
    assert abs(c2) > abs(c1)


def test_loop_filter_stability_guard():
    with pytest.raises(InvalidConfigError):
        loop_filter(0.0, (0.0, 0.0), 300.0, 1e-3)
    with pytest.raises(InvalidConfigError):
        TrackConfig(pll_bandwidth_hz=260.0)


# --- track_epoch closed loop -------------------------------------------------


def test_perfectly_initialized_stays_locked_ten_epochs():
    doppler = 800.0
    blocks, phase0, truth_at = make_scenario(doppler=doppler, delay_samples=3000.0,
                                             epochs=10)
    state = aligned_state(doppler, phase0)
    config = TrackConfig()  # conventional defaults
    for block in blocks:
        state, out = track_epoch(block, state, config)
    assert abs(state.doppler_hz - doppler) < 1.0
    assert abs(wrap_chips(state.code_phase_chips - truth_at(10))) < 0.01
    assert state.epoch == 10


def test_convergence_from_half_chip_and_200hz():
    doppler = 1200.0
    blocks, phase0, truth_at = make_scenario(doppler=doppler, delay_samples=2000.0,
                                             fs=PULL_IN_FS, epochs=50)
    state = aligned_state(doppler, phase0, fs=PULL_IN_FS,
                          code_err_chips=0.5, doppler_err=200.0)
    dsp.BACKEND.reset()
    for block in blocks:
        state, out = track_epoch(block, state, PULL_IN_CONFIG)
    counters = dsp.BACKEND.counters()
    assert counters.total_submissions == 0  # no transforms anywhere on this path
    assert abs(state.doppler_hz - doppler) < 5.0
    assert abs(wrap_chips(state.code_phase_chips - truth_at(50))) < 0.05


def test_track_epoch_deterministic():
    blocks, phase0, _ = make_scenario(doppler=500.0, delay_samples=100.0, epochs=2)
    state0 = aligned_state(500.0, phase0, code_err_chips=0.1)
    a1, o1 = track_epoch(blocks[0], state0, TrackConfig())
    a2, o2 = track_epoch(blocks[0], state0, TrackConfig())
    assert a1 == a2
    assert o1 == o2


def test_lock_metric_separates_signal_from_noise():
    config = TrackConfig()
    epochs = 30
    # aligned, noise-free reference
    blocks, phase0, _ = make_scenario(doppler=0.0, delay_samples=0.0, epochs=epochs)
    state = aligned_state(0.0, phase0)
    for block in blocks:
        state, out = track_epoch(block, state, config)
    aligned_lock = out.lock_metric
    assert aligned_lock > 0.9

    n = 8184
    noise_locks = []
    for seed in range(50):
        rng = np.random.Generator(np.random.PCG64(seed))
        state = aligned_state(0.0, phase0)
        for k in range(epochs):
            z = (rng.standard_normal(n) + 1j * rng.standard_normal(n)).astype(np.complex64)
            state, out = track_epoch(IqBuffer._wrap(z, FS, Precision.SINGLE), state, config)
        noise_locks.append(abs(out.lock_metric))
    assert float(np.median(noise_locks)) <= aligned_lock / 5.0


class _TrackChannel(EpochTask):
    def __init__(self, cid, blocks, state, config):
        super().__init__(cid)
        self.blocks = blocks
        self.state = state
        self.config = config
        self.outputs = []
        self._k = 0

    def phase1(self):
        self.state, out = track_epoch(self.blocks[self._k], self.state, self.config)
        self.outputs.append(out)

    def phase2(self):
        self._k += 1
        return self._k >= len(self.blocks)


def _channel_set():
    channels = []
    for prn in (2, 9, 17, 30):
        blocks, phase0, _ = make_scenario(doppler=300.0 * prn % 2000, delay_samples=37 * prn,
                                          epochs=8, prn=prn)
        state = aligned_state(300.0 * prn % 2000, phase0, code_err_chips=0.05, prn=prn)
        channels.append((prn, blocks, state))
    return channels


def test_channel_independence_under_concurrency():
    config = TrackConfig()
    runs = {}
    for workers in (1, 4):
        tasks = [_TrackChannel(prn, blocks, state, config)
                 for prn, blocks, state in _channel_set()]
        run_epochs(tasks, ExecPlan(worker_count=workers, schedule=Schedule.DYNAMIC))
        runs[workers] = [(t.channel_id, t.state, tuple(t.outputs)) for t in tasks]
    assert runs[1] == runs[4]
