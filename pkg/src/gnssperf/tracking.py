"""Time-domain tracking channel: EPL correlators, discriminators, loops.

The tracking path never touches a frequency-domain transform; each
epoch is carrier wipeoff (pointwise product) plus three dot products
against early / prompt / late code replicas.

Sign conventions (these are what the tests' oracles assume):

* code offset tau = true code phase minus replica code phase, in chips;
  positive tau means the replica is late, makes early power exceed late
  power, and yields a positive DLL discriminator output,
* the DLL discriminator is normalized early-minus-late power scaled by
  (1 - d/2)/2, which linearizes to tau near zero for spacing d,
* the PLL discriminator is the Costas atan(qp/ip)/(2pi), positive when
  the replica carrier lags the incoming phase, insensitive to 180-degree
  flips.

Loop closure per epoch: each loop filter is a second-order
proportional-plus-integral with omega0 = bandwidth/0.53 and damping
0.707 (gains g1 = 2*zeta*omega0, g2 = omega0^2, trapezoidal
integrator). The integrator is the persistent rate estimate (Doppler,
code-rate trim); the proportional term is applied once as a phase step
at the epoch boundary rather than being folded into the next epoch's
rate. That boundary step is what lets the carrier loop pull in
frequency offsets a fraction of 1/T without cycle slipping.

The code NCO is carrier-aided: code_rate = 1.023 MHz * (1 +
doppler/1575.42 MHz) + dll_trim, with dll_trim the DLL integrator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from gnssperf import dsp, kernels
from gnssperf.buffers import IqBuffer
from gnssperf.cacode import CHIP_RATE_HZ, CODE_LENGTH, CaCode, generate_ca_code
from gnssperf.errors import DegenerateInputError, InvalidConfigError, InvalidInputError
from gnssperf.gnss_signal import L1_CARRIER_HZ, NcoState, carrier_replica, sample_code_replica

LOOP_DAMPING = 0.7071067811865476
LOCK_SMOOTHING_EPOCHS = 20


@dataclass(frozen=True)
class TrackConfig:
    correlator_spacing_chips: float = 0.5
    dll_bandwidth_hz: float = 2.0
    pll_bandwidth_hz: float = 15.0
    integration_ms: int = 1

    def __post_init__(self):
        if not 0 < self.correlator_spacing_chips <= 1:
            raise InvalidConfigError("correlator spacing must be in (0, 1] chips")
        if self.dll_bandwidth_hz <= 0 or self.pll_bandwidth_hz <= 0:
            raise InvalidConfigError("loop bandwidths must be > 0")
        if self.integration_ms < 1:
            raise InvalidConfigError("integration_ms must be >= 1")
        t = self.integration_ms * 1e-3
        for bw in (self.dll_bandwidth_hz, self.pll_bandwidth_hz):
            if bw * t >= 0.25:
                raise InvalidConfigError(
                    f"stability guard violated: bandwidth {bw} Hz x {t} s >= 0.25"
                )


@dataclass(frozen=True)
class TrackState:
    prn: int
    code_phase_chips: float
    carrier_phase_cycles: float
    doppler_hz: float
    code_rate_hz: float
    dll_filter_state: tuple = (0.0, 0.0)
    pll_filter_state: tuple = (0.0, 0.0)
    epoch: int = 0
    sample_rate_hz: float = 8.184e6
    lock_nbd: float = 0.0
    lock_nbp: float = 0.0


@dataclass(frozen=True)
class TrackOutput:
    ie: float
    qe: float
    ip: float
    qp: float
    il: float
    ql: float
    dll_error_chips: float = 0.0
    pll_error_cycles: float = 0.0
    lock_metric: float = 0.0
    multiplications: int = 0
    direct_equivalent_multiplications: int = 0


def init_from_acquisition(acq, fs: float) -> TrackState:
    """Convert coarse detection output into tracking units.

    Sample delay converts to replica start phase with the nominal
    chipping rate: the incoming code at the buffer start sits at
    -delay * chips_per_sample (mod 1023), which is where the prompt
    replica must start to be aligned.
    """
    if not acq.detected:
        raise InvalidInputError(f"PRN {acq.prn} was not detected; nothing to track")
    chips_per_sample = CHIP_RATE_HZ / fs
    code_phase = (-acq.code_phase_samples * chips_per_sample) % CODE_LENGTH
    return TrackState(
        prn=acq.prn,
        code_phase_chips=code_phase,
        carrier_phase_cycles=0.0,
        doppler_hz=acq.doppler_hz,
        code_rate_hz=CHIP_RATE_HZ * (1.0 + acq.doppler_hz / L1_CARRIER_HZ),
        sample_rate_hz=fs,
    )


def block_length(state: TrackState, config: TrackConfig) -> int:
    return round(state.sample_rate_hz * config.integration_ms * 1e-3)


def epl_correlate(block: IqBuffer, state: TrackState, config: TrackConfig) -> TrackOutput:
    """Correlators only: wipe the carrier, dot against E/P/L code replicas.

    One epoch costs 4N pointwise complex multiplications (N wipeoff plus
    3 correlator dots); the all-shift direct-correlation alternative of
    the same block would cost N^2, reported alongside for the burden
    accounting.
    """
    n = block_length(state, config)
    if len(block) != n:
        raise InvalidInputError(f"block must hold {n} samples, got {len(block)}")
    fs = state.sample_rate_hz
    precision = block.precision
    code = generate_ca_code(state.prn)
    d = config.correlator_spacing_chips

    carrier, _ = carrier_replica(
        NcoState(phase=state.carrier_phase_cycles), state.doppler_hz, fs, n, precision
    )
    wiped = dsp.pointwise_multiply(block, carrier)

    sums = {}
    for name, offset in (("e", +d / 2), ("p", 0.0), ("l", -d / 2)):
        replica, _ = sample_code_replica(
            code,
            NcoState(phase=(state.code_phase_chips + offset) % CODE_LENGTH),
            state.code_rate_hz,
            fs,
            n,
            precision,
        )
        sums[name] = dsp.dot_product(wiped, replica, conjugate_b=False)

    return TrackOutput(
        ie=sums["e"].real, qe=sums["e"].imag,
        ip=sums["p"].real, qp=sums["p"].imag,
        il=sums["l"].real, ql=sums["l"].imag,
        multiplications=4 * n,
        direct_equivalent_multiplications=dsp.direct_multiplication_count(n),
    )


def dll_discriminator(out: TrackOutput, spacing_chips: float = 0.5) -> float:
    """Normalized early-minus-late power, scaled to chips of code offset."""
    e = out.ie * out.ie + out.qe * out.qe
    l = out.il * out.il + out.ql * out.ql
    if e + l == 0:
        if out.ip == 0 and out.qp == 0:
            raise DegenerateInputError("all correlators zero")
        return 0.0
    return (e - l) / (e + l) * (1.0 - spacing_chips / 2.0) / 2.0


def pll_discriminator(out: TrackOutput) -> float:
    """Costas atan(qp/ip) in cycles; invariant under (ip, qp) -> (-ip, -qp)."""
    if out.ip == 0.0 and out.qp == 0.0:
        raise DegenerateInputError("prompt correlator is zero")
    if out.ip == 0.0:
        return math.copysign(0.25, out.qp)
    return math.atan(out.qp / out.ip) / (2.0 * math.pi)


def loop_gains(bandwidth_hz: float) -> tuple[float, float]:
    w0 = bandwidth_hz / 0.53
    return 2.0 * LOOP_DAMPING * w0, w0 * w0


def loop_filter(
    error: float, state: tuple, bandwidth_hz: float, integration_s: float
) -> tuple[float, tuple]:
    """Second-order PI update: returns (rate correction, new filter state).

    state = (integrator, previous error); the integrator advances by
    g2 * T * (e + e_prev)/2 and the correction is g1*e + integrator.
    """
    if bandwidth_hz * integration_s >= 0.25:
        raise InvalidConfigError(
            f"stability guard violated: {bandwidth_hz} Hz x {integration_s} s >= 0.25"
        )
    g1, g2 = loop_gains(bandwidth_hz)
    acc, prev = state
    acc_new = acc + g2 * integration_s * (error + prev) / 2.0
    return g1 * error + acc_new, (acc_new, error)


def _fixed_phase_advance_carrier(phase_cycles, doppler_hz, fs, n, step_cycles):
    p0 = kernels.carrier_phase_to_fixed(phase_cycles)
    step = kernels.carrier_step_to_fixed(doppler_hz, fs)
    p = (p0 + n * step + kernels.carrier_phase_to_fixed(step_cycles)) % kernels.CARRIER_SCALE
    return p / kernels.CARRIER_SCALE


def _fixed_phase_advance_code(phase_chips, code_rate_hz, fs, n, step_chips):
    p0 = kernels.code_phase_to_fixed(phase_chips)
    step = kernels.code_step_to_fixed(code_rate_hz, fs)
    nudge = int(round((step_chips % CODE_LENGTH) * kernels.CODE_SCALE))
    p = (p0 + n * step + nudge) % kernels.CODE_MODULUS
    return p / kernels.CODE_SCALE


def track_epoch(
    block: IqBuffer, state: TrackState, config: TrackConfig
) -> tuple[TrackState, TrackOutput]:
    """One full loop iteration: correlate, discriminate, filter, update NCOs."""
    out = epl_correlate(block, state, config)
    ed = dll_discriminator(out, config.correlator_spacing_chips)
    ep = pll_discriminator(out)
    t = config.integration_ms * 1e-3
    n = block_length(state, config)

    g1p, _ = loop_gains(config.pll_bandwidth_hz)
    g1d, _ = loop_gains(config.dll_bandwidth_hz)
    _, pll_state = loop_filter(ep, state.pll_filter_state, config.pll_bandwidth_hz, t)
    _, dll_state = loop_filter(ed, state.dll_filter_state, config.dll_bandwidth_hz, t)

    doppler = state.doppler_hz + (pll_state[0] - state.pll_filter_state[0])
    code_rate = CHIP_RATE_HZ * (1.0 + doppler / L1_CARRIER_HZ) + dll_state[0]

    carrier_phase = _fixed_phase_advance_carrier(
        state.carrier_phase_cycles, state.doppler_hz, state.sample_rate_hz, n, t * g1p * ep
    )
    code_phase = _fixed_phase_advance_code(
        state.code_phase_chips, state.code_rate_hz, state.sample_rate_hz, n, t * g1d * ed
    )

    # carrier lock detector: narrowband difference over narrowband power, smoothed
    nbd = out.ip * out.ip - out.qp * out.qp
    nbp = out.ip * out.ip + out.qp * out.qp
    if state.epoch == 0:
        nbd_s, nbp_s = nbd, nbp
    else:
        alpha = 1.0 / LOCK_SMOOTHING_EPOCHS
        nbd_s = state.lock_nbd + alpha * (nbd - state.lock_nbd)
        nbp_s = state.lock_nbp + alpha * (nbp - state.lock_nbp)
    lock = nbd_s / nbp_s if nbp_s > 0 else 0.0

    new_state = replace(
        state,
        code_phase_chips=code_phase,
        carrier_phase_cycles=carrier_phase,
        doppler_hz=doppler,
        code_rate_hz=code_rate,
        dll_filter_state=dll_state,
        pll_filter_state=pll_state,
        epoch=state.epoch + 1,
        lock_nbd=nbd_s,
        lock_nbp=nbp_s,
    )
    out = replace(out, dll_error_chips=ed, pll_error_cycles=ep, lock_metric=lock)
    return new_state, out
