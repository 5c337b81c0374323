"""Software GNSS L1 baseband engine and throughput measurement harness."""

from gnssperf.acquisition import AcqConfig, AcqResult, acquire_all, acquire_channel
from gnssperf.buffers import ComputePath, ComputePathPolicy, IqBuffer, Precision, Spectrum
from gnssperf.cacode import CaCode, generate_ca_code
from gnssperf.executor import (
    EpochTask,
    ExecPlan,
    ExecTrace,
    PriorityHint,
    Schedule,
    plan_partition,
    run_epochs,
    verify_ordering,
)
from gnssperf.gnss_signal import (
    NcoState,
    SignalSpec,
    add_awgn,
    carrier_replica,
    sample_code_replica,
    synthesize_signal,
)
from gnssperf.harness import (
    BenchConfig,
    EffectiveRunReport,
    GnssWorkload,
    SyntheticWorkload,
    compare_precision,
    detect_saturation,
    effective_running_time,
    run_bench,
)
from gnssperf.tracking import (
    TrackConfig,
    TrackOutput,
    TrackState,
    dll_discriminator,
    epl_correlate,
    init_from_acquisition,
    loop_filter,
    pll_discriminator,
    track_epoch,
)

__version__ = "0.1.0"
