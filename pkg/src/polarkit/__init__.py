"""Polar-code toolkit: construction, fast tree decoding, latency models,
and an AWGN simulation harness."""

__version__ = "0.1.0"

from .codes import (
    CodeSpec,
    CrcSpec,
    Frame,
    bitrev_permutation,
    bits_to_hex,
    channel_llr,
    construct_frozen_set,
    crc_check,
    crc_compute,
    crc_spec,
    encode,
    hex_to_bits,
    load_frozen_json,
    polar_transform,
    save_frozen_json,
)
from .gaussian import (
    GaussianTable,
    TaConfig,
    build_ta_config,
    compute_means,
    eligibility_bound,
    min_c,
    phi,
    phi_inv,
    q,
    q_inv,
    threshold,
)
from .sc import decode_sc, f_op, g_op, hard_decisions
from .sim import (
    CSV_FIELDS,
    PointResult,
    StopRule,
    SweepPoint,
    awgn_channel,
    ebno_to_sigma,
    emit_report,
    run_point,
    run_sweep,
)
from .srfsc import (
    decode_sr,
    decode_srfsc,
    decode_source,
    egpc_parity,
    select_path,
    source_llrs,
    wagner_decode,
)
from .ta import (
    MultistageOutcome,
    TaOutcome,
    bler_upper_bound,
    decode_multistage,
    decode_ta_srfsc,
    try_hard_decide,
)
from .tree import (
    Census,
    LatencyReport,
    NodeId,
    NodeType,
    SourceType,
    SrDescriptor,
    classify,
    identify_sr_cover,
    node_census,
    repetition_sequences,
    schedule_time_steps,
    semi_parallel_cycles,
    sr_time_steps,
)
