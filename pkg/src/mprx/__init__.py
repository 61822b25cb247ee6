"""Message-passing receivers for MIMO-OFDM link-level simulation."""

from .channel import (
    ChannelRealization,
    Observation,
    PowerDelayProfile,
    draw_channel,
    etu_profile,
    freq_prior_covariance,
    freq_response,
    transmit,
)
from .fec import ConvCodeSpec, Interleaver, bcjr_decode, conv_encode
from .frame import (
    FrameConfig,
    PilotPattern,
    ResourceGrid,
    build_default_config,
    build_pilot_pattern,
    flat_index,
    load_config,
)
from .harness import (
    MetricsTable,
    Scenario,
    eb_n0_to_noise_var,
    emit_results,
    read_results,
    run_monte_carlo,
)
from .modem import Constellation, SymbolBeliefGrid, combine_symbol_belief, extrinsic_symbol_pmf, map_bits, pmf_moments
from .numerics import GaussianDensity, gaussian_product, hpd_inverse, psd_sqrt_factor
from .receivers import ReceiverKind, ReceiverInputs, run_receiver
from .vmp import (
    ChannelPrior,
    DisjointChannelBelief,
    JointChannelBelief,
    NoisePrecisionBelief,
    disjoint_channel_update,
    em_restrict,
    joint_channel_update,
    noise_precision_update,
    noise_precision_update_pilot_only,
    vmp_symbol_update,
)

__version__ = "0.1.0"
