"""Shaped trellis-coded modulation with CRC-aided list decoding.

End-to-end chain: shell-mapping / constant-composition distribution matcher,
systematic CRC, tail-biting convolutional encoding onto a set-partitioned
8-AM constellation, serial list Viterbi decoding, and finite-blocklength
achievability bounds for comparison.
"""

from .bounds import GridOverflow, NotBracketed, RcuConfig, RcuPoint, rcu_bound, rcu_curve, rcu_gap
from .codes import standard_code
from .crc import CrcSpec, crc_check, crc_encode, enumerate_generators
from .decoder import DecoderConfig, DecodeResult, list_candidates, slvd_decode
from .harness import (
    FerRecord,
    System,
    SystemConfig,
    build_system,
    crc_search,
    load_config,
    run_sweep,
    simulate_fer,
    transmit,
)
from .modulation import Constellation, shaped_8am, snr_to_sigma
from .shaping import (
    AmplitudeDistribution,
    CcdmMapper,
    NotInCodebook,
    ShellMapper,
    normalized_kl,
)
from .tbcc import ConvCodeSpec, SingularMatrix, Trellis, UnrealizableSpec, build_trellis, tb_encode

__all__ = [
    "AmplitudeDistribution",
    "CcdmMapper",
    "Constellation",
    "ConvCodeSpec",
    "CrcSpec",
    "DecodeResult",
    "DecoderConfig",
    "FerRecord",
    "GridOverflow",
    "NotBracketed",
    "NotInCodebook",
    "RcuConfig",
    "RcuPoint",
    "ShellMapper",
    "SingularMatrix",
    "System",
    "SystemConfig",
    "Trellis",
    "UnrealizableSpec",
    "build_system",
    "build_trellis",
    "crc_check",
    "crc_encode",
    "crc_search",
    "enumerate_generators",
    "list_candidates",
    "load_config",
    "normalized_kl",
    "rcu_bound",
    "rcu_curve",
    "rcu_gap",
    "run_sweep",
    "shaped_8am",
    "simulate_fer",
    "slvd_decode",
    "snr_to_sigma",
    "standard_code",
    "tb_encode",
    "transmit",
]
