# SPDX-License-Identifier: Apache-2.0
from ._mcbf import (
    ChannelModel,
    ChannelSet,
    Error,
    SystemConfig,
    assemble_beamformer,
    asymptotic_lambda,
    bench,
    build_R,
    fixed_point_lambda,
    gen_channels,
    min_sinr_ratio,
    sinr,
    solve_mmf,
    solve_qos,
    total_power,
    unicast_reference,
    validate,
)

__all__ = [
    "ChannelModel",
    "ChannelSet",
    "Error",
    "SystemConfig",
    "assemble_beamformer",
    "asymptotic_lambda",
    "bench",
    "build_R",
    "fixed_point_lambda",
    "gen_channels",
    "min_sinr_ratio",
    "sinr",
    "solve_mmf",
    "solve_qos",
    "total_power",
    "unicast_reference",
    "validate",
]
