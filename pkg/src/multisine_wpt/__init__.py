"""Multisine waveform design for RF wireless power transfer."""

from .channel import (ChannelResponse, MultipathChannel, frequency_response,
                      generate_channel)
from .quadrature import QuadratureSpec
from .rectenna import (DcOperatingPoint, ExponentOverflowError, RectennaParams,
                       harvested_power, rectifier_rhs, solve_dc, taylor_rhs)
from .signal_model import (FrequencyGrid, MultisineWaveform, build_grid,
                           eval_received, eval_transmit, transmit_power)

__version__ = "0.1.0"

__all__ = [
    "ChannelResponse", "DcOperatingPoint", "ExponentOverflowError", "FrequencyGrid",
    "MultipathChannel", "MultisineWaveform", "QuadratureSpec", "RectennaParams",
    "build_grid", "eval_received", "eval_transmit", "frequency_response", "generate_channel",
    "harvested_power", "rectifier_rhs", "solve_dc", "taylor_rhs", "transmit_power",
]
