"""Joint beamforming and power control for multicell massive MIMO under
coarse ADC/DAC quantization: joint, deterministic, and per-cell solvers for
narrowband and wideband OFDM networks, plus a Monte Carlo harness."""

__version__ = "0.1.0"

from . import errors
from .comp_solver import (
    SolveReport,
    build_K,
    dl_scaling,
    fixed_point_ul,
    mmse_combiner,
    solve_icomp,
    verify_solution,
)
from .deterministic import (
    CellEigenQuantities,
    deterministic_raw,
    eigen_quantities,
    repair_negative,
    solve_deterministic,
)
from .network import ChannelSet, Scenario, draw_channels, noise_power_dbm
from .ofdm_solver import (
    OfdmProblem,
    build_K_bar,
    ofdm_dl_scaling,
    ofdm_fixed_point,
    ofdm_mmse_combiner,
    solve_ofdm_icomp,
)
from .percell import percell_solve
from .quantization import QuantConfig, lloyd_max_mse, quant_gain
from .sinr import BeamformerSet, dl_sinr, mmse_ul_sinr, ofdm_dl_sinr, ofdm_ul_sinr, ul_sinr

__all__ = [
    "BeamformerSet",
    "CellEigenQuantities",
    "ChannelSet",
    "OfdmProblem",
    "QuantConfig",
    "Scenario",
    "SolveReport",
    "build_K",
    "build_K_bar",
    "deterministic_raw",
    "dl_scaling",
    "dl_sinr",
    "draw_channels",
    "eigen_quantities",
    "errors",
    "fixed_point_ul",
    "lloyd_max_mse",
    "mmse_combiner",
    "mmse_ul_sinr",
    "noise_power_dbm",
    "ofdm_dl_scaling",
    "ofdm_dl_sinr",
    "ofdm_fixed_point",
    "ofdm_mmse_combiner",
    "ofdm_ul_sinr",
    "percell_solve",
    "quant_gain",
    "repair_negative",
    "solve_deterministic",
    "solve_icomp",
    "solve_ofdm_icomp",
    "ul_sinr",
    "verify_solution",
]
