__version__ = "0.1.0"

from .config import RunConfig, load_config
from .model import (
    ChainSpec,
    build_h_eff,
    build_h_inv,
    realize,
    sample_offsets,
)
from .spectrum import ModeTarget, diagonalize, select_target_mode
from .ensemble import run_ensemble, stats_table
from .scaling import fit_exponential, fit_power_law, xi_table
from .fss import collapse
from .localization import center_statistics, participation_ratio
from .analysis import run_analysis
from . import defaults, fake_data, io
