"""Desk-scale nonlocal dispersion cancellation experiment toolkit."""

from .analyze import (
    GaussianFit,
    LinearFit,
    WasakResult,
    dispersion_from_slope,
    evaluate_wasak,
    fit_gaussian,
    fit_linear,
    variance_from_fit,
)
from .config import ExperimentConfig, RunSpec, parse_config
from .correlate import Histogram, coarse_offset, fine_histogram, g2_normalize
from .model import (
    AnalyticPrediction,
    DispersionLeg,
    SourceParams,
    WasakInputs,
    classical_bound_rhs,
    farfield_fwhm,
    fwhm_from_sigma,
    g2_sigma,
    observed_variance,
    sigma_from_fwhm,
    wasak_w,
    wasak_w_uncertainty,
)
from .pipeline import measure_peak, run_simulation
from .simulate import DetectorSpec, PairEvents, TimerSpec, detect, digitize, generate_pairs, propagate
from .streams import TagStream
from .tagio import read_tags, write_tags

__version__ = "0.1.0"
