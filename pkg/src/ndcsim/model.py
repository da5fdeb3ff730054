"""Analytic model of dispersion-broadened photon-pair timing correlations.

All widths and variances are carried in picoseconds / ps**2; dispersion
products k''*l are carried in ps**2 (1 ps**2 = 1e-24 s**2).  Conversion from
SI units happens at configuration-parse time, never here.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .errors import ParameterError

# FWHM of a unit-sigma Gaussian.
FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))

SPEED_OF_LIGHT_M_PER_S = 299_792_458.0

# Ratio |k2l| / (gamma*D^2*L^2) below which the far-field approximation of the
# single-arm width is dubious; we warn rather than fail.
FARFIELD_WARN_RATIO = 10.0


@dataclass(frozen=True)
class SourceParams:
    """Photon-pair source: crystal geometry and spectral width.

    ``sigma_omega`` is the angular-frequency std of the signal detuning in
    rad/ps.  If None, it defaults to 1/(2*sqrt(gamma)*D*L) so that the
    Monte-Carlo time-difference variance reproduces the analytic dispersion
    term exactly.
    """

    crystal_length_cm: float = 1.0
    inverse_gvd_ps_per_cm: float = 2.96
    gamma: float = 0.04822
    pair_rate_hz: float = 24000.0
    sigma_omega: float | None = None

    def __post_init__(self):
        if self.crystal_length_cm <= 0:
            raise ParameterError("crystal_length_cm must be > 0")
        if self.inverse_gvd_ps_per_cm <= 0:
            raise ParameterError("inverse_gvd_ps_per_cm must be > 0")
        if self.gamma <= 0:
            raise ParameterError("gamma must be > 0")
        if self.pair_rate_hz < 0:
            raise ParameterError("pair_rate_hz must be >= 0")
        if self.sigma_omega is not None and self.sigma_omega <= 0:
            raise ParameterError("sigma_omega must be > 0")

    @property
    def dl_ps(self) -> float:
        """D*L, the crystal walk-off time in ps."""
        return self.inverse_gvd_ps_per_cm * self.crystal_length_cm

    @property
    def base_variance_ps2(self) -> float:
        """gamma*D^2*L^2: time-difference variance with no dispersion."""
        return self.gamma * self.dl_ps**2

    @property
    def base_sigma_ps(self) -> float:
        """sqrt(gamma)*D*L: intrinsic pair time-difference std."""
        return math.sqrt(self.base_variance_ps2)

    @property
    def effective_sigma_omega(self) -> float:
        if self.sigma_omega is not None:
            return self.sigma_omega
        return 1.0 / (2.0 * self.base_sigma_ps)


@dataclass(frozen=True)
class DispersionLeg:
    """One dispersive fiber channel between source and detector."""

    k2_s2_per_m: float = 0.0
    length_km: float = 0.0
    attenuation_db_per_km: float = 0.2
    group_index: float = 1.468

    def __post_init__(self):
        if self.length_km < 0:
            raise ParameterError("length_km must be >= 0")
        if self.attenuation_db_per_km < 0:
            raise ParameterError("attenuation_db_per_km must be >= 0")
        if self.group_index < 1:
            raise ParameterError("group_index must be >= 1")

    @property
    def k2l_ps2(self) -> float:
        """Accumulated dispersion k''*l in ps**2."""
        return self.k2_s2_per_m * self.length_km * 1e3 * 1e24

    @property
    def survival_probability(self) -> float:
        return 10.0 ** (-self.attenuation_db_per_km * self.length_km / 10.0)

    @property
    def group_delay_fs(self) -> float:
        return self.length_km * 1e3 * self.group_index / SPEED_OF_LIGHT_M_PER_S * 1e15


@dataclass(frozen=True)
class AnalyticPrediction:
    """Predicted pair-correlation peak for a given dispersion configuration."""

    sigma_ps: float
    fwhm_ps: float
    center_offset_ps: float
    dispersion_sum_ps2: float
    dispersion_magnitude_2bl_ps2: float


@dataclass(frozen=True)
class WasakInputs:
    """Observed variances entering the Bell-like witness.

    ``var_before`` / ``var_after`` are the time-difference variances before
    and after dispersive propagation (ps**2), ``two_beta_l`` the average
    magnitude of the applied dispersions (ps**2).
    """

    var_before_ps2: float
    var_before_err_ps2: float
    var_after_ps2: float
    var_after_err_ps2: float
    two_beta_l_ps2: float

    def __post_init__(self):
        if self.var_before_ps2 <= 0 or self.var_after_ps2 <= 0:
            raise ParameterError("variances must be > 0")
        if self.var_before_err_ps2 < 0 or self.var_after_err_ps2 < 0:
            raise ParameterError("variance uncertainties must be >= 0")
        if self.two_beta_l_ps2 < 0:
            raise ParameterError("two_beta_l must be >= 0")


def g2_sigma(src: SourceParams, disp_s_ps2: float, disp_i_ps2: float) -> float:
    """Gaussian std (ps) of the pair time-difference distribution.

    sigma = sqrt(g + ((k_s''l_1 + k_i''l_2)/2)^2 / g) with g = gamma*D^2*L^2.
    Minimal exactly when the two accumulated dispersions cancel.
    """
    g = src.base_variance_ps2
    half_sum = 0.5 * (disp_s_ps2 + disp_i_ps2)
    return math.sqrt(g + half_sum**2 / g)


def fwhm_from_sigma(sigma_ps: float) -> float:
    if sigma_ps <= 0:
        raise ParameterError("sigma must be > 0")
    return FWHM_PER_SIGMA * sigma_ps


def sigma_from_fwhm(fwhm_ps: float) -> float:
    if fwhm_ps <= 0:
        raise ParameterError("fwhm must be > 0")
    return fwhm_ps / FWHM_PER_SIGMA


def farfield_eta(src: SourceParams) -> float:
    """Slope factor eta = sqrt(2 ln2 / gamma) / (D*L), in 1/ps."""
    return math.sqrt(2.0 * math.log(2.0) / src.gamma) / src.dl_ps


def farfield_fwhm(src: SourceParams, k2l_ps2: float) -> float:
    """Single-arm far-field FWHM eta*|k''l| (ps).

    Valid when the accumulated dispersion dominates the intrinsic width;
    warns when |k2l| < 10 * gamma*D^2*L^2.
    """
    if abs(k2l_ps2) < FARFIELD_WARN_RATIO * src.base_variance_ps2:
        warnings.warn(
            "far-field approximation dubious: |k2l| = %.4g ps^2 is not >> "
            "%.4g ps^2" % (abs(k2l_ps2), src.base_variance_ps2),
            stacklevel=2,
        )
    return farfield_eta(src) * abs(k2l_ps2)


def observed_variance(source_var_ps2: float, jitter_var_ps2: float) -> float:
    """Quadrature sum of independent source and detection-jitter variances."""
    if source_var_ps2 < 0 or jitter_var_ps2 < 0:
        raise ParameterError("variances must be >= 0")
    return source_var_ps2 + jitter_var_ps2


def wasak_w(inputs: WasakInputs) -> float:
    """Normalized witness W = a*b / (a^2 + c^2).

    a = variance before, b = variance after, c = dispersion magnitude 2*beta*l.
    Classical sources satisfy W >= 1; W < 1 certifies entanglement.
    """
    a = inputs.var_before_ps2
    b = inputs.var_after_ps2
    c = inputs.two_beta_l_ps2
    return a * b / (a * a + c * c)


def wasak_w_uncertainty(inputs: WasakInputs) -> float:
    """First-order propagated 1-sigma uncertainty of the witness."""
    a = inputs.var_before_ps2
    b = inputs.var_after_ps2
    c = inputs.two_beta_l_ps2
    denom = a * a + c * c
    dw_db = a / denom
    dw_da = b * (c * c - a * a) / denom**2
    return math.hypot(dw_da * inputs.var_before_err_ps2, dw_db * inputs.var_after_err_ps2)


def classical_bound_rhs(var_before_ps2: float, two_beta_l_ps2: float) -> float:
    """Minimum post-dispersion variance allowed for classical light (ps**2)."""
    if var_before_ps2 <= 0:
        raise ParameterError("var_before must be > 0")
    return var_before_ps2 + two_beta_l_ps2**2 / var_before_ps2


def dispersion_magnitude_2bl(disp_s_ps2: float, disp_i_ps2: float) -> float:
    """Average magnitude of the two applied dispersions (ps**2)."""
    return 0.5 * (abs(disp_s_ps2) + abs(disp_i_ps2))


def predict(src: SourceParams, disp_s_ps2: float, disp_i_ps2: float) -> AnalyticPrediction:
    """Full analytic prediction for a two-arm dispersion configuration.

    The peak center is a free parameter recovered by offset alignment, so
    ``center_offset_ps`` is reported as 0 here.
    """
    sigma = g2_sigma(src, disp_s_ps2, disp_i_ps2)
    return AnalyticPrediction(
        sigma_ps=sigma,
        fwhm_ps=fwhm_from_sigma(sigma),
        center_offset_ps=0.0,
        dispersion_sum_ps2=disp_s_ps2 + disp_i_ps2,
        dispersion_magnitude_2bl_ps2=dispersion_magnitude_2bl(disp_s_ps2, disp_i_ps2),
    )
