"""Analytic-model tests: frozen reference values and algebraic properties."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ndcsim import model
from ndcsim.errors import ParameterError
from ndcsim.model import (
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

SRC = SourceParams()

# Measured variances of the violating configuration: (15.982 +- 0.150 ps)^2
# before and (45.676 +- 4.565 ps)^2 after dispersion, 2*beta*l = 1428.92 ps^2.
REFERENCE_INPUTS = WasakInputs(
    var_before_ps2=15.982**2,
    var_before_err_ps2=2 * 15.982 * 0.150,
    var_after_ps2=45.676**2,
    var_after_err_ps2=2 * 45.676 * 4.565,
    two_beta_l_ps2=1428.92,
)

finite_pos = st.floats(min_value=1e-3, max_value=1e6, allow_nan=False)


class TestG2Sigma:
    def test_no_dispersion(self):
        # sqrt(0.04822) * 2.96 ps
        assert g2_sigma(SRC, 0.0, 0.0) == pytest.approx(0.6500, abs=5e-5)

    def test_violating_configuration(self):
        # 62 km SMF / 7.47 km DCF, residual sum 55.45 ps^2
        assert g2_sigma(SRC, -1401.20, 1456.65) == pytest.approx(42.66, abs=0.01)

    @given(a=st.floats(-2e3, 2e3), b=st.floats(-2e3, 2e3))
    def test_symmetric_in_leg_order(self, a, b):
        assert g2_sigma(SRC, a, b) == g2_sigma(SRC, b, a)

    @given(s=st.floats(-2e3, 2e3), split=st.floats(0.0, 1.0))
    def test_depends_only_on_sum(self, s, split):
        assert g2_sigma(SRC, s * split, s * (1 - split)) == pytest.approx(
            g2_sigma(SRC, s, 0.0), rel=1e-12
        )

    @given(s=st.floats(1e-6, 2e3))
    def test_minimum_at_zero_sum(self, s):
        assert g2_sigma(SRC, s, 0.0) > g2_sigma(SRC, 0.0, 0.0)
        assert g2_sigma(SRC, s, -s) == pytest.approx(SRC.base_sigma_ps)

    def test_invalid_parameters_rejected(self):
        with pytest.raises(ParameterError):
            SourceParams(gamma=-1.0)
        with pytest.raises(ParameterError):
            SourceParams(inverse_gvd_ps_per_cm=0.0)
        with pytest.raises(ParameterError):
            SourceParams(crystal_length_cm=-2.0)


class TestFwhm:
    def test_jitter_floor_width(self):
        assert fwhm_from_sigma(15.967) == pytest.approx(37.6, abs=0.01)

    def test_violating_width(self):
        assert fwhm_from_sigma(42.66) == pytest.approx(100.46, abs=0.02)

    def test_rejects_degenerate(self):
        with pytest.raises(ParameterError):
            fwhm_from_sigma(0.0)
        with pytest.raises(ParameterError):
            sigma_from_fwhm(-1.0)

    @given(sigma=finite_pos)
    def test_round_trip(self, sigma):
        assert sigma_from_fwhm(fwhm_from_sigma(sigma)) == pytest.approx(sigma, rel=1e-12)


class TestFarField:
    def test_eta_constant(self):
        assert model.farfield_eta(SRC) == pytest.approx(1.8114, abs=2e-4)

    def test_smf_per_km(self):
        assert farfield_fwhm(SRC, 22.6) == pytest.approx(40.94, abs=0.01)

    def test_dcf_per_km(self):
        assert farfield_fwhm(SRC, 195.0) == pytest.approx(353.2, abs=0.1)

    def test_fitted_smf_slope(self):
        # 1 km at the fitted k2 of 2.37e-26 s^2/m; reference slope 42.96 ps/km
        assert farfield_fwhm(SRC, 23.7) == pytest.approx(42.96, rel=5e-3)

    def test_warns_near_field(self):
        with pytest.warns(UserWarning):
            farfield_fwhm(SRC, 9.0 * SRC.base_variance_ps2)

    @given(ratio=st.floats(20.0, 1e5))
    def test_matches_exact_width_in_far_field(self, ratio):
        k2l = ratio * SRC.base_variance_ps2
        exact = fwhm_from_sigma(g2_sigma(SRC, k2l, 0.0))
        assert farfield_fwhm(SRC, k2l) == pytest.approx(exact, rel=0.01)


class TestObservedVariance:
    def test_jitter_dominated(self):
        v = observed_variance(0.4225, 254.9)
        assert v == pytest.approx(255.32, abs=0.01)
        assert math.sqrt(v) == pytest.approx(15.98, abs=0.01)

    def test_zero_jitter_identity(self):
        assert observed_variance(3.7, 0.0) == 3.7

    def test_violating_configuration(self):
        v = observed_variance(1819.9, 254.9)
        assert v == pytest.approx(2074.8, abs=0.1)
        # the reference measured 45.676 ps is within 0.3 %
        assert math.sqrt(v) == pytest.approx(45.676, rel=3e-3)

    def test_negative_rejected(self):
        with pytest.raises(ParameterError):
            observed_variance(-1.0, 0.0)


class TestWasak:
    def test_reference_value(self):
        assert wasak_w(REFERENCE_INPUTS) == pytest.approx(0.253, abs=1e-3)

    def test_reference_uncertainty(self):
        assert wasak_w_uncertainty(REFERENCE_INPUTS) == pytest.approx(0.051, rel=0.05)

    def test_violation_significance(self):
        w = wasak_w(REFERENCE_INPUTS)
        sig = (1 - w) / wasak_w_uncertainty(REFERENCE_INPUTS)
        assert sig == pytest.approx(14.4, abs=0.5)

    def test_no_dispersion_no_broadening(self):
        inputs = WasakInputs(100.0, 0.0, 100.0, 0.0, 0.0)
        assert wasak_w(inputs) == pytest.approx(1.0)

    def test_algebraic_boundary(self):
        c = 17.3
        inputs = WasakInputs(c, 0.0, 2 * c, 0.0, c)
        assert wasak_w(inputs) == pytest.approx(1.0, rel=1e-12)

    def test_zero_errors_zero_uncertainty(self):
        inputs = WasakInputs(100.0, 0.0, 300.0, 0.0, 50.0)
        assert wasak_w_uncertainty(inputs) == 0.0

    def test_invalid_inputs_rejected(self):
        with pytest.raises(ParameterError):
            WasakInputs(-1.0, 0.0, 1.0, 0.0, 0.0)
        with pytest.raises(ParameterError):
            WasakInputs(1.0, 0.0, 1.0, 0.0, -1.0)
        with pytest.raises(ParameterError):
            WasakInputs(1.0, -0.5, 1.0, 0.0, 1.0)

    @given(a=finite_pos, b=finite_pos, c=st.floats(0.0, 1e6))
    def test_violation_iff_below_classical_bound(self, a, b, c):
        inputs = WasakInputs(a, 0.0, b, 0.0, c)
        assert (wasak_w(inputs) < 1.0) == (b < classical_bound_rhs(a, c))

    @given(a=finite_pos, b=finite_pos, c=st.floats(0.0, 1e6), lam=st.floats(1e-3, 1e3))
    def test_scaling_invariance(self, a, b, c, lam):
        w1 = wasak_w(WasakInputs(a, 0.0, b, 0.0, c))
        w2 = wasak_w(WasakInputs(lam * a, 0.0, lam * b, 0.0, lam * c))
        assert w2 == pytest.approx(w1, rel=1e-9)

    @settings(max_examples=50)
    @given(
        a=st.floats(10.0, 1e4),
        b=st.floats(10.0, 1e4),
        c=st.floats(0.0, 1e4),
        ea=st.floats(0.1, 10.0),
        eb=st.floats(0.1, 10.0),
    )
    def test_uncertainty_matches_finite_differences(self, a, b, c, ea, eb):
        inputs = WasakInputs(a, ea, b, eb, c)
        analytic = wasak_w_uncertainty(inputs)

        def w_of(aa, bb):
            return wasak_w(WasakInputs(aa, 0.0, bb, 0.0, c))

        ha = a * 1e-6
        hb = b * 1e-6
        dw_da = (w_of(a + ha, b) - w_of(a - ha, b)) / (2 * ha)
        dw_db = (w_of(a, b + hb) - w_of(a, b - hb)) / (2 * hb)
        numeric = math.hypot(dw_da * ea, dw_db * eb)
        assert analytic == pytest.approx(numeric, rel=1e-6, abs=1e-12)


class TestClassicalBound:
    def test_violating_configuration_bound(self):
        bound = classical_bound_rhs(255.4, 1428.92)
        assert bound == pytest.approx(8250.0, abs=1.0)
        assert math.sqrt(bound) == pytest.approx(90.8, abs=0.1)
        assert 2086.0 < bound  # measured post-dispersion variance is far below

    def test_no_dispersion(self):
        assert classical_bound_rhs(42.0, 0.0) == 42.0

    def test_equal_terms(self):
        assert classical_bound_rhs(7.0, 7.0) == pytest.approx(14.0)

    def test_zero_variance_rejected(self):
        with pytest.raises(ParameterError):
            classical_bound_rhs(0.0, 1.0)


class TestDispersionLeg:
    def test_accumulated_dispersion(self):
        smf = DispersionLeg(k2_s2_per_m=-2.26e-26, length_km=62.0)
        dcf = DispersionLeg(k2_s2_per_m=1.95e-25, length_km=7.47, attenuation_db_per_km=0.5)
        assert smf.k2l_ps2 == pytest.approx(-1401.2, abs=0.05)
        assert dcf.k2l_ps2 == pytest.approx(1456.65, abs=0.05)
        assert model.dispersion_magnitude_2bl(smf.k2l_ps2, dcf.k2l_ps2) == pytest.approx(
            1428.92, abs=0.5
        )

    def test_survival(self):
        smf = DispersionLeg(k2_s2_per_m=-2.26e-26, length_km=62.0, attenuation_db_per_km=0.2)
        assert smf.survival_probability == pytest.approx(10 ** (-1.24), rel=1e-9)

    def test_invalid_rejected(self):
        with pytest.raises(ParameterError):
            DispersionLeg(length_km=-1.0)
        with pytest.raises(ParameterError):
            DispersionLeg(group_index=0.5)


class TestPredict:
    def test_fields_consistent(self):
        pred = model.predict(SRC, -1401.20, 1456.65)
        assert pred.fwhm_ps == pytest.approx(model.FWHM_PER_SIGMA * pred.sigma_ps)
        assert pred.dispersion_sum_ps2 == pytest.approx(55.45)
        assert pred.dispersion_magnitude_2bl_ps2 == pytest.approx(1428.925)
