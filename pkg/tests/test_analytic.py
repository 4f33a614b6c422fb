"""Closed-form noise floor, beat power, SNR chain, and analytic PSD."""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.integrate import quad

from bilodyne.analytic import (
    CurrentAutocorrelation,
    DetectionReport,
    SensitivityRow,
    Spectrum,
    SpectrumKind,
    autocorr_diff_current,
    mean_diff_current,
    noise_figure,
    output_signal_power,
    psd_analytic,
    pulse_transfer,
    sensitivity_table,
    shot_floor_psd,
    snr_in,
    snr_out,
)
from bilodyne.correlators import excess_lines, lambda_ij
from bilodyne.errors import ConfigViolation, InvalidSpec, Unsupported
from bilodyne.model import (
    TWO_PI,
    DetectorParams,
    Hypothesis,
    PulseShape,
    calibrate_photon_energy,
)
from tests.conftest import (
    ETA,
    LO_FLUX,
    OMEGA_HET,
    OMEGA_S,
    SIGNAL_FLUX,
    coherent_state,
    mono_lo,
    squeezed_state,
    standard_detector,
    standard_lo,
    standard_measurement,
)

ALPHA = math.sqrt(2.0 * SIGNAL_FLUX)
E_LO = math.sqrt(LO_FLUX)


class TestPulseTransfer:
    def test_delta_is_flat(self):
        pulse = PulseShape.delta()
        w = np.array([0.0, 1e3, 1e7])
        np.testing.assert_array_equal(pulse_transfer(pulse, w), np.full(3, 1.0 + 0.0j))
        assert pulse_transfer(pulse, 0.0) == 1.0 + 0.0j

    def test_exponential_matches_quadrature(self):
        # Independent route: numerically Fourier-transform the normalized
        # pulse (1/tau) e^{-t/tau} and compare with the closed form.
        tau = 2.5e-6
        for w_tau in (0.5, 1.0, 2.0):
            w = w_tau / tau
            re, _ = quad(lambda t: math.exp(-t / tau) / tau * math.cos(w * t), 0.0, 60.0 * tau)
            im, _ = quad(lambda t: math.exp(-t / tau) / tau * math.sin(w * t), 0.0, 60.0 * tau)
            value = pulse_transfer(PulseShape.exponential(tau), w)
            assert value.real == pytest.approx(re, rel=1e-9)
            assert value.imag == pytest.approx(im, rel=1e-9)

    def test_exponential_half_power_point(self):
        tau = 1e-6
        value = pulse_transfer(PulseShape.exponential(tau), 1.0 / tau)
        assert abs(value) ** 2 == pytest.approx(0.5, rel=1e-12)

    def test_charge_scales_linearly(self):
        assert pulse_transfer(PulseShape.delta(), 0.0, charge=2.0) == 2.0 + 0.0j


class TestShotFloor:
    def test_delta_floor_value(self):
        floor = shot_floor_psd(standard_lo(), standard_detector(), 0.0)
        assert floor == 2.0 * ETA * LO_FLUX
        assert floor == 1400000.0

    def test_mono_and_bichromatic_floors_identical(self):
        w = TWO_PI * np.linspace(0.0, 5e6, 101)
        f_mono = shot_floor_psd(mono_lo(), standard_detector(), w)
        f_bi = shot_floor_psd(standard_lo(), standard_detector(), w)
        np.testing.assert_array_equal(f_mono, f_bi)

    def test_exponential_rolloff(self):
        tau = 1e-7
        det = DetectorParams(eta=ETA, pulse=PulseShape.exponential(tau))
        w = np.array([0.0, 1.0 / tau, 3.0 / tau])
        floor = shot_floor_psd(standard_lo(), det, w)
        expected = 2.0 * ETA * LO_FLUX / (1.0 + (w * tau) ** 2)
        np.testing.assert_allclose(floor, expected, rtol=1e-12)


class TestMeanDiffCurrent:
    def test_matched_phase_beat_amplitude(self):
        state = coherent_state(theta_s=0.0)
        t = np.linspace(0.0, TWO_PI / OMEGA_HET, 4096, endpoint=False)
        j = mean_diff_current(state, standard_lo(), standard_detector(), t)
        expected = 2.0 * ETA * ALPHA * E_LO
        assert np.max(np.abs(j)) == pytest.approx(expected, rel=1e-5)
        assert expected == pytest.approx(62609.903369994114, rel=1e-12)

    def test_quadrature_phase_cancels_exactly(self):
        # At theta_s - theta_bar = pi/2 the two tone beats are equal and
        # opposite at every instant, not merely on average.
        state = coherent_state(theta_s=math.pi / 2.0)
        t = np.linspace(0.0, 5.0 * TWO_PI / OMEGA_HET, 2000)
        j = mean_diff_current(state, standard_lo(), standard_detector(), t)
        assert np.max(np.abs(j)) < 1e-9 * 2.0 * ETA * ALPHA * E_LO

    def test_phase_envelope(self):
        theta = 0.7
        state = coherent_state(theta_s=theta)
        t = np.linspace(0.0, TWO_PI / OMEGA_HET, 4096, endpoint=False)
        j = mean_diff_current(state, standard_lo(), standard_detector(), t)
        expected = 2.0 * ETA * ALPHA * E_LO * abs(math.cos(theta))
        assert np.max(np.abs(j)) == pytest.approx(expected, rel=1e-5)

    def test_mono_lo_beat(self):
        state = coherent_state()
        lo = mono_lo(omega=OMEGA_S + OMEGA_HET)
        t = np.linspace(0.0, TWO_PI / OMEGA_HET, 4096, endpoint=False)
        j = mean_diff_current(state, lo, standard_detector(), t)
        expected = math.sqrt(2.0) * ETA * ALPHA * E_LO
        assert np.max(np.abs(j)) == pytest.approx(expected, rel=1e-5)

    def test_requires_delta_pulse_and_fixed_phase(self):
        det = DetectorParams(eta=ETA, pulse=PulseShape.exponential(1e-6))
        with pytest.raises(Unsupported):
            mean_diff_current(coherent_state(), standard_lo(), det, 0.0)
        with pytest.raises(Unsupported):
            mean_diff_current(
                coherent_state(averaged=True), standard_lo(), standard_detector(), 0.0
            )


class TestAutocorrelation:
    def test_coherent_input_has_no_smooth_part(self):
        state = coherent_state()
        for t in (0.0, 1.3e-5, 2.9e-5):
            ac = autocorr_diff_current(state, standard_lo(), standard_detector(), t, 1e-5)
            assert ac.smooth == 0.0
            assert ac.shot_impulse > 0.0

    def test_shot_weight_tracks_instantaneous_intensity(self):
        state = coherent_state()
        lo = standard_lo()
        det = standard_detector()
        # at t = 0 the two LO tones add in phase: |E(0)|^2 = 2 E_l^2
        ac0 = autocorr_diff_current(state, lo, det, 0.0, 0.0)
        assert ac0.shot_impulse == pytest.approx(
            ETA * (2.0 * LO_FLUX + SIGNAL_FLUX), rel=1e-6
        )
        t = np.linspace(0.0, TWO_PI / OMEGA_HET, 512, endpoint=False)
        avg = np.mean(
            [autocorr_diff_current(state, lo, det, tk, 0.0).shot_impulse for tk in t]
        )
        assert avg == pytest.approx(ETA * (LO_FLUX + SIGNAL_FLUX), rel=1e-6)

    def test_smooth_part_matches_correlator(self):
        state = squeezed_state(Hypothesis.ONE_FIELD)
        lo = standard_lo()
        det = standard_detector()
        t, tau = 1.1e-5, 0.4e-5
        ac = autocorr_diff_current(state, lo, det, t, tau)
        assert ac.smooth == pytest.approx(
            4.0 * ETA**2 * lambda_ij(state, lo, 1, 1, t, tau), rel=1e-12
        )

    def test_squeezed_populations_raise_shot_weight(self):
        state = squeezed_state(Hypothesis.ONE_FIELD, r=2.0)
        coh = coherent_state()
        lo = standard_lo()
        det = standard_detector()
        extra = (
            autocorr_diff_current(state, lo, det, 0.0, 0.0).shot_impulse
            - autocorr_diff_current(coh, lo, det, 0.0, 0.0).shot_impulse
        )
        assert extra == pytest.approx(ETA * math.sinh(2.0) ** 2, rel=1e-6)

    def test_delta_pulse_only(self):
        det = DetectorParams(eta=ETA, pulse=PulseShape.exponential(1e-6))
        with pytest.raises(Unsupported):
            autocorr_diff_current(coherent_state(), standard_lo(), det, 0.0, 0.0)


class TestAnalyticPsd:
    def test_coherent_psd_is_the_flat_floor(self):
        spec = psd_analytic(
            coherent_state(), standard_lo(), standard_detector(), standard_measurement()
        )
        assert spec.kind is SpectrumKind.ANALYTIC
        np.testing.assert_array_equal(spec.psd, np.full(spec.psd.size, 1400000.0))
        assert spec.freqs_hz[0] == 0.0
        assert spec.freqs_hz[-1] == pytest.approx(5e6)

    def test_mono_and_bichromatic_coherent_psd_bitwise_equal(self):
        det = standard_detector()
        cfg = standard_measurement()
        spec_bi = psd_analytic(coherent_state(), standard_lo(), det, cfg)
        spec_mono = psd_analytic(coherent_state(), mono_lo(), det, cfg)
        assert np.array_equal(spec_bi.psd, spec_mono.psd)

    def test_hypothesis_choice_invisible_for_coherent_input(self):
        det = standard_detector()
        cfg = standard_measurement()
        one = psd_analytic(coherent_state(), standard_lo(), det, cfg)
        state3 = coherent_state()
        state3 = type(state3)(
            modes=state3.modes,
            hypothesis=Hypothesis.THREE_FIELDS,
            squeeze=state3.squeeze,
            phase=state3.phase,
            cross_field_correlations=state3.cross_field_correlations,
        )
        three = psd_analytic(state3, standard_lo(), det, cfg)
        assert np.array_equal(one.psd, three.psd)

    def test_squeezed_lines_rendered_at_beat_bins(self):
        r = 0.5
        state = squeezed_state(Hypothesis.ONE_FIELD, r=r)
        cfg = standard_measurement()
        spec = psd_analytic(state, standard_lo(), standard_detector(), cfg)
        line_power = LO_FLUX * (math.e - 1.0) / 2.0
        expected_bump = ETA**2 * line_power / cfg.rbw
        i1 = int(round(1e5 / cfg.rbw))
        i3 = int(round(3e5 / cfg.rbw))
        assert spec.psd[i1] - 1400000.0 == pytest.approx(expected_bump, rel=1e-9)
        assert spec.psd[i3] - 1400000.0 == pytest.approx(expected_bump, rel=1e-9)
        off = np.ones(spec.psd.size, dtype=bool)
        off[[i1, i3]] = False
        np.testing.assert_array_equal(spec.psd[off], np.full(off.sum(), 1400000.0))

    def test_antimatched_dip_sits_below_floor(self):
        state = squeezed_state(Hypothesis.ONE_FIELD, r=0.5, theta_s=math.pi / 2.0)
        cfg = standard_measurement()
        spec = psd_analytic(state, standard_lo(), standard_detector(), cfg)
        i1 = int(round(1e5 / cfg.rbw))
        dip = ETA**2 * LO_FLUX * (math.exp(-1.0) - 1.0) / 2.0 / cfg.rbw
        assert spec.psd[i1] - 1400000.0 == pytest.approx(dip, rel=1e-9)
        assert spec.psd[i1] < 1400000.0

    def test_line_between_grid_points_rejected(self):
        state = squeezed_state(Hypothesis.ONE_FIELD)
        cfg = standard_measurement()
        sparse_grid = np.array([0.0, 5e4, 2e5, 4e5])
        with pytest.raises(ConfigViolation):
            psd_analytic(state, standard_lo(), standard_detector(), cfg, sparse_grid)

    def test_dip_deeper_than_floor_rejected(self):
        state = squeezed_state(Hypothesis.ONE_FIELD, r=2.0, theta_s=math.pi / 2.0)
        lo = standard_lo()
        lines = excess_lines(state, lo)
        cfg = standard_measurement(duration=20.0, rbw=0.1)
        grid = np.array([lines[0][0] / TWO_PI])
        with pytest.raises(ConfigViolation):
            psd_analytic(state, lo, standard_detector(), cfg, grid)

    def test_geometry_violations_propagate(self):
        cfg = standard_measurement(rbw=5e4)
        with pytest.raises(ConfigViolation):
            psd_analytic(coherent_state(), standard_lo(), standard_detector(), cfg)


class TestSpectrumContainer:
    def test_rejects_unsorted_grid(self):
        with pytest.raises(InvalidSpec):
            Spectrum(
                freqs_hz=np.array([0.0, 2.0, 1.0]),
                psd=np.ones(3),
                rbw_hz=1.0,
                kind=SpectrumKind.ANALYTIC,
            )

    def test_rejects_negative_psd(self):
        with pytest.raises(InvalidSpec):
            Spectrum(
                freqs_hz=np.array([0.0, 1.0, 2.0]),
                psd=np.array([1.0, -0.1, 1.0]),
                rbw_hz=1.0,
                kind=SpectrumKind.ANALYTIC,
            )

    def test_rejects_non_finite_psd(self):
        with pytest.raises(InvalidSpec):
            Spectrum(
                freqs_hz=np.array([0.0, 1.0]),
                psd=np.array([1.0, math.nan]),
                rbw_hz=1.0,
                kind=SpectrumKind.ESTIMATED,
            )

    def test_band_mean(self):
        spec = Spectrum(
            freqs_hz=np.arange(5, dtype=float),
            psd=np.array([1.0, 2.0, 3.0, 4.0, 5.0]),
            rbw_hz=1.0,
            kind=SpectrumKind.ANALYTIC,
        )
        assert spec.band_mean(1.0, 3.0) == pytest.approx(3.0)


class TestDetectionReport:
    def test_consistency_enforced(self):
        with pytest.raises(InvalidSpec):
            DetectionReport(
                snr_in_db=10.0,
                snr_out_db=10.0,
                nf_db=1.0,
                output_power=1.0,
                shot_floor=1.0,
            )

    def test_nan_marker_allowed(self):
        report = DetectionReport(
            snr_in_db=-math.inf,
            snr_out_db=-math.inf,
            nf_db=math.nan,
            output_power=0.0,
            shot_floor=1.0,
        )
        assert math.isnan(report.nf_db)


class TestOutputSignalPower:
    def test_phase_averaged_value(self):
        state = coherent_state(averaged=True)
        power = output_signal_power(state, standard_lo(), standard_detector())
        assert power == pytest.approx((ETA * ALPHA * E_LO) ** 2, rel=1e-12)

    def test_fixed_matched_phase_doubles_averaged(self):
        fixed = coherent_state(theta_s=0.0)
        averaged = coherent_state(averaged=True)
        det = standard_detector()
        assert output_signal_power(fixed, standard_lo(), det) == pytest.approx(
            2.0 * output_signal_power(averaged, standard_lo(), det), rel=1e-12
        )
        assert output_signal_power(fixed, standard_lo(), det) == pytest.approx(
            1.96e9, rel=1e-9
        )

    def test_quarter_wave_phase_equals_averaged(self):
        fixed = coherent_state(theta_s=math.pi / 4.0)
        averaged = coherent_state(averaged=True)
        det = standard_detector()
        assert output_signal_power(fixed, standard_lo(), det) == pytest.approx(
            output_signal_power(averaged, standard_lo(), det), rel=1e-12
        )

    def test_exponential_pulse_filters_beat(self):
        tau = 1.0 / OMEGA_HET
        det = DetectorParams(eta=ETA, pulse=PulseShape.exponential(tau))
        state = coherent_state(averaged=True)
        filtered = output_signal_power(state, standard_lo(), det)
        flat = output_signal_power(state, standard_lo(), standard_detector())
        assert filtered / flat == pytest.approx(0.5, rel=1e-6)

    def test_mono_lo_unsupported(self):
        with pytest.raises(Unsupported):
            output_signal_power(coherent_state(), mono_lo(), standard_detector())


class TestSnrChain:
    def test_noise_figure_vanishes_for_phase_averaged_coherent(self):
        det_pairs = [
            (1e2, 0.3, 1e5, 1.0),
            (1e3, 0.7, 1e6, 1e3),
            (5e4, 1.0, 1e7, 10.0),
            (2.6e9, 0.7, 2.6e11, 1e3),
        ]
        for flux, eta, lo_flux, rbw in det_pairs:
            state = coherent_state(flux=flux, averaged=True)
            lo = standard_lo(flux=lo_flux)
            det = standard_detector(eta=eta)
            nf = noise_figure(state, lo, det, rbw)
            assert abs(nf) < 1e-9

    def test_snr_out_is_pulse_independent(self):
        state = coherent_state(averaged=True)
        det_exp = DetectorParams(eta=ETA, pulse=PulseShape.exponential(3e-6))
        assert snr_out(state, standard_lo(), det_exp, 1e3) == pytest.approx(
            snr_out(state, standard_lo(), standard_detector(), 1e3), rel=1e-12
        )

    def test_fixed_matched_phase_gains_three_db(self):
        nf = noise_figure(coherent_state(theta_s=0.0), standard_lo(), standard_detector(), 1e3)
        assert nf == pytest.approx(-10.0 * math.log10(2.0), abs=1e-9)

    def test_zero_signal_markers(self):
        state = coherent_state(flux=0.0, averaged=True)
        det = standard_detector()
        assert snr_in(state, det, 1e3) == -math.inf
        assert snr_out(state, standard_lo(), det, 1e3) == -math.inf
        assert math.isnan(noise_figure(state, standard_lo(), det, 1e3))

    def test_squeezed_input_unsupported(self):
        state = squeezed_state(Hypothesis.ONE_FIELD)
        with pytest.raises(Unsupported):
            snr_out(state, standard_lo(), standard_detector(), 1e3)

    def test_rbw_must_be_positive(self):
        with pytest.raises(InvalidSpec):
            snr_in(coherent_state(), standard_detector(), 0.0)


class TestSensitivityTable:
    def test_reference_rows(self):
        e_ph = calibrate_photon_energy(0.5e-9, 1e-3, 0.7, 62.68)
        rows = sensitivity_table(e_ph)
        assert [round(r.power_w * 1e9, 2) for r in rows] == [0.5, 1.0, 2.0]
        expected_snr = (62.68, 65.69, 68.70)
        for row, snr in zip(rows, expected_snr):
            assert row.snr_in_db == pytest.approx(snr, abs=5e-3)
            assert row.snr_out_db == pytest.approx(snr, abs=5e-3)
            assert abs(row.nf_db) < 1e-9

    def test_anchor_flux(self):
        e_ph = calibrate_photon_energy(0.5e-9, 1e-3, 0.7, 62.68)
        rows = sensitivity_table(e_ph)
        assert rows[0].photon_flux == pytest.approx(0.5e-9 / e_ph, rel=1e-12)
        assert rows[0].photon_flux == pytest.approx(2647902319.3859834, rel=1e-6)

    def test_rejects_nonpositive_energy(self):
        with pytest.raises(InvalidSpec):
            sensitivity_table(0.0)

    def test_row_consistency(self):
        rows = sensitivity_table(2e-19, powers_w=(1e-9,))
        assert isinstance(rows[0], SensitivityRow)
        assert rows[0].nf_db == rows[0].snr_in_db - rows[0].snr_out_db
