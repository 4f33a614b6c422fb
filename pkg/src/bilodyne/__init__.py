"""Quantum-noise modelling for balanced optical detection.

Closed-form photocurrent spectra, SNR and noise-figure accounting for
mono- and bichromatic local oscillators, cross-validated by a
stochastic photoemission Monte Carlo.
"""

__version__ = "0.1.0"

from .analytic import (
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
from .correlators import (
    MomentTable,
    excess_lines,
    fock_oracle_moments,
    hypothesis_moments,
    lambda_ij,
    mean_field,
    second_moments,
)
from .model import (
    DetectorParams,
    FieldMode,
    FieldState,
    Hypothesis,
    LocalOscillator,
    MeasurementConfig,
    ModeLabel,
    PhaseMode,
    PulseShape,
    SqueezePair,
    SqueezeSpec,
    build_field_state,
    calibrate_photon_energy,
    photon_flux,
    validate_measurement,
)
from .montecarlo import (
    BeatnoteEstimate,
    CheckResult,
    CurrentTrace,
    EmissionTimes,
    ExperimentReport,
    ScenarioParams,
    estimate_psd,
    extract_beatnote,
    intensity_rate,
    rate_bound,
    run_experiment,
    sample_emission_times,
    synthesize_current,
    thinning_sample,
)
