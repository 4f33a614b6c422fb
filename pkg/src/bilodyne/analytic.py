"""Closed-form photocurrent statistics for balanced detection.

PSD conventions: spectra are one-sided current power spectral densities
(current^2 per Hz) versus ordinary frequency in Hz.  With the unit load
resistance, "power" and "current squared" coincide.

SNR conventions: both input and output SNR count detected photons, so
the detector efficiency appears in both.  Input SNR is the mean photon
number eta * flux * t registered in a counting window t = 1 / rbw;
output SNR is the beat power over the shot power in one resolution
bandwidth.  The noise figure is their difference in dB by definition.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import correlators
from .errors import ConfigViolation, InvalidSpec, Unsupported
from .model import (
    TWO_PI,
    DetectorParams,
    FieldState,
    LocalOscillator,
    MeasurementConfig,
    ModeLabel,
    PulseShape,
    photon_flux,
    validate_measurement,
)


class SpectrumKind(str, enum.Enum):
    ANALYTIC = "analytic"
    ESTIMATED = "estimated"


@dataclass(frozen=True)
class Spectrum:
    """One-sided PSD samples on a strictly increasing frequency grid (Hz)."""

    freqs_hz: np.ndarray
    psd: np.ndarray
    rbw_hz: float
    kind: SpectrumKind

    def __post_init__(self):
        if self.freqs_hz.shape != self.psd.shape or self.freqs_hz.ndim != 1:
            raise InvalidSpec("frequency grid and PSD must be 1-d arrays of equal length")
        if self.freqs_hz.size >= 2 and not np.all(np.diff(self.freqs_hz) > 0):
            raise InvalidSpec("frequency grid must be strictly increasing")
        if self.rbw_hz <= 0:
            raise InvalidSpec("resolution bandwidth must be positive")
        if not np.all(np.isfinite(self.psd)):
            raise InvalidSpec("PSD contains non-finite values")
        if np.any(self.psd < 0):
            raise InvalidSpec("PSD must be non-negative everywhere")
        self.freqs_hz.setflags(write=False)
        self.psd.setflags(write=False)

    def band_mean(self, f_lo: float, f_hi: float) -> float:
        sel = (self.freqs_hz >= f_lo) & (self.freqs_hz <= f_hi)
        if not np.any(sel):
            raise InvalidSpec(f"no grid points in [{f_lo}, {f_hi}] Hz")
        return float(self.psd[sel].mean())


@dataclass(frozen=True)
class DetectionReport:
    """Scalar summary of a detection run.  nf_db is snr_in_db - snr_out_db."""

    snr_in_db: float
    snr_out_db: float
    nf_db: float
    output_power: float
    shot_floor: float
    beat_freq_hz: float | None = None

    def __post_init__(self):
        expected = self.snr_in_db - self.snr_out_db
        same = (
            expected == self.nf_db
            or (math.isnan(expected) and math.isnan(self.nf_db))
            or math.isclose(expected, self.nf_db, rel_tol=0.0, abs_tol=1e-12)
        )
        if not same:
            raise InvalidSpec("nf_db must equal snr_in_db - snr_out_db")


def pulse_transfer(pulse: PulseShape, omega, charge: float = 1.0):
    """Fourier transform K(w) of the single-emission current pulse.

    Delta pulses give the flat K = e; an exponential pulse of decay tau
    gives e / (1 - i w tau), i.e. |K|^2 = e^2 / (1 + w^2 tau^2).
    """
    w = np.asarray(omega, dtype=float)
    if pulse.is_delta:
        out = np.full(w.shape, charge, dtype=complex)
    else:
        out = charge / (1.0 - 1j * w * pulse.tau)
    return out if out.shape else complex(out)


def shot_floor_psd(lo: LocalOscillator, det: DetectorParams, omega) -> np.ndarray | float:
    """One-sided shot-noise floor 2 eta |K(w)|^2 E_l^2 of the difference current.

    This is the strong-LO closed form: the total rate is the LO flux
    E_l^2 alone, identical for mono and bichromatic oscillators of the
    same total amplitude.
    """
    k = pulse_transfer(det.pulse, omega, det.charge)
    return 2.0 * det.eta * np.abs(k) ** 2 * lo.amplitude**2


def _require_delta_fixed(state: FieldState, det: DetectorParams, what: str) -> None:
    if not det.pulse.is_delta:
        raise Unsupported(f"{what} is implemented for delta pulses only")
    if state.phase.averaged:
        raise Unsupported(f"{what} needs a fixed signal phase")


def mean_diff_current(state: FieldState, lo: LocalOscillator, det: DetectorParams, t):
    """Mean difference photocurrent <J_->(t) for delta pulses, fixed phase.

    Evaluated in the rotating frame, so only beat phases enter and the
    result stays accurate at arbitrary times.  A monochromatic LO gives
    a single beat at |w_l - w_s|; the bichromatic LO gives the
    phase-sensitive 2 eta e alpha E_l cos(theta_s - theta_bar) envelope
    on the heterodyne beat.
    """
    _require_delta_fixed(state, det, "mean_diff_current")
    ref = correlators.reference_frequency(state, lo)
    t_offs, t_amps = correlators.tone_phasors(lo, ref)
    m_offs, m_amps = correlators.mode_phasors(state, ref)
    t_arr = np.asarray(t, dtype=float)
    lo_t = np.exp(-1j * np.multiply.outer(t_arr, t_offs)) @ t_amps
    sig_t = np.exp(-1j * np.multiply.outer(t_arr, m_offs)) @ m_amps
    out = -2.0 * det.eta * det.charge * np.imag(lo_t * np.conj(sig_t))
    return out if out.shape else float(out)


@dataclass(frozen=True)
class CurrentAutocorrelation:
    """Autocorrelation of the difference current at one (t, tau) point.

    With delta pulses the shot contribution is a delta spike in tau;
    its weight is reported separately from the smooth excess part.
    """

    shot_impulse: float
    smooth: float


def autocorr_diff_current(
    state: FieldState,
    lo: LocalOscillator,
    det: DetectorParams,
    t: float,
    tau: float,
) -> CurrentAutocorrelation:
    """Two-time fluctuation autocorrelation of J_- for delta pulses.

    shot_impulse carries eta e^2 <I_1 + I_2>(t), the weight of the
    delta(tau) term; smooth carries the strong-LO excess term, which is
    zero for coherent input and picks up the squeeze-pair beats
    otherwise.
    """
    if not det.pulse.is_delta:
        raise Unsupported("autocorr_diff_current is implemented for delta pulses only")
    table = correlators.hypothesis_moments(state)
    ref = correlators.reference_frequency(state, lo)
    t_offs, t_amps = correlators.tone_phasors(lo, ref)
    m_offs, m_amps = correlators.mode_phasors(state, ref)
    lo_t = np.exp(-1j * t_offs * t) @ t_amps
    sig_t = np.exp(-1j * m_offs * t) @ m_amps
    total_intensity = abs(lo_t) ** 2 + abs(sig_t) ** 2 + correlators.fluctuation_flux(table)
    shot = det.eta * det.charge**2 * float(total_intensity)
    if table.is_zero():
        smooth = 0.0
    else:
        smooth = (
            4.0
            * det.eta**2
            * det.charge**2
            * correlators.lambda_ij(state, lo, 1, 1, t, tau)
        )
    return CurrentAutocorrelation(shot_impulse=shot, smooth=smooth)


def psd_analytic(
    state: FieldState,
    lo: LocalOscillator,
    det: DetectorParams,
    cfg: MeasurementConfig,
    freqs_hz: np.ndarray | None = None,
) -> Spectrum:
    """One-sided PSD of the difference current: shot floor plus beat lines.

    The period-averaged excess noise of a squeezed input lives in
    discrete beat lines; each line of power P appears as P / rbw on the
    grid point nearest its frequency, the way a spectrum analyzer of
    that resolution bandwidth would display it.  Raises ConfigViolation
    if a squeezed dip is deeper than the shot floor can absorb within
    one bin (the discrete-pair model is invalid at such a fine rbw), or
    if the heterodyne beat does not clear the rbw/sample-rate limits.
    """
    validate_measurement(cfg, lo)
    if freqs_hz is None:
        n_bins = int(round(cfg.sample_rate / 2.0 / cfg.rbw))
        freqs_hz = cfg.rbw * np.arange(n_bins + 1)
    freqs_hz = np.asarray(freqs_hz, dtype=float)
    omega = TWO_PI * freqs_hz
    psd = np.asarray(shot_floor_psd(lo, det, omega), dtype=float).copy()
    lines = correlators.excess_lines(state, lo)
    k2 = np.abs(pulse_transfer(det.pulse, np.array([w for w, _ in lines]), det.charge)) ** 2
    for (w_line, power), k2_line in zip(lines, k2):
        f_line = w_line / TWO_PI
        if f_line > freqs_hz[-1] + cfg.rbw / 2.0 or power == 0.0:
            continue
        idx = int(np.argmin(np.abs(freqs_hz - f_line)))
        if abs(freqs_hz[idx] - f_line) > cfg.rbw / 2.0 + 1e-9 * max(1.0, f_line):
            raise ConfigViolation(
                f"beat line at {f_line:g} Hz falls between grid points; "
                "use a grid aligned with the resolution bandwidth"
            )
        psd[idx] += det.eta**2 * k2_line * power / cfg.rbw
    if np.any(psd < 0):
        raise ConfigViolation(
            "squeezed dip exceeds the shot floor within one rbw bin; the "
            "discrete-pair model needs a coarser rbw at this squeezing"
        )
    return Spectrum(freqs_hz=freqs_hz, psd=psd, rbw_hz=cfg.rbw, kind=SpectrumKind.ANALYTIC)


def _single_signal_amplitude(state: FieldState) -> float:
    excited = state.excited_modes()
    if not excited and state.signal_modes():
        return 0.0
    if len(excited) != 1 or excited[0].label is not ModeLabel.SIGNAL:
        raise Unsupported("beat power is defined for exactly one excited signal mode")
    return abs(excited[0].amplitude)


def output_signal_power(state: FieldState, lo: LocalOscillator, det: DetectorParams) -> float:
    """Mean power of the heterodyne beat in the difference current.

    With a fixed signal phase the beat amplitude is
    2 eta e alpha E_l cos(theta_s - theta_bar), giving time-averaged
    power 2 (eta e alpha E_l)^2 cos^2(theta_s - theta_bar); averaging
    uniformly over theta_s leaves (eta e alpha E_l)^2.  A non-delta
    pulse filters the beat by |K(Omega)|^2 / e^2.
    """
    if not lo.is_bichromatic:
        raise Unsupported("output_signal_power is defined for the bichromatic LO")
    alpha = _single_signal_amplitude(state)
    k_beat = pulse_transfer(det.pulse, lo.omega_het, det.charge)
    base = (det.eta * alpha * lo.amplitude) ** 2 * abs(k_beat) ** 2
    if state.phase.averaged:
        return base
    return 2.0 * base * math.cos(state.phase.theta_s - lo.theta_bar) ** 2


def snr_out(
    state: FieldState,
    lo: LocalOscillator,
    det: DetectorParams,
    rbw_hz: float = 1.0,
) -> float:
    """Output SNR in dB: beat power over shot power in one rbw.

    The pulse transfer function cancels between numerator and floor, so
    the result is pulse-independent: eta alpha^2 / (2 rbw) for the
    phase-averaged convention.  Zero signal gives -inf dB.
    """
    if state.is_squeezed():
        raise Unsupported("snr_out closed form applies to coherent input only")
    if rbw_hz <= 0:
        raise InvalidSpec("rbw must be positive")
    p_out = output_signal_power(state, lo, det)
    floor = shot_floor_psd(lo, det, lo.omega_het)
    ratio = p_out / (float(floor) * rbw_hz)
    return 10.0 * math.log10(ratio) if ratio > 0 else -math.inf


def snr_in(state: FieldState, det: DetectorParams, rbw_hz: float = 1.0) -> float:
    """Input SNR in dB: mean detected photon number in a 1/rbw window.

    Shot-limited counting of the signal alone gives SNR = eta * flux * t
    with t = 1 / rbw.  Zero flux gives -inf dB.
    """
    if rbw_hz <= 0:
        raise InvalidSpec("rbw must be positive")
    n_mean = det.eta * photon_flux(state) / rbw_hz
    return 10.0 * math.log10(n_mean) if n_mean > 0 else -math.inf


def noise_figure(
    state: FieldState,
    lo: LocalOscillator,
    det: DetectorParams,
    rbw_hz: float = 1.0,
) -> float:
    """Noise figure in dB, snr_in - snr_out.  NaN when both are undefined."""
    s_in = snr_in(state, det, rbw_hz)
    s_out = snr_out(state, lo, det, rbw_hz)
    if math.isinf(s_in) and math.isinf(s_out):
        return math.nan
    return s_in - s_out


@dataclass(frozen=True)
class SensitivityRow:
    """One optical power in the sensitivity table."""

    power_w: float
    photon_flux: float
    snr_in_db: float
    snr_out_db: float
    nf_db: float


def sensitivity_table(
    photon_energy_j: float,
    *,
    powers_w: tuple[float, ...] = (0.5e-9, 1.0e-9, 2.0e-9),
    window_s: float = 1e-3,
    eta: float = 0.7,
) -> list[SensitivityRow]:
    """Input/output SNR and noise figure versus optical power.

    Each row converts the optical power to a photon flux, builds the
    phase-averaged coherent state and a strong bichromatic LO, and runs
    the full snr_in / snr_out chain with rbw = 1 / window.
    """
    from .model import FieldMode, PhaseMode, build_field_state

    if photon_energy_j <= 0:
        raise InvalidSpec("photon energy must be positive")
    rbw = 1.0 / window_s
    det = DetectorParams(eta=eta)
    rows = []
    omega_s = 1.0e15  # placeholder optical carrier; SNRs do not depend on it
    omega_het = TWO_PI * 20.0 * rbw
    for p in powers_w:
        flux = p / photon_energy_j
        alpha = math.sqrt(2.0 * flux)
        state = build_field_state(
            [FieldMode(frequency=omega_s, amplitude=alpha)],
            phase=PhaseMode.averaged_phase(),
        )
        lo = LocalOscillator.bichromatic(
            amplitude=math.sqrt(200.0 * flux),
            omega_1=omega_s + omega_het,
            theta_1=0.0,
            omega_2=omega_s - omega_het,
            theta_2=0.0,
        )
        s_in = snr_in(state, det, rbw)
        s_out = snr_out(state, lo, det, rbw)
        rows.append(
            SensitivityRow(
                power_w=p,
                photon_flux=flux,
                snr_in_db=s_in,
                snr_out_db=s_out,
                nf_db=s_in - s_out,
            )
        )
    return rows
