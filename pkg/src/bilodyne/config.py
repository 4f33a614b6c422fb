"""Run configuration: strict flat key-value files and object assembly.

Format: one `key = value` pair per line, `#` starts a comment, blank
lines ignored.  Keys are dotted and flat (no sections).  Unknown keys
are rejected rather than ignored, so typos fail loudly.  All
frequencies in config files are ordinary frequencies in Hz; angular
frequencies exist only inside the model layer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from .errors import ParseError, UnknownKey
from .model import (
    TWO_PI,
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
)
from .montecarlo import ScenarioParams


def _parse_bool(text: str) -> bool:
    low = text.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_float_list(text: str) -> tuple[float, ...]:
    return tuple(float(v.strip()) for v in text.split(",") if v.strip())


# key -> (converter, default).  None default means "must be set if used".
SCHEMA: dict = {
    "field.signal_flux": (float, 1.0e3),
    "field.carrier_hz": (float, 2.82e14),
    "field.theta_s": (float, 0.0),
    "field.phase_averaged": (_parse_bool, False),
    "field.hypothesis": (str, "one-field"),
    "squeeze.enabled": (_parse_bool, False),
    "squeeze.r": (float, 0.5),
    "squeeze.phi": (float, 0.0),
    "squeeze.offset_hz": (float, 2.0e5),
    "squeeze.placement": (str, "image"),
    "lo.kind": (str, "bichromatic"),
    "lo.flux": (float, 1.0e6),
    "lo.f_het_hz": (float, 1.0e5),
    "lo.theta_1": (float, 0.0),
    "lo.theta_2": (float, 0.0),
    "detector.eta": (float, 0.7),
    "detector.pulse": (str, "delta"),
    "detector.pulse_tau_s": (float, 0.0),
    "measurement.duration_s": (float, 2.0),
    "measurement.rbw_hz": (float, 1.0e3),
    "measurement.sample_rate_hz": (float, 1.0e7),
    "measurement.seed": (int, 20260815),
    "measurement.n_segments": (int, 16),
    "simulate.scenario": (str, "default"),
    "scan.powers_nw": (_parse_float_list, (0.5, 1.0, 2.0)),
    "scan.window_s": (float, 1.0e-3),
    "scan.anchor_snr_db": (float, 62.68),
    "scan.lo_ratio": (float, 100.0),
    "scan.f_het_hz": (float, 2.0e6),
    "scan.sample_rate_hz": (float, 4.0e7),
    "scan.rbw_hz": (float, 2.0e5),
    "scan.duration_s": (float, 1.7e-4),
    "scan.count_windows": (int, 4),
    "output.write_trace": (_parse_bool, False),
}

_CHOICES = {
    "field.hypothesis": ("one-field", "three-fields"),
    "squeeze.placement": ("image", "sideband"),
    "lo.kind": ("mono", "bichromatic"),
    "detector.pulse": ("delta", "exponential"),
    "simulate.scenario": ("default", "shot-floor", "beatnote", "null-phase", "sensitivity"),
}


def parse_config(path: Path | str) -> dict:
    """Read a config file into a fully-defaulted, validated value map."""
    values = {key: default for key, (_, default) in SCHEMA.items()}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in SCHEMA:
            raise UnknownKey(f"{path}:{lineno}: unknown key {key!r}")
        if not value:
            raise ParseError(f"{path}:{lineno}: empty value for {key!r}")
        converter, _ = SCHEMA[key]
        try:
            values[key] = converter(value)
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: bad value for {key!r}: {exc}") from None
    for key, choices in _CHOICES.items():
        if values[key] not in choices:
            raise ParseError(f"{path}: {key} must be one of {choices}, got {values[key]!r}")
    if values["detector.pulse"] == "exponential" and values["detector.pulse_tau_s"] <= 0:
        raise ParseError(f"{path}: exponential pulse needs detector.pulse_tau_s > 0")
    return values


@dataclass(frozen=True)
class RunConfig:
    """A parsed config plus the command-line scenario selection."""

    scenario: str
    values: dict

    @classmethod
    def load(cls, scenario: str, path: Path | str, seed_override: int | None = None) -> "RunConfig":
        values = parse_config(path)
        if seed_override is not None:
            values = dict(values, **{"measurement.seed": seed_override})
        return cls(scenario=scenario, values=values)

    def build_state(self) -> FieldState:
        v = self.values
        omega_s = TWO_PI * v["field.carrier_hz"]
        alpha = math.sqrt(2.0 * v["field.signal_flux"])
        modes = [FieldMode(frequency=omega_s, amplitude=alpha, label=ModeLabel.SIGNAL)]
        squeeze = None
        if v["squeeze.enabled"]:
            d = TWO_PI * v["squeeze.offset_hz"]
            upper = ModeLabel.IMAGE1 if v["squeeze.placement"] == "image" else ModeLabel.SIDEBAND
            lower = ModeLabel.IMAGE2 if v["squeeze.placement"] == "image" else ModeLabel.SIDEBAND
            modes.append(FieldMode(frequency=omega_s + d, amplitude=0.0, label=upper))
            modes.append(FieldMode(frequency=omega_s - d, amplitude=0.0, label=lower))
            squeeze = SqueezeSpec(
                pairs=(
                    SqueezePair(
                        freq_a=omega_s + d,
                        freq_b=omega_s - d,
                        r=v["squeeze.r"],
                        phi=v["squeeze.phi"],
                    ),
                )
            )
        phase = (
            PhaseMode.averaged_phase()
            if v["field.phase_averaged"]
            else PhaseMode.fixed(v["field.theta_s"])
        )
        return build_field_state(
            modes,
            hypothesis=Hypothesis(v["field.hypothesis"]),
            squeeze=squeeze,
            phase=phase,
        )

    def build_lo(self) -> LocalOscillator:
        v = self.values
        omega_s = TWO_PI * v["field.carrier_hz"]
        amplitude = math.sqrt(v["lo.flux"])
        if v["lo.kind"] == "mono":
            return LocalOscillator.mono(amplitude, omega_s, v["lo.theta_1"])
        d = TWO_PI * v["lo.f_het_hz"]
        return LocalOscillator.bichromatic(
            amplitude=amplitude,
            omega_1=omega_s + d,
            theta_1=v["lo.theta_1"],
            omega_2=omega_s - d,
            theta_2=v["lo.theta_2"],
        )

    def build_detector(self) -> DetectorParams:
        v = self.values
        pulse = (
            PulseShape.delta()
            if v["detector.pulse"] == "delta"
            else PulseShape.exponential(v["detector.pulse_tau_s"])
        )
        return DetectorParams(eta=v["detector.eta"], pulse=pulse)

    def build_measurement(self) -> MeasurementConfig:
        v = self.values
        return MeasurementConfig(
            duration=v["measurement.duration_s"],
            rbw=v["measurement.rbw_hz"],
            sample_rate=v["measurement.sample_rate_hz"],
            seed=v["measurement.seed"],
            n_segments=v["measurement.n_segments"],
        )

    def scenario_params(self) -> ScenarioParams:
        v = self.values
        return ScenarioParams(
            lo_flux=v["lo.flux"],
            signal_flux=v["field.signal_flux"],
            eta=v["detector.eta"],
            f_het_hz=v["lo.f_het_hz"],
            sample_rate_hz=v["measurement.sample_rate_hz"],
            duration_s=v["measurement.duration_s"],
            rbw_hz=v["measurement.rbw_hz"],
            n_segments=v["measurement.n_segments"],
            theta_s=v["field.theta_s"],
            carrier_hz=v["field.carrier_hz"],
            powers_w=tuple(p * 1e-9 for p in v["scan.powers_nw"]),
            anchor_power_w=v["scan.powers_nw"][0] * 1e-9,
            anchor_window_s=v["scan.window_s"],
            anchor_snr_db=v["scan.anchor_snr_db"],
            scan_lo_ratio=v["scan.lo_ratio"],
            scan_f_het_hz=v["scan.f_het_hz"],
            scan_sample_rate_hz=v["scan.sample_rate_hz"],
            scan_rbw_hz=v["scan.rbw_hz"],
            scan_duration_s=v["scan.duration_s"],
            scan_count_windows=v["scan.count_windows"],
        )
