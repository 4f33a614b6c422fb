"""Command-line entry point.

Usage:
    bilodyne <scenario> --config <path> [--out <dir>] [--seed <int>]

Scenarios:
    analytic          closed-form PSD and detection report
    simulate          Monte Carlo experiment (simulate.scenario in config)
    table1            SNR / noise-figure table over the configured powers
    squeezed-compare  analytic PSD under both field-grouping hypotheses

Exit codes: 0 success, 2 a tolerance check failed, 1 config or model error.
All outputs land in the --out directory; reruns with the same config and
seed are byte-identical except the report timestamp.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .analytic import (
    DetectionReport,
    noise_figure,
    output_signal_power,
    psd_analytic,
    sensitivity_table,
    shot_floor_psd,
    snr_in,
    snr_out,
)
from .config import RunConfig
from .errors import BilodyneError, ConfigViolation
from .io import write_report_json, write_spectrum_csv, write_trace_bin
from .model import TWO_PI, calibrate_photon_energy
from .montecarlo import run_experiment

SCENARIOS = ("analytic", "simulate", "table1", "squeezed-compare")


def _report_payload(cfg: RunConfig) -> dict:
    return {
        "scenario": cfg.scenario,
        "generated_at": datetime.now(timezone.utc).isoformat(),
        "version": __version__,
        "seed": cfg.values["measurement.seed"],
        "config": {k: list(v) if isinstance(v, tuple) else v for k, v in sorted(cfg.values.items())},
    }


def _run_analytic(cfg: RunConfig, out_dir: Path) -> int:
    state = cfg.build_state()
    lo = cfg.build_lo()
    det = cfg.build_detector()
    meas = cfg.build_measurement()
    spectrum = psd_analytic(state, lo, det, meas)
    write_spectrum_csv(out_dir / "spectrum.csv", spectrum)
    payload = _report_payload(cfg)
    results: dict = {
        "shot_floor": float(shot_floor_psd(lo, det, TWO_PI * cfg.values["lo.f_het_hz"])),
    }
    if not state.is_squeezed() and lo.is_bichromatic:
        s_in = snr_in(state, det, meas.rbw)
        s_out = snr_out(state, lo, det, meas.rbw)
        report = DetectionReport(
            snr_in_db=s_in,
            snr_out_db=s_out,
            nf_db=noise_figure(state, lo, det, meas.rbw),
            output_power=output_signal_power(state, lo, det),
            shot_floor=results["shot_floor"],
            beat_freq_hz=cfg.values["lo.f_het_hz"],
        )
        results.update(
            {
                "snr_in_db": _json_float(report.snr_in_db),
                "snr_out_db": _json_float(report.snr_out_db),
                "nf_db": _json_float(report.nf_db),
                "output_power": report.output_power,
                "beat_freq_hz": report.beat_freq_hz,
            }
        )
    payload["results"] = results
    write_report_json(out_dir / "report.json", payload)
    return 0


def _json_float(x: float):
    """JSON has no inf/nan literals; encode them as strings."""
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "-inf" if x < 0 else "inf"
    return x


def _run_simulate(cfg: RunConfig, out_dir: Path) -> int:
    params = cfg.scenario_params()
    report = run_experiment(
        cfg.values["simulate.scenario"],
        params,
        seed=cfg.values["measurement.seed"],
        keep_traces=cfg.values["output.write_trace"],
    )
    for name, spectrum in report.spectra.items():
        suffix = "" if len(report.spectra) == 1 else f"_{name}"
        write_spectrum_csv(out_dir / f"spectrum{suffix}.csv", spectrum)
    for name, trace in report.traces.items():
        write_trace_bin(out_dir / "trace.bin", trace)
    payload = _report_payload(cfg)
    payload["results"] = {
        "mc_scenario": report.scenario,
        "checks": [c.as_dict() for c in report.checks],
        "scalars": report.scalars,
        "passed": report.passed,
    }
    write_report_json(out_dir / "report.json", payload)
    for check in report.checks:
        verdict = "PASS" if check.passed else "FAIL"
        print(
            f"{verdict}: {check.name} "
            f"(value={check.value:.6g}, target={check.target:.6g}, "
            f"tol={check.tolerance:.3g})"
        )
    return 0 if report.passed else 2


def _run_table(cfg: RunConfig, out_dir: Path) -> int:
    v = cfg.values
    e_ph = calibrate_photon_energy(
        v["scan.powers_nw"][0] * 1e-9,
        v["scan.window_s"],
        v["detector.eta"],
        v["scan.anchor_snr_db"],
    )
    rows = sensitivity_table(
        e_ph,
        powers_w=tuple(p * 1e-9 for p in v["scan.powers_nw"]),
        window_s=v["scan.window_s"],
        eta=v["detector.eta"],
    )
    lines = ["power_nw,snr_in_db,snr_out_db,nf_db"]
    for row in rows:
        lines.append(
            f"{row.power_w * 1e9:.2f},{row.snr_in_db:.2f},{row.snr_out_db:.2f},{row.nf_db:.2f}"
        )
    (out_dir / "table.csv").write_text("\n".join(lines) + "\n")
    payload = _report_payload(cfg)
    payload["results"] = {
        "photon_energy_j": e_ph,
        "rows": [dataclasses.asdict(row) for row in rows],
    }
    write_report_json(out_dir / "report.json", payload)
    return 0


def _run_squeezed_compare(cfg: RunConfig, out_dir: Path) -> int:
    if not cfg.values["squeeze.enabled"]:
        raise ConfigViolation("squeezed-compare needs squeeze.enabled = true")
    state = cfg.build_state()
    lo = cfg.build_lo()
    det = cfg.build_detector()
    meas = cfg.build_measurement()
    from .model import Hypothesis

    spectra = {}
    for hyp in (Hypothesis.ONE_FIELD, Hypothesis.THREE_FIELDS):
        variant = dataclasses.replace(state, hypothesis=hyp)
        spectra[hyp.value] = psd_analytic(variant, lo, det, meas)
    one = spectra[Hypothesis.ONE_FIELD.value]
    three = spectra[Hypothesis.THREE_FIELDS.value]
    write_spectrum_csv(out_dir / "spectrum_one_field.csv", one)
    write_spectrum_csv(out_dir / "spectrum_three_fields.csv", three)
    diff = one.psd - three.psd
    payload = _report_payload(cfg)
    payload["results"] = {
        "max_abs_difference": float(abs(diff).max()),
        "min_psd_one_field": float(one.psd.min()),
        "min_psd_three_fields": float(three.psd.min()),
        "shot_floor": float(shot_floor_psd(lo, det, TWO_PI * cfg.values["lo.f_het_hz"])),
    }
    write_report_json(out_dir / "report.json", payload)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="bilodyne",
        description="Quantum-noise spectra and photoemission Monte Carlo "
        "for balanced detection with mono- and bichromatic local oscillators.",
    )
    parser.add_argument("scenario", choices=SCENARIOS)
    parser.add_argument("--config", required=True, help="path to a key = value config file")
    parser.add_argument("--out", default="out", help="output directory (created if missing)")
    parser.add_argument("--seed", type=int, default=None, help="override measurement.seed")
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig.load(args.scenario, args.config, seed_override=args.seed)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        if args.scenario == "analytic":
            return _run_analytic(cfg, out_dir)
        if args.scenario == "simulate":
            return _run_simulate(cfg, out_dir)
        if args.scenario == "table1":
            return _run_table(cfg, out_dir)
        return _run_squeezed_compare(cfg, out_dir)
    except (BilodyneError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
