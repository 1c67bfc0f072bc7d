"""Config-driven pipeline: generation, measurement, reconstruction, analysis.

Random streams are derived from ``SeedSequence([seed, stream, index])`` so
each setting and each bootstrap has its own reproducible generator.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import measure
from .config import ConfigError, ExperimentConfig
from .measure import CountRecord, GhzSuiteResult, MeasurementSetting
from .postselect import bell_after_conversion, bell_before_conversion, ghz_pipeline
from .qcore import DensityMatrix, StateVector, bell_state, fidelity_pure, ghz_state, partial_trace
from .tomography import calibrate_phase, default_grid, design, reconstruct
from .tomography.reconstruct import ReconstructionResult

STREAM_TOMO_COUNTS = 1
STREAM_GHZ_COUNTS = 2
STREAM_TOMO_BOOT = 3
STREAM_GHZ_BOOT = 4
STREAM_CALIBRATION = 5

COUNTS_HEADER = ("setting_id", "per_photon_basis", "outcome", "count")


def stream(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, *keys]))


@dataclass
class RunReport:
    config_echo: dict
    exact: bool
    success_probability: float
    true_fidelity: float
    count_tables: list[CountRecord] = field(default_factory=list)
    reconstruction: Optional[ReconstructionResult] = None
    ghz: Optional[GhzSuiteResult] = None

    def to_dict(self) -> dict:
        out = {
            "config_echo": self.config_echo,
            "exact": self.exact,
            "success_probability": self.success_probability,
            "true_fidelity": self.true_fidelity,
            "n_count_tables": len(self.count_tables),
        }
        if self.reconstruction is not None:
            r = self.reconstruction
            out["reconstruction"] = density_json(r) | {
                "log_likelihood": r.log_likelihood,
                "iterations": r.iterations,
                "converged": r.converged,
            }
        if self.ghz is not None:
            out["ghz"] = self.ghz.summary() | {"M_sigmas": self.ghz.M_sigmas, "P_sigma": self.ghz.P_sigma}
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def prepare(cfg: ExperimentConfig) -> tuple[DensityMatrix, float, StateVector]:
    """Simulated state on the measured photons, heralding probability, target ket."""
    if cfg.experiment == "bell_before_conversion":
        out = bell_before_conversion(cfg.source)
        return out.state, out.success_probability, bell_state()
    if cfg.experiment == "bell_after_conversion":
        out = bell_after_conversion(cfg.source, cfg.transducer)
        return out.state, out.success_probability, bell_state()
    out = ghz_pipeline(cfg.source, cfg.transducer, cfg.pbs_visibility)
    return partial_trace(out.state, [0, 1, 2]), out.success_probability, ghz_state(3)


def _measure(rho, settings: Sequence[MeasurementSetting], events: float, exact: bool, seed, stream_id):
    if exact:
        return [measure.expected_counts(rho, s, events) for s in settings]
    return [measure.sample_counts(rho, s, events, stream(seed, stream_id, i)) for i, s in enumerate(settings)]


def run(cfg: ExperimentConfig, exact: bool = False) -> RunReport:
    """Execute the configured experiment.

    ``exact`` replaces Poisson sampling by expected counts and the GHZ suite
    by exact expectation values; no bootstrap is run in that mode.
    """
    seed = cfg.sampling.seed
    if not exact and seed is None:
        raise ConfigError("required when sampling is enabled (or run in exact mode)", "sampling.seed")
    rho, p_success, target = prepare(cfg)
    events = cfg.sampling.events_per_setting
    nboot = 0 if exact else cfg.analysis.bootstrap_resamples
    report = RunReport(
        config_echo=cfg.flat(),
        exact=exact,
        success_probability=p_success,
        true_fidelity=fidelity_pure(rho, target),
    )
    if cfg.analysis.tomography:
        tomo = _measure(rho, design(rho.n_qubits).settings, events, exact, seed, STREAM_TOMO_COUNTS)
        report.count_tables.extend(tomo)
        report.reconstruction = reconstruct(
            tomo,
            target=target,
            n_resamples=nboot,
            seed=None if exact else [seed, STREAM_TOMO_BOOT],
        )
    if cfg.analysis.ghz_suite:
        suite = _measure(rho, measure.ghz_suite_settings(), events, exact, seed, STREAM_GHZ_COUNTS)
        report.count_tables.extend(suite)
        if exact:
            report.ghz = measure.ghz_suite_exact(rho)
        elif nboot:
            report.ghz = measure.ghz_suite_bootstrap(suite, nboot, [seed, STREAM_GHZ_BOOT])
        else:
            report.ghz = measure.ghz_suite_from_counts(suite)
    return report


# serialization


def _num(x) -> str:
    return str(x) if isinstance(x, int) else repr(float(x))


def outcome_token(outcome: Sequence[int]) -> str:
    return "".join("+" if s == 1 else "-" for s in outcome)


def parse_outcome(tok: str) -> tuple[int, ...]:
    if not tok or any(ch not in "+-" for ch in tok):
        raise ValueError(f"malformed outcome {tok!r}")
    return tuple(1 if ch == "+" else -1 for ch in tok)


def write_counts_csv(records: Sequence[CountRecord], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COUNTS_HEADER)
        for sid, rec in enumerate(records):
            for outcome, c in rec.counts.items():
                w.writerow([sid, rec.setting.descriptor(), outcome_token(outcome), _num(c)])


def read_counts_csv(path) -> list[CountRecord]:
    """Inverse of :func:`write_counts_csv`; rows are grouped by ``setting_id``."""
    groups: dict[str, tuple[tuple[str, ...], dict]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != COUNTS_HEADER:
            raise ValueError(f"{path}: header must be {','.join(COUNTS_HEADER)}")
        for lineno, row in enumerate(reader, 2):
            if not row:
                continue
            if len(row) != 4:
                raise ValueError(f"{path}:{lineno}: expected 4 columns, got {len(row)}")
            sid, bases, outcome, count = row
            toks = tuple(bases.split(";"))
            try:
                value = float(count)
                key = parse_outcome(outcome)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            entry = groups.setdefault(sid, (toks, {}))
            if entry[0] != toks:
                raise ValueError(f"{path}:{lineno}: setting {sid} changes basis")
            entry[1][key] = value
    records = []
    for toks, counts in groups.values():
        integral = all(float(v).is_integer() for v in counts.values())
        setting = MeasurementSetting(toks, tuple(counts))
        records.append(CountRecord(setting, counts, expected=not integral))
    return records


def _basis_labels(n: int) -> list[str]:
    return ["".join("HV"[(i >> (n - 1 - q)) & 1] for q in range(n)) for i in range(2**n)]


def density_json(res: ReconstructionResult) -> dict:
    m = res.rho_hat.matrix
    return {
        "n_qubits": res.rho_hat.n_qubits,
        "matrix": [[float(z.real), float(z.imag)] for z in m.reshape(-1)],
        "fidelity": res.fidelity,
        "sigma": res.fidelity_sigma,
    }


def write_density_files(res: ReconstructionResult, out_dir: Path) -> None:
    (out_dir / "density_matrix.json").write_text(json.dumps(density_json(res), indent=2) + "\n")
    labels = _basis_labels(res.rho_hat.n_qubits)
    with open(out_dir / "density_bars.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["row", "col", "real", "imag"])
        m = res.rho_hat.matrix
        for i, a in enumerate(labels):
            for j, b in enumerate(labels):
                w.writerow([a, b, repr(float(m[i, j].real)), repr(float(m[i, j].imag))])


def emit(report: RunReport, out_dir) -> list[Path]:
    """Write counts, density matrix, GHZ summary, plot data and the full report."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        written = [out / "counts.csv"]
        write_counts_csv(report.count_tables, written[0])
        if report.reconstruction is not None:
            write_density_files(report.reconstruction, out)
            written += [out / "density_matrix.json", out / "density_bars.csv"]
        if report.ghz is not None:
            g = report.ghz
            (out / "ghz_summary.json").write_text(json.dumps(g.summary(), indent=2) + "\n")
            with open(out / "expectation_bars.csv", "w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["observable", "value", "sigma"])
                for k, (v, s) in enumerate(zip(g.M_expectations, g.M_sigmas)):
                    w.writerow([f"M_{k}pi/3", repr(float(v)), repr(float(s))])
                w.writerow(["P", repr(float(g.P)), repr(float(g.P_sigma))])
            written += [out / "ghz_summary.json", out / "expectation_bars.csv"]
            hv = [r for r in report.count_tables if r.setting.per_photon == ("H", "H", "H")]
            if hv:
                with open(out / "counts_hv.csv", "w", newline="", encoding="utf-8") as fh:
                    w = csv.writer(fh, lineterminator="\n")
                    w.writerow(["outcome", "count"])
                    for outcome, c in hv[-1].counts.items():
                        w.writerow(["".join("H" if s == 1 else "V" for s in outcome), _num(c)])
                written.append(out / "counts_hv.csv")
        (out / "report.json").write_text(report.to_json())
        written.append(out / "report.json")
    except OSError as exc:
        raise OSError(f"cannot write to {exc.filename or out}: {exc.strerror}") from exc
    return written


def run_tomo(counts_path, out_dir, target: Optional[str] = None, n_resamples: int = 200, seed: int = 0) -> ReconstructionResult:
    records = read_counts_csv(counts_path)
    n = records[0].setting.n_photons
    ket = target_ket(target or "ghz", n)
    res = reconstruct(records, target=ket, n_resamples=n_resamples, seed=seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_density_files(res, out)
    return res


def target_ket(name: str, n: int) -> StateVector:
    """``ghz`` is (|H..H> + |V..V>)/sqrt2, the Bell state for two photons."""
    if name == "ghz":
        if n == 1:
            return StateVector(np.array([1, 1]) / math.sqrt(2))
        return ghz_state(n)
    raise ValueError(f"unknown target {name!r}")


def run_calibration(cfg: ExperimentConfig, out_dir, exact: bool = False, points: int = 64) -> dict:
    seed = cfg.sampling.seed
    if not exact and seed is None:
        raise ConfigError("required when sampling is enabled (or run in exact mode)", "sampling.seed")
    res = calibrate_phase(
        cfg.source.phase_phi,
        default_grid(points),
        cfg.sampling.events_per_setting,
        seed=None if exact else stream(seed, STREAM_CALIBRATION),
        visibility=cfg.source.visibility,
        exact=exact,
    )
    summary = {
        "source_phase": res.source_phase,
        "compensator_phase": res.compensator_phase,
        "grid_compensator_phase": res.grid_compensator_phase,
        "residual_phase": res.residual_phase,
    }
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "calibration.json").write_text(json.dumps(summary, indent=2) + "\n")
    with open(out / "calibration_scan.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["compensator_phase", "count_DA", "count_AD"])
        for c, (x, y) in zip(res.grid, res.counts):
            w.writerow([repr(float(c)), _num(int(x) if not exact else x), _num(int(y) if not exact else y)])
    return summary
