"""Sweep configuration, the cell -> effective -> fine/macro -> diagnostics pipeline, and reports."""

from __future__ import annotations

import csv
import io
import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .cell import (CoefficientField, CorrectorSet, EtaField, PeriodicGrid, PotentialField,
                   solve_corrector, solve_eta, validate_coefficient, validate_potential)
from .descriptors import CoefficientDescriptor, PotentialDescriptor, SourceDescriptor, StateDescriptor
from .effective import EffectiveModel, effective_model
from .errors import ParseError, SchemaViolation, StageError, UnsatisfiableResolution
from .fine import FineProblem, WaveField, energy_norms, mass_history, solve_fine
from .macro import MacroProblem, solve_homogenized
from .twoscale import (SlowFactor, TestFunction, TrigPolynomial, corrector_pairing, first_order_field,
                       limit_pairing, limit_system_residual, reconstruct_u1, space_time_l2_error,
                       two_scale_pairing)

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
WORKERS_ENV = "SCHRODINGER_HOMOG_WORKERS"

DEFAULTS: dict[str, Any] = {
    "schema_version": SCHEMA_VERSION,
    "problem": {
        "d": 1,
        "T": 0.5,
        "coefficient": {"kind": "cosine", "mean": 1.0, "amplitude": 0.5},
        "potential": {"kind": "cosine", "amplitude": 1.0, "wavenumber": 1, "time_wavenumber": 1},
        "initial": {"kind": "gaussian", "width": 0.1},
        "source": {"spatial": {"kind": "zero"}, "omega": 0.0},
    },
    "eps": [1 / 8, 1 / 16, 1 / 32, 1 / 64],
    "cell": {"M": 256, "K": 64},
    "resolution": {"factor": 16, "max_samples": 20_000_000},
    "homogenized_form": "consistent",
    "output": {"directory": "out"},
    "seed": 0,
    "workers": 1,
}

_TOP_KEYS = set(DEFAULTS)
_PROBLEM_KEYS = set(DEFAULTS["problem"])


@dataclass(frozen=True)
class SweepConfig:
    d: int
    T: float
    coefficient: CoefficientDescriptor
    potential: PotentialDescriptor
    initial: StateDescriptor
    source: SourceDescriptor
    eps: tuple[float, ...]
    M: int = 256
    K: int = 64
    resolution: float = 16
    max_samples: int = 20_000_000
    homogenized_form: str = "consistent"
    output_dir: str = "out"
    seed: int = 0
    workers: int = 1
    defaults_used: tuple[str, ...] = field(default=(), compare=False)

    @property
    def grid(self) -> PeriodicGrid:
        return PeriodicGrid(self.d, self.M, self.K)

    def fine_problem(self, eps: float) -> FineProblem:
        return FineProblem.resolved(self.d, eps, self.T, self.coefficient, self.potential,
                                    self.initial, self.source, self.resolution)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "problem": {"d": self.d, "T": self.T, "coefficient": self.coefficient.to_dict(),
                        "potential": self.potential.to_dict(), "initial": self.initial.to_dict(),
                        "source": self.source.to_dict()},
            "eps": list(self.eps),
            "cell": {"M": self.M, "K": self.K},
            "resolution": {"factor": self.resolution, "max_samples": self.max_samples},
            "homogenized_form": self.homogenized_form,
            "output": {"directory": self.output_dir},
            "seed": self.seed,
            "workers": self.workers,
        }


def _merge(defaults: dict, given: dict, prefix: str, used: list[str]) -> dict:
    out = {}
    for key, dval in defaults.items():
        if key in given:
            gval = given[key]
            if isinstance(dval, dict) and key not in ("coefficient", "potential", "initial", "source"):
                if not isinstance(gval, dict):
                    raise SchemaViolation(prefix + key, "expected a mapping")
                out[key] = _merge(dval, gval, prefix + key + ".", used)
            else:
                out[key] = gval
        else:
            out[key] = dval
            used.append(prefix + key)
    return out


def _descriptor(cls, data, key):
    if not isinstance(data, dict):
        raise SchemaViolation(key, "expected a mapping")
    try:
        return cls.from_dict(data)
    except (TypeError, ValueError) as exc:
        raise SchemaViolation(key, str(exc)) from exc


def config_from_dict(raw: dict) -> SweepConfig:
    if not isinstance(raw, dict):
        raise SchemaViolation("<root>", "config must be a mapping")
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        raise SchemaViolation(sorted(unknown)[0], "unknown key")
    if "problem" in raw:
        if not isinstance(raw["problem"], dict):
            raise SchemaViolation("problem", "expected a mapping")
        bad = set(raw["problem"]) - _PROBLEM_KEYS
        if bad:
            raise SchemaViolation("problem." + sorted(bad)[0], "unknown key")
    version = raw.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise SchemaViolation("schema_version", f"unsupported version {version!r}")
    used: list[str] = []
    cfg = _merge(DEFAULTS, raw, "", used)
    prob = cfg["problem"]

    d = prob["d"]
    if d not in (1, 2):
        raise SchemaViolation("problem.d", "must be 1 or 2")
    T = prob["T"]
    if not isinstance(T, (int, float)) or T <= 0:
        raise SchemaViolation("problem.T", "must be a positive number")
    eps = cfg["eps"]
    if not isinstance(eps, list) or not eps:
        raise SchemaViolation("eps", "must be a non-empty list")
    try:
        eps = [float(e) for e in eps]
    except (TypeError, ValueError) as exc:
        raise SchemaViolation("eps", "entries must be numbers") from exc
    if any(not 0 < e < 1 for e in eps):
        raise SchemaViolation("eps", "values must lie in (0, 1)")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise SchemaViolation("eps", "values must be strictly decreasing")
    M, K = cfg["cell"]["M"], cfg["cell"]["K"]
    try:
        PeriodicGrid(d, int(M), int(K))
    except (TypeError, ValueError) as exc:
        raise SchemaViolation("cell", str(exc)) from exc
    form = cfg["homogenized_form"]
    if form not in ("consistent", "literal"):
        raise SchemaViolation("homogenized_form", "must be 'consistent' or 'literal'")
    factor = float(cfg["resolution"]["factor"])
    if factor <= 0:
        raise SchemaViolation("resolution.factor", "must be positive")
    workers = int(cfg["workers"])
    if workers < 1:
        raise SchemaViolation("workers", "must be >= 1")

    out = SweepConfig(
        d=d, T=float(T),
        coefficient=_descriptor(CoefficientDescriptor, prob["coefficient"], "problem.coefficient"),
        potential=_descriptor(PotentialDescriptor, prob["potential"], "problem.potential"),
        initial=_descriptor(StateDescriptor, prob["initial"], "problem.initial"),
        source=_descriptor(SourceDescriptor, prob["source"], "problem.source"),
        eps=tuple(eps), M=int(M), K=int(K), resolution=factor,
        max_samples=int(cfg["resolution"]["max_samples"]), homogenized_form=form,
        output_dir=str(cfg["output"]["directory"]), seed=int(cfg["seed"]), workers=workers,
        defaults_used=tuple(used),
    )
    check_resolution(out)
    return out


def check_resolution(cfg: SweepConfig) -> None:
    for e in cfg.eps:
        p = cfg.fine_problem(e)
        samples = (p.steps + 1) * (p.n + 2) ** cfg.d
        if samples > cfg.max_samples:
            raise UnsatisfiableResolution(
                f"eps={e:g} needs n={p.n}, {p.steps} steps ({samples} samples) "
                f"> budget {cfg.max_samples}")


def load_config(path: str | Path) -> SweepConfig:
    try:
        raw = yaml.safe_load(Path(path).read_text())
    except yaml.YAMLError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return config_from_dict(raw or {})


# ---------------------------------------------------------------------------
# pipeline


def default_test_functions(d: int, T: float) -> list[TestFunction]:
    """Three separable test functions with mean-zero y-factor."""
    k1 = (1,) + (0,) * (d - 1)
    return [
        TestFunction(SlowFactor(T, (1,) * d), TrigPolynomial.cos(k1), TrigPolynomial.constant(), True),
        TestFunction(SlowFactor(T, (1,) * d), TrigPolynomial.cos(k1), TrigPolynomial.cos(1), True),
        TestFunction(SlowFactor(T, (2,) + (1,) * (d - 1)), TrigPolynomial.sin(k1),
                     TrigPolynomial.constant(), True),
    ]


def limit_basis(d: int, T: float) -> list[tuple[TestFunction, TestFunction | None]]:
    psi0 = TestFunction(SlowFactor(T, (1,) * d))
    psi0b = TestFunction(SlowFactor(T, (2,) * d, 2))
    return [(psi0, None), (psi0b, None)] + [(psi0, psi) for psi in default_test_functions(d, T)]


@dataclass
class CellStage:
    a: CoefficientField
    V: PotentialField
    chi: CorrectorSet
    eta: EtaField
    model: EffectiveModel


@dataclass
class ConvergenceRow:
    eps: float
    n: int
    steps: int
    err_zeroth: float
    err_first: float
    pairing: list[float]
    corrector: list[float]
    limit_residual: float
    mass_drift_fine: float
    mass_drift_homog: float
    l2H1: float
    observed_order: float | None = None
    seconds: float = 0.0


@dataclass
class ConvergenceReport:
    rows: list[ConvergenceRow]
    model: EffectiveModel | None
    config: dict = field(default_factory=dict)
    verdicts: dict = field(default_factory=dict)
    stage_seconds: dict = field(default_factory=dict)


def _stage(name: str, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, exc) from exc


def run_cell_stage(cfg: SweepConfig) -> CellStage:
    grid = cfg.grid
    a = CoefficientField.from_descriptor(cfg.coefficient, grid)
    V = PotentialField.from_descriptor(cfg.potential, grid)
    _stage("cell", validate_coefficient, a)
    _stage("cell", validate_potential, V, cfg.eps, cfg.T)
    chi = _stage("cell", solve_corrector, a, grid)
    eta = _stage("cell", solve_eta, a, V, grid)
    model = _stage("effective", effective_model, a, V, chi, eta, homogenized_form=cfg.homogenized_form)
    return CellStage(a, V, chi, eta, model)


def _relative_drift(masses: list[float]) -> float:
    m0 = masses[0]
    if m0 == 0:
        return 0.0
    return float(max(abs(m - m0) for m in masses) / m0)


def run_epsilon(cfg: SweepConfig, cell: CellStage, eps: float) -> ConvergenceRow:
    t0 = time.perf_counter()
    tag = f"[eps={eps:g}]"
    fp = cfg.fine_problem(eps)
    u_eps = _stage("fine" + tag, solve_fine, fp)
    u_0 = _stage("macro" + tag, solve_homogenized,
                 MacroProblem.matching(cell.model, fp, cfg.homogenized_form))

    def diagnostics():
        u1 = reconstruct_u1(u_0, cell.chi, cell.eta, cfg.homogenized_form)
        first = first_order_field(u_0, cell.chi, cell.eta, eps, cfg.homogenized_form)
        psis = default_test_functions(cfg.d, cfg.T)
        return ConvergenceRow(
            eps=eps, n=fp.n, steps=fp.steps,
            err_zeroth=space_time_l2_error(u_eps, u_0),
            err_first=space_time_l2_error(u_eps, first),
            pairing=[abs(two_scale_pairing(u_eps, p, eps) - limit_pairing(u_0, p)) for p in psis],
            corrector=[abs(corrector_pairing(u_eps, p, eps) - limit_pairing(u_0, p, u1)) for p in psis],
            limit_residual=limit_system_residual(u_0, u1, limit_basis(cfg.d, cfg.T), cell.a, cell.V,
                                                 cfg.source),
            mass_drift_fine=_relative_drift(mass_history(u_eps)),
            mass_drift_homog=_relative_drift(mass_history(u_0)),
            l2H1=energy_norms(u_eps)["l2H1"],
        )

    row = _stage("diagnostics" + tag, diagnostics)
    row.seconds = time.perf_counter() - t0
    return row


def resolve_workers(cfg: SweepConfig, override: int | None = None) -> int:
    if override is not None:
        return max(1, int(override))
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return cfg.workers


def run_pipeline(cfg: SweepConfig, workers: int | None = None) -> ConvergenceReport:
    t0 = time.perf_counter()
    cell = run_cell_stage(cfg)
    t_cell = time.perf_counter() - t0
    nworkers = resolve_workers(cfg, workers)
    if nworkers > 1 and len(cfg.eps) > 1:
        with ThreadPoolExecutor(max_workers=nworkers) as pool:
            rows = list(pool.map(lambda e: run_epsilon(cfg, cell, e), cfg.eps))
    else:
        rows = [run_epsilon(cfg, cell, e) for e in cfg.eps]
    rows.sort(key=lambda r: -r.eps)
    for prev, row in zip(rows, rows[1:]):
        if prev.err_zeroth > 0 and row.err_zeroth > 0:
            row.observed_order = math.log(prev.err_zeroth / row.err_zeroth) / math.log(prev.eps / row.eps)
    report = ConvergenceReport(rows, cell.model, cfg.to_dict(), compute_verdicts(rows),
                               {"cell": t_cell, "total": time.perf_counter() - t0})
    return report


def compute_verdicts(rows: list[ConvergenceRow]) -> dict:
    if len(rows) < 2:
        return {}
    return {
        "zeroth_strictly_decreasing": all(b.err_zeroth < a.err_zeroth for a, b in zip(rows, rows[1:])),
        "first_order_not_worse": all(r.err_first <= r.err_zeroth for r in rows),
        "pairing_halved": [rows[-1].pairing[i] <= 0.5 * rows[0].pairing[i] for i in range(len(rows[0].pairing))],
        "corrector_halved": [rows[-1].corrector[i] <= 0.5 * rows[0].corrector[i]
                             for i in range(len(rows[0].corrector))],
    }


# ---------------------------------------------------------------------------
# report output

N_PSI = 3
CSV_COLUMNS = (["eps", "n", "steps", "err_l2_zeroth", "err_l2_first"]
               + [f"pairing_res_{i + 1}" for i in range(N_PSI)]
               + [f"corrector_res_{i + 1}" for i in range(N_PSI)]
               + ["limit_system_res", "mass_drift_fine", "mass_drift_homog", "l2H1_fine", "observed_order"])


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.17g" % float(x)


def report_csv(report: ConvergenceReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in report.rows:
        writer.writerow([_fmt(v) for v in
                         [r.eps, r.n, r.steps, r.err_zeroth, r.err_first, *r.pairing, *r.corrector,
                          r.limit_residual, r.mass_drift_fine, r.mass_drift_homog, r.l2H1,
                          r.observed_order]])
    return buf.getvalue()


def parse_report_csv(text: str) -> list[dict[str, float | int | None]]:
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        row: dict[str, float | int | None] = {}
        for key, val in rec.items():
            if val == "":
                row[key] = None
            elif key in ("n", "steps"):
                row[key] = int(val)
            else:
                row[key] = float(val)
        rows.append(row)
    return rows


def report_text(report: ConvergenceReport) -> str:
    lines = ["homogenization convergence report", ""]
    if report.model is not None:
        m = report.model
        lines += [f"q  = {np.array2string(m.q, precision=10)}",
                  f"b  = {np.array2string(m.b, precision=10)}",
                  f"mu = {m.mu:.10g}",
                  f"limit drift = {np.array2string(m.limit_drift, precision=3)}",
                  f"homogenized form = {report.config.get('homogenized_form', 'consistent')}", ""]
    header = f"{'eps':>10} {'n':>6} {'steps':>6} {'|u_e-u0|':>12} {'|u_e-u0-e*u1|':>14} {'order':>7} {'mass drift':>11}"
    lines.append(header)
    for r in report.rows:
        order = "" if r.observed_order is None else f"{r.observed_order:.3f}"
        lines.append(f"{r.eps:>10.6g} {r.n:>6d} {r.steps:>6d} {r.err_zeroth:>12.5e} {r.err_first:>14.5e} "
                     f"{order:>7} {r.mass_drift_fine:>11.3e}")
    lines.append("")
    if report.verdicts:
        for key, val in report.verdicts.items():
            lines.append(f"{key}: {val}")
    else:
        lines.append("single eps: no monotonicity verdict")
    if report.stage_seconds:
        lines.append("")
        lines.append("wall clock (s): " + ", ".join(f"{k}={v:.2f}" for k, v in report.stage_seconds.items()))
    return "\n".join(lines) + "\n"


def emit_report(report: ConvergenceReport, out_dir: str | Path, formats=("csv", "text")) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if "csv" in formats:
        p = out_dir / "report.csv"
        with open(p, "w", newline="") as fh:
            fh.write(report_csv(report))
        written.append(p)
    if "text" in formats:
        p = out_dir / "report.txt"
        p.write_text(report_text(report))
        written.append(p)
    if report.model is not None:
        p = out_dir / "model.json"
        report.model.save(p)
        written.append(p)
    return written
