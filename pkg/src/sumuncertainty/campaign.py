"""Seeded verification campaigns and reproduction tables.

Every trial draws from its own ``RandomSource(seed, stream)``, with stream ids
assigned by trial index, so results do not depend on how trials are scheduled.
"""
from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, NamedTuple, Optional

import numpy as np

from . import collective as coll
from . import dynamics as dyn
from . import metrology as met
from .core import (
    INEQUALITY_SLACK,
    RandomSource,
    commutator_expectation,
    equality_tolerance,
    sample_haar_state,
    sample_hermitian,
    uncertainty,
)
from .sumrel import (
    WeightedObservableSet,
    convexity_midpoint_check,
    equality_witness,
    kinetic_potential_demo,
    multi_sum_gap,
    sum_uncertainty_gap,
    weighted_sum_gap,
)

SCHEMA_VERSION = 1
SUITES = ("sum", "collective", "metrology", "speed")
FORMATS = ("json", "csv")
# disjoint stream-id ranges per suite
STREAM_BASE = {name: i << 32 for i, name in enumerate(SUITES)}
DENSE_MET_QUBITS = 8
TABLE_RESIDUAL_TOL = 1e-9


class ConfigError(ValueError):
    """Invalid campaign configuration; raised before any computation."""


class ReportIOError(OSError):
    def __init__(self, path, cause: Exception):
        super().__init__(f"cannot write report to {path}: {cause}")
        self.path = path


@dataclass(frozen=True)
class CampaignConfig:
    suite: str = "all"
    trials: int = 1000
    dims: tuple = (2, 3, 4, 8, 16)
    seed: int = 0
    n_range: tuple = (1, 10)
    m_range: tuple = (1, 5)
    theta_points: int = 100
    output_path: Optional[str] = None
    format: str = "json"
    workers: int = 1
    timing: bool = False

    def validate(self) -> None:
        if self.suite not in SUITES + ("all",):
            raise ConfigError(f"unknown suite {self.suite!r}")
        if self.format not in FORMATS:
            raise ConfigError(f"unknown format {self.format!r}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not self.dims:
            raise ConfigError("dims must be nonempty")
        for d in self.dims:
            if not 1 <= d <= dyn.EVOLUTION_DIM_LIMIT:
                raise ConfigError(f"dimension {d} outside 1..{dyn.EVOLUTION_DIM_LIMIT}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        n_lo, n_hi = self.n_range
        m_lo, m_hi = self.m_range
        if not 1 <= n_lo <= n_hi <= met.MAX_QUBITS:
            raise ConfigError(f"n-range {n_lo}..{n_hi} outside 1..{met.MAX_QUBITS}")
        if not 1 <= m_lo <= m_hi:
            raise ConfigError(f"m-range {m_lo}..{m_hi} must be increasing and start at >= 1")
        if n_hi * m_hi > met.MAX_QUBITS:
            raise ConfigError(
                f"largest ensemble uses K = {m_hi}*{n_hi} = {m_hi * n_hi} qubits, "
                f"over the {met.MAX_QUBITS}-qubit guard"
            )
        if self.theta_points < 1:
            raise ConfigError("theta-points must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    @property
    def suites(self) -> tuple:
        return SUITES if self.suite == "all" else (self.suite,)

    def echo(self) -> dict:
        # execution details (workers, output path, timing) stay out so reports compare equal
        return {
            "suite": self.suite,
            "trials": self.trials,
            "dims": list(self.dims),
            "seed": self.seed,
            "n-range": list(self.n_range),
            "m-range": list(self.m_range),
            "theta-points": self.theta_points,
            "format": self.format,
        }


class Outcome(NamedTuple):
    check: str
    value: float
    ok: bool


class Task(NamedTuple):
    stream: int
    dim: int
    params: tuple = ()


@dataclass(frozen=True)
class Worst:
    value: float
    seed: int
    stream: int
    dim: int
    check: str = ""

    def as_dict(self) -> dict:
        return {"value": self.value, "seed": self.seed, "stream": self.stream, "dim": self.dim, "check": self.check}


@dataclass
class CheckResult:
    name: str
    trials: int = 0
    failures: int = 0
    worst: Optional[Worst] = None

    def add(self, outcome: Outcome, seed: int, task: Task) -> None:
        self.trials += 1
        self.failures += not outcome.ok
        candidate = Worst(float(outcome.value), seed, task.stream, task.dim, outcome.check)
        self.worst = _worse(self.worst, candidate)


def _worse(a: Optional[Worst], b: Optional[Worst]) -> Optional[Worst]:
    """Smaller value wins, ties go to the lower stream id."""
    if a is None:
        return b
    if b is None:
        return a
    return b if (b.value, b.stream) < (a.value, a.stream) else a


@dataclass
class SuiteResult:
    name: str
    trials: int = 0
    failures: int = 0
    checks: dict = field(default_factory=dict)

    @property
    def worst(self) -> Optional[Worst]:
        out = None
        for check in self.checks.values():
            out = _worse(out, check.worst)
        return out

    def as_dict(self) -> dict:
        worst = self.worst
        return {
            "name": self.name,
            "trials": self.trials,
            "failures": self.failures,
            "worst": worst.as_dict() if worst else None,
            "checks": [
                {
                    "name": c.name,
                    "trials": c.trials,
                    "failures": c.failures,
                    "worst": c.worst.as_dict() if c.worst else None,
                }
                for c in self.checks.values()
            ],
        }


@dataclass
class CampaignReport:
    config: CampaignConfig
    suites: list
    duration_ms: float = 0.0
    tables: list = field(default_factory=list)

    @property
    def failures(self) -> int:
        return sum(s.failures for s in self.suites)

    @property
    def ok(self) -> bool:
        return self.failures == 0

    def as_dict(self) -> dict:
        out = {
            "schema-version": SCHEMA_VERSION,
            "config-echo": self.config.echo(),
            "suites": [s.as_dict() for s in self.suites],
        }
        if self.tables:
            out["tables"] = [t.as_dict() for t in self.tables]
        out["duration-ms"] = round(self.duration_ms, 3) if self.config.timing else None
        return out

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, allow_nan=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["suite", "check", "trials", "failures", "worst_value", "worst_seed", "worst_stream", "worst_dim"])
        for suite in self.suites:
            for check in suite.checks.values():
                w = check.worst
                writer.writerow(
                    [suite.name, check.name, check.trials, check.failures]
                    + ([fmt(w.value), w.seed, w.stream, w.dim] if w else ["", "", "", ""])
                )
        return buf.getvalue()


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


# ---------------------------------------------------------------- sum suite


def _sum_tasks(config: CampaignConfig) -> Iterable[Task]:
    index = 0
    for dim in config.dims:
        for _ in range(config.trials):
            yield Task(STREAM_BASE["sum"] + index, dim)
            index += 1


def _ineq(name: str, value: float) -> Outcome:
    return Outcome(name, value, value >= -INEQUALITY_SLACK)


def _sum_trial(seed: int, task: Task) -> list[Outcome]:
    rng = RandomSource(seed, task.stream)
    d = task.dim
    A, B = sample_hermitian(d, rng), sample_hermitian(d, rng)
    psi = sample_haar_state(d, rng)
    da, db = uncertainty(A, psi), uncertainty(B, psi)
    pair = sum_uncertainty_gap(A, B, psi)
    out = [
        _ineq("pair", pair.gap),
        _ineq("reverse-triangle", pair.lhs - abs(da - db)),
        _ineq("difference", da + db - uncertainty(A - B, psi)),
        _ineq("robertson", da * db - commutator_expectation(A, B, psi)),
    ]

    k = rng.integers(2, 6)
    observables = [A, B] + [sample_hermitian(d, rng) for _ in range(k - 2)]
    out.append(_ineq("multi", multi_sum_gap(observables, psi).gap))
    weights = rng.uniform(0.05, 3.0, size=k)
    out.append(_ineq("weighted", weighted_sum_gap(WeightedObservableSet(tuple(weights), tuple(observables)), psi).gap))
    p = rng.generator.dirichlet(np.ones(k))
    q = rng.generator.dirichlet(np.ones(k))
    out.append(_ineq("convexity", convexity_midpoint_check(observables, p / p.sum(), q / q.sum(), psi).margin))

    c, shift = rng.uniform(0.1, 10.0), rng.uniform(-10.0, 10.0)
    witness = equality_witness(A, psi, c, shift)
    out.append(Outcome("equality", -abs(witness.gap), abs(witness.gap) <= equality_tolerance(witness.lhs, witness.rhs)))

    potential = rng.generator.standard_normal(d)
    energy = kinetic_potential_demo(d, 1.0 / (d + 1), potential, sample_haar_state(d, rng))
    out.append(_ineq("kinetic-potential", energy.gap))
    return out


# --------------------------------------------------------- collective suite


def _collective_tasks(config: CampaignConfig) -> Iterable[Task]:
    index = 0
    for dim in config.dims:
        for _ in range(config.trials):
            yield Task(STREAM_BASE["collective"] + index, dim)
            index += 1


def max_dense_sites(d: int, limit: int = coll.DENSE_LIMIT, cap: int = 12) -> int:
    if d == 1:
        return cap
    n = 0
    while d ** (n + 1) <= limit:
        n += 1
    return n


def _collective_trial(seed: int, task: Task) -> list[Outcome]:
    rng = RandomSource(seed, task.stream)
    d = task.dim
    A = sample_hermitian(d, rng)
    local = sample_haar_state(d, rng)
    da = uncertainty(A, local)
    out = []

    n_big = rng.integers(1, 10**6)
    obs = coll.SiteSumObservable(A, n_big)
    state = coll.ProductState(local, n_big)
    collective = coll.site_sum_uncertainty(obs, state)
    individual = coll.individual_sum_uncertainty(obs, state)
    root = math.sqrt(n_big)
    if da > 0:
        dev = abs(collective / da / root - 1.0)
        out.append(Outcome("sqrt-n-scaling", -dev, dev <= 1e-10))
        dev = abs(individual / collective / root - 1.0)
        out.append(Outcome("individual-vs-collective", -dev, dev <= 1e-10))
    out.append(_ineq("sum-relation", individual - collective))

    n = rng.integers(1, max_dense_sites(d))
    obs = coll.SiteSumObservable(A, n)
    state = coll.ProductState(local, n)
    cc = coll.dense_crosscheck(obs, state)
    out.append(Outcome("dense", -cc.residual, cc.agrees))
    dev = abs(cc.second_moment - cc.second_moment_expected)
    out.append(Outcome("second-moment", -dev, dev <= 1e-9 * max(1.0, abs(cc.second_moment_expected))))
    return out


# ---------------------------------------------------------- metrology suite


def _metrology_tasks(config: CampaignConfig) -> Iterable[Task]:
    index = 0
    n_lo, n_hi = config.n_range
    for n in range(n_lo, n_hi + 1):
        for j in range(config.theta_points):
            yield Task(STREAM_BASE["metrology"] + index, 2**n, (n, j, config.theta_points, tuple(config.m_range)))
            index += 1


def _close(name: str, got: float, want: float, tol: float) -> Outcome:
    dev = abs(got - want)
    return Outcome(name, -dev, dev <= tol)


def _rel(name: str, got: float, want: float, tol: float) -> Outcome:
    dev = abs(got - want) / abs(want)
    return Outcome(name, -dev, dev <= tol)


def _dense_agreement(name: str, closed: met.MeasurementStats, dense: met.MeasurementStats) -> list[Outcome]:
    return [
        _close(f"{name}-mean", dense.mean, closed.mean, 1e-10),
        _close(f"{name}-spread", dense.spread, closed.spread, 1e-10),
        _close(f"{name}-derivative", dense.derivative, closed.derivative, max(1e-10, 1e-10 * abs(closed.derivative))),
    ]


def _metrology_trial(seed: int, task: Task) -> list[Outcome]:
    n, j, points, (m_lo, m_hi) = task.params
    rng = RandomSource(seed, task.stream)
    period = math.ldexp(math.pi, 1 - n)
    theta = (j + rng.uniform(0.05, 0.95)) * period / points
    if met.singular_distance(n, theta) <= math.ldexp(1e-6, 1 - n):
        return []
    probe = met.build_probe_state(n, theta)
    target = math.ldexp(1.0, -n)
    out = []

    stats = {
        "product": met.product_projector_stats(probe),
        "sum": met.sum_projector_stats(probe),
        "individual": met.individual_projector_stats(probe),
    }
    for kind, s in stats.items():
        out.append(_rel(f"precision-{kind}", met.precision(s).delta_theta, target, 1e-9))
        out.append(_rel(f"precision-fd-{kind}", s.spread / abs(s.derivative_numeric), target, 1e-6))
        out.append(
            Outcome(f"derivative-fd-{kind}", -abs(s.derivative - s.derivative_numeric), s.derivative_agrees)
        )
        mt = met.mt_bound_check(probe, s)
        out.append(Outcome(f"mt-{kind}", mt.mt_slack, mt.mt_slack >= -1e-9))
        out.append(Outcome(f"mt-saturation-{kind}", -abs(mt.mt_slack), abs(mt.mt_slack) <= 1e-9 * max(1.0, mt.generator_spread * s.spread)))
        if n <= DENSE_MET_QUBITS:
            out.extend(_dense_agreement(f"dense-{kind}", s, met.dense_projector_stats(probe, kind)))
    if n <= DENSE_MET_QUBITS:
        per_site = met.dense_site_spreads(probe)
        dev = float(np.max(np.abs(per_site - 0.5 * abs(math.sin(math.ldexp(theta, n))))))
        out.append(Outcome("dense-site-spreads", -dev, dev <= 1e-10))

    joint, separate = stats["sum"].spread, stats["individual"].spread
    out.append(_ineq("sum-relation", separate - joint))
    out.append(Outcome("sum-saturation", -abs(separate - joint), abs(separate - joint) <= equality_tolerance(joint, separate)))

    for m in range(m_lo, m_hi + 1):
        ensemble = met.ProbeEnsemble(m, probe)
        s = met.ensemble_sum_stats(ensemble)
        closed = 1.0 / (math.sqrt(m) * math.ldexp(1.0, n))
        out.append(_rel("ensemble-precision", met.precision(s).delta_theta, closed, 1e-9))
        cmp = met.resource_normalized_precision(m, n)
        out.append(Outcome("resource-identity", -cmp.identity_residual, cmp.identity_residual <= 1e-12))
        out.append(Outcome("lower-than-exponential", math.log2(cmp.ensemble / cmp.single_block), cmp.lower_than_exponential))
        mt = met.mt_bound_check(probe, s, copies=m)
        out.append(Outcome("mt-ensemble", mt.mt_slack, mt.mt_slack >= -1e-9))
        # one dense ensemble point per (N, M) cell keeps the suite fast
        if m * n <= met.DENSE_QUBIT_LIMIT and j == 0:
            out.extend(_dense_agreement("dense-ensemble", s, met.dense_ensemble_stats(ensemble)))
    return out


# -------------------------------------------------------------- speed suite


def _speed_tasks(config: CampaignConfig) -> Iterable[Task]:
    index = 0
    for dim in config.dims:
        for _ in range(config.trials):
            yield Task(STREAM_BASE["speed"] + index, dim)
            index += 1


def _speed_trial(seed: int, task: Task) -> list[Outcome]:
    rng = RandomSource(seed, task.stream)
    d = task.dim
    H1, H2, x = (sample_hermitian(d, rng) for _ in range(3))
    psi = sample_haar_state(d, rng)
    out = []
    for sign, label in ((1, "plus"), (-1, "minus")):
        out.append(_ineq(f"subadditivity-{label}", dyn.speed_subadditivity(H1, H2, psi, sign).slack))
    vb = dyn.velocity_bound_check(x, H1, H2, psi)
    out.append(_ineq("velocity-bound", vb.margin))
    out.append(_ineq("velocity-robertson", vb.robertson_margin))
    out.append(_ineq("velocity-sum-relation", vb.sum_relation_margin))

    other = sample_haar_state(d, rng)
    base = dyn.fubini_study_distance(psi, other).value
    phased = dyn.fubini_study_distance(psi.with_phase(rng.uniform(0, 2 * math.pi)), other.with_phase(rng.uniform(0, 2 * math.pi))).value
    out.append(_close("fs-phase-invariance", phased, base, 1e-15))

    if dyn.quantum_speed(H1, psi) > 1e-6:
        ratios = [dyn.convergence_ratio(H1, psi, dt) for dt in (1e-2, 5e-3)]
        dev = max(abs(r - 4.0) for r in ratios)
        out.append(Outcome("speed-convergence-order", -dev, dev <= 0.5))
    return out


SUITE_RUNNERS: dict[str, tuple[Callable, Callable]] = {
    "sum": (_sum_tasks, _sum_trial),
    "collective": (_collective_tasks, _collective_trial),
    "metrology": (_metrology_tasks, _metrology_trial),
    "speed": (_speed_tasks, _speed_trial),
}


def _run_suite(name: str, config: CampaignConfig) -> SuiteResult:
    make_tasks, trial = SUITE_RUNNERS[name]
    tasks = list(make_tasks(config))
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(lambda t: trial(config.seed, t), tasks))
    else:
        results = [trial(config.seed, t) for t in tasks]

    suite = SuiteResult(name)
    for task, outcomes in zip(tasks, results):
        if not outcomes:
            continue
        suite.trials += 1
        suite.failures += not all(o.ok for o in outcomes)
        for o in outcomes:
            suite.checks.setdefault(o.check, CheckResult(o.check)).add(o, config.seed, task)
    return suite


def run_campaign(config: CampaignConfig) -> CampaignReport:
    """Run the configured suites; write the report when an output path is set."""
    config.validate()
    start = time.perf_counter()
    suites = [_run_suite(name, config) for name in config.suites]
    report = CampaignReport(config, suites, duration_ms=1e3 * (time.perf_counter() - start))
    if config.output_path:
        write_report(report)
    return report


def write_report(report: CampaignReport) -> None:
    path = Path(report.config.output_path)
    text = report.to_json() if report.config.format == "json" else report.to_csv()
    try:
        if path.parent != Path("."):
            path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise ReportIOError(path, exc) from exc


# ------------------------------------------------------------------- tables


@dataclass
class Table:
    name: str
    columns: list
    rows: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {"name": self.name, "columns": self.columns, "rows": self.rows}

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([fmt(v) for v in row])
        return buf.getvalue()


def _collective_table(config: CampaignConfig) -> Table:
    d = config.dims[0]
    rng = RandomSource(config.seed, STREAM_BASE["collective"] + (1 << 31))
    A = sample_hermitian(d, rng)
    local = sample_haar_state(d, rng)
    table = Table("collective_scaling", ["N", "closed_form", "structured", "dense", "residual"])
    for n in range(config.n_range[0], config.n_range[1] + 1):
        obs, state = coll.SiteSumObservable(A, n), coll.ProductState(local, n)
        closed = math.sqrt(n)
        individual = coll.individual_sum_uncertainty(obs, state)
        structured = individual / coll.site_sum_uncertainty(obs, state)
        residual = abs(structured - closed) / closed
        dense = None
        if d**n <= coll.DENSE_LIMIT:
            dense = individual / coll.dense_crosscheck(obs, state).dense
            residual = max(residual, abs(dense - closed) / closed)
        table.rows.append([n, closed, structured, dense, residual])
    return table


def _precision_table(config: CampaignConfig) -> Table:
    table = Table(
        "precision_vs_n",
        ["N", "theta", "closed_form", "product", "sum", "individual", "finite_difference", "dense", "residual", "fd_residual"],
    )
    for n in range(config.n_range[0], config.n_range[1] + 1):
        theta = math.ldexp(math.pi / 3.0, -n)
        probe = met.build_probe_state(n, theta)
        closed = math.ldexp(1.0, -n)
        values = [
            met.precision(f(probe)).delta_theta
            for f in (met.product_projector_stats, met.sum_projector_stats, met.individual_projector_stats)
        ]
        s = met.sum_projector_stats(probe)
        fd = s.spread / abs(s.derivative_numeric)
        dense = None
        if n <= met.DENSE_QUBIT_LIMIT:
            dense = met.precision(met.dense_projector_stats(probe, "sum")).delta_theta
            values.append(dense)
        residual = max(abs(v - closed) / closed for v in values)
        table.rows.append([n, theta, closed, *values[:3], fd, dense, residual, abs(fd - closed) / closed])
    return table


def _ensemble_table(config: CampaignConfig) -> Table:
    table = Table(
        "ensemble_precision",
        ["M", "N", "K", "closed_form", "ensemble", "single_block", "identity", "identity_residual", "dense", "residual"],
    )
    for m in range(config.m_range[0], config.m_range[1] + 1):
        for n in range(config.n_range[0], config.n_range[1] + 1):
            probe = met.build_probe_state(n, math.ldexp(math.pi / 3.0, -n))
            ensemble = met.ProbeEnsemble(m, probe)
            cmp = met.resource_normalized_precision(m, n)
            value = met.precision(met.ensemble_sum_stats(ensemble)).delta_theta
            residual = abs(value - cmp.ensemble) / cmp.ensemble
            dense = None
            if m * n <= met.DENSE_QUBIT_LIMIT:
                dense = met.precision(met.dense_ensemble_stats(ensemble)).delta_theta
                residual = max(residual, abs(dense - cmp.ensemble) / cmp.ensemble)
            table.rows.append(
                [m, n, cmp.total_qubits, cmp.ensemble, value, cmp.single_block, cmp.identity_value, cmp.identity_residual, dense, residual]
            )
    return table


def build_tables(config: CampaignConfig) -> list[Table]:
    return [_collective_table(config), _precision_table(config), _ensemble_table(config)]


def _table_suite(tables: list[Table], seed: int) -> SuiteResult:
    suite = SuiteResult("tables")
    for table in tables:
        res_cols = [i for i, c in enumerate(table.columns) if c in ("residual", "identity_residual", "fd_residual")]
        for index, row in enumerate(table.rows):
            suite.trials += 1
            row_ok = True
            for i in res_cols:
                name = table.columns[i]
                tol = 1e-6 if name == "fd_residual" else (1e-12 if name == "identity_residual" else TABLE_RESIDUAL_TOL)
                outcome = Outcome(f"{table.name}.{name}", -row[i], row[i] <= tol)
                row_ok &= outcome.ok
                suite.checks.setdefault(outcome.check, CheckResult(outcome.check)).add(
                    outcome, seed, Task(index, int(row[0]))
                )
            suite.failures += not row_ok
    return suite


def emit_reproduction_tables(config: CampaignConfig) -> CampaignReport:
    """Closed-form vs oracle tables for sqrt(N) scaling, delta theta(N) and delta theta(M, N).

    With CSV output ``output_path`` names a directory receiving one file per table.
    """
    config.validate()
    start = time.perf_counter()
    tables = build_tables(config)
    report = CampaignReport(
        config, [_table_suite(tables, config.seed)], duration_ms=1e3 * (time.perf_counter() - start), tables=tables
    )
    if config.output_path:
        write_tables(report)
    return report


def tables_csv(report: CampaignReport) -> str:
    return "\n".join(f"# {t.name}\n{t.to_csv()}" for t in report.tables)


def write_tables(report: CampaignReport) -> None:
    path = Path(report.config.output_path)
    try:
        if report.config.format == "json":
            if path.parent != Path("."):
                path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(report.to_json())
        else:
            path.mkdir(parents=True, exist_ok=True)
            for table in report.tables:
                (path / f"{table.name}.csv").write_text(table.to_csv())
    except OSError as exc:
        raise ReportIOError(path, exc) from exc
