"""Sweeps over (N, R, order, variant), minimal step-count search and scaling fits.

Every grid cell is an independent job: build the schedule, synthesize the
angles, measure the Trotter error, run the circuit and the refined
reference evolution. Records are sorted before they are written, so the
CSV does not depend on worker count or completion order.
"""
import csv
import logging
import math
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .baseline import InitStrategy, OptimizerConfig, objective, optimize
from .config import normalize_keys
from .errors import DomainError, UnreachableTargetError
from .schedule import (
    ScheduleSpec,
    SearchInstance,
    Variant,
    schedule_discrete,
    synth_qaoa_params,
)
from .simulator import Backend, run_qaoa, run_reference_adiabatic
from .trotter import TrotterOrder, evolution_error, required_R

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["n", "N", "R", "order", "variant", "eps1", "trotter_err",
               "adiabatic_fidelity", "success_prob", "wall_ms"]

# Step-count search starts here and gives up beyond R_CAP.
R_START = 4
R_CAP = 2 ** 22


@dataclass(frozen=True)
class SweepConfig:
    """Grid definition and output location of a sweep."""
    n_range: Tuple[int, int] = (2, 10)
    target_err: float = 1e-3
    orders: Tuple[int, ...] = (2,)
    variant: Variant = Variant.EXACT_INVERSION
    eps1: float = 0.1
    refine: int = 64
    seed: int = 42
    out_path: Optional[str] = None
    steps: Tuple[int, ...] = ()
    workers: int = 1

    def __post_init__(self):
        lo, hi = self.n_range
        if lo < 1 or hi < lo:
            raise DomainError(f"qubit range {self.n_range} is empty or invalid")
        if self.target_err <= 0.0:
            raise DomainError(f"target_err must be positive, got {self.target_err}")
        for order in self.orders:
            TrotterOrder.from_int(order)
        if any(R < 1 for R in self.steps):
            raise DomainError(f"step counts must be >= 1, got {self.steps}")
        if self.refine < 1:
            raise DomainError(f"refine must be >= 1, got {self.refine}")
        if self.workers < 1:
            raise DomainError(f"workers must be >= 1, got {self.workers}")

    @classmethod
    def from_dict(cls, data: Dict) -> "SweepConfig":
        """Build from a config mapping whose keys mirror the CLI flags."""
        data = normalize_keys(data)
        kwargs = {}
        if "n_min" in data or "n_max" in data:
            kwargs["n_range"] = (int(data.get("n_min", 2)), int(data.get("n_max", 10)))
        if "n_range" in data:
            kwargs["n_range"] = tuple(int(v) for v in data["n_range"])
        for key, name in (("order", "orders"), ("orders", "orders"), ("steps", "steps")):
            if key in data:
                values = data[key] if isinstance(data[key], (list, tuple)) else [data[key]]
                kwargs[name] = tuple(int(v) for v in values)
        if "variant" in data:
            kwargs["variant"] = Variant.from_cli(str(data["variant"]))
        for name in ("target_err", "eps1"):
            if name in data:
                kwargs[name] = float(data[name])
        for name in ("refine", "seed", "workers"):
            if name in data:
                kwargs[name] = int(data[name])
        out = data.get("out", data.get("out_path"))
        if out is not None:
            kwargs["out_path"] = str(out)
        return cls(**kwargs)


@dataclass(frozen=True)
class SweepRecord:
    """One measured grid cell; field order is the CSV column order."""
    n: int
    N: int
    R: int
    order: int
    variant: str
    eps1: float
    trotter_err: float
    adiabatic_fidelity: float
    success_prob: float
    wall_ms: float

    def __post_init__(self):
        for name in ("trotter_err", "adiabatic_fidelity", "success_prob"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} is not finite in cell n={self.n}, R={self.R}")

    @property
    def sort_key(self):
        return (self.n, self.order, self.R)

    def to_row(self) -> List[str]:
        row = []
        for f in fields(self):
            value = getattr(self, f.name)
            row.append(format(value, ".17g") if isinstance(value, float) else str(value))
        return row

    @classmethod
    def from_row(cls, row: Dict[str, str]) -> "SweepRecord":
        return cls(
            n=int(row["n"]), N=int(row["N"]), R=int(row["R"]), order=int(row["order"]),
            variant=row["variant"], eps1=float(row["eps1"]),
            trotter_err=float(row["trotter_err"]),
            adiabatic_fidelity=float(row["adiabatic_fidelity"]),
            success_prob=float(row["success_prob"]), wall_ms=float(row["wall_ms"]),
        )


@dataclass(frozen=True)
class FitResult:
    """Least-squares line through (log x, log y)."""
    exponent: float
    intercept: float
    r_squared: float

    def to_dict(self) -> Dict:
        return asdict(self)


@dataclass(frozen=True)
class ComparisonResult:
    """Closed-form angles against the optimizer at equal depth."""
    p: int
    closed_form_objective: float
    optimized_objective: float
    evaluations: int
    status: str

    def to_dict(self) -> Dict:
        return asdict(self)


def _trotter_err(instance: SearchInstance, R: int, order, variant: Variant, eps1: float) -> float:
    schedule = schedule_discrete(ScheduleSpec(variant=variant, R=R, eps1=eps1), instance.N)
    return evolution_error(schedule, order).trotter_err


def minimal_R(instance: SearchInstance, order=TrotterOrder.SECOND, target_err: float = 1e-3,
              variant: Variant = Variant.EXACT_INVERSION, eps1: float = 0.1,
              cap: int = R_CAP) -> int:
    """Smallest R with trotter_err <= target_err: doubling from 4, then bisection."""
    if target_err <= 0.0:
        raise DomainError(f"target_err must be positive, got {target_err}")
    R = R_START
    while _trotter_err(instance, R, order, variant, eps1) > target_err:
        if R >= cap:
            raise UnreachableTargetError(target_err, cap)
        R *= 2
    if R == R_START:
        return R

    # Invariant: lo fails the target, hi meets it.
    lo, hi = R // 2, R
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _trotter_err(instance, mid, order, variant, eps1) <= target_err:
            hi = mid
        else:
            lo = mid
    logger.debug(f"minimal_R n={instance.n_qubits} order={int(order)}: {hi}")
    return hi


def fit_power_law(points: Sequence[Tuple[float, float]]) -> FitResult:
    """Fit y = C * x^k by least squares on (log x, log y)."""
    if len(points) < 3:
        raise DomainError(f"power-law fit needs at least 3 points, got {len(points)}")
    xs = np.array([p[0] for p in points], dtype=float)
    ys = np.array([p[1] for p in points], dtype=float)
    if np.any(xs <= 0.0) or np.any(ys <= 0.0):
        raise DomainError("power-law fit needs strictly positive points")

    log_x, log_y = np.log(xs), np.log(ys)
    slope, intercept = np.polyfit(log_x, log_y, 1)
    residual = log_y - (slope * log_x + intercept)
    ss_tot = float(np.sum((log_y - log_y.mean()) ** 2))
    ss_res = float(np.sum(residual ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return FitResult(exponent=float(slope), intercept=float(intercept),
                     r_squared=min(max(r_squared, 0.0), 1.0))


def error_scaling(instance: SearchInstance, order, steps: Iterable[int],
                  variant: Variant = Variant.EXACT_INVERSION,
                  eps1: float = 0.1) -> Tuple[List[Tuple[int, float]], FitResult]:
    """Trotter error over a list of R at fixed N and T, with its log-log slope."""
    points = [(R, _trotter_err(instance, R, order, variant, eps1)) for R in steps]
    return points, fit_power_law(points)


def calibrate_constant(records: Sequence[SweepRecord], budget: float) -> float:
    """Median ratio of measured R to the unit-constant step-count estimate.

    `budget` is the Trotter error the records were searched for.
    """
    if not records:
        raise DomainError("no records to calibrate against")
    ratios = [
        rec.R / required_R(rec.N, rec.eps1 + budget, rec.eps1, rec.order, constant=1.0)
        for rec in records
    ]
    return float(np.median(ratios))


def _cell_marked(seed: int, n: int) -> int:
    return int(np.random.default_rng([seed, n]).integers(2 ** n))


def _evaluate_cell(job: Tuple[SweepConfig, int, int, Optional[int]]) -> SweepRecord:
    config, n, order, R = job
    started = time.perf_counter()
    instance = SearchInstance(n_qubits=n, marked=_cell_marked(config.seed, n))
    if R is None:
        R = minimal_R(instance, order, config.target_err, config.variant, config.eps1)

    schedule = schedule_discrete(ScheduleSpec(config.variant, R, config.eps1), instance.N)
    params = synth_qaoa_params(schedule)
    report = evolution_error(schedule, order)
    run = run_qaoa(instance, params, Backend.SUBSPACE)
    reference = run_reference_adiabatic(instance, schedule, config.refine)
    wall_ms = (time.perf_counter() - started) * 1e3

    logger.debug(f"Cell n={n} order={order} R={R}: err={report.trotter_err:.3g}, "
                 f"success={run.success_prob:.6f}")
    return SweepRecord(
        n=n, N=instance.N, R=R, order=int(order), variant=config.variant.value,
        eps1=config.eps1, trotter_err=report.trotter_err,
        adiabatic_fidelity=reference.success_prob, success_prob=run.success_prob,
        wall_ms=wall_ms,
    )


def _jobs(config: SweepConfig) -> List[Tuple[SweepConfig, int, int, Optional[int]]]:
    lo, hi = config.n_range
    step_counts = config.steps or (None,)
    return [(config, n, order, R)
            for n in range(lo, hi + 1)
            for order in config.orders
            for R in step_counts]


def _check_writable(path: Path):
    parent = path.parent if str(path.parent) else Path(".")
    if not parent.is_dir():
        raise OSError(f"output directory does not exist: {parent}")
    if not os.access(parent, os.W_OK):
        raise OSError(f"output directory is not writable: {parent}")
    if path.exists() and not os.access(path, os.W_OK):
        raise OSError(f"output file is not writable: {path}")


def write_sweep_csv(path, records: Sequence[SweepRecord]):
    """Atomically write records (sorted by n, order, R) with the fixed header."""
    path = Path(path)
    ordered = sorted(records, key=lambda rec: rec.sort_key)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp",
                                    dir=str(path.parent) if str(path.parent) else ".")
    try:
        with os.fdopen(fd, "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(CSV_COLUMNS)
            for rec in ordered:
                writer.writerow(rec.to_row())
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    logger.info(f"Wrote {len(ordered)} records to {path}")


def read_sweep_csv(path) -> List[SweepRecord]:
    """Parse a sweep CSV written by write_sweep_csv."""
    with open(Path(path), newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != CSV_COLUMNS:
            raise DomainError(f"unexpected sweep CSV header: {reader.fieldnames}")
        return [SweepRecord.from_row(row) for row in reader]


def run_sweep(config: SweepConfig) -> List[SweepRecord]:
    """Evaluate every cell of the grid and (optionally) persist the CSV."""
    out_path = Path(config.out_path) if config.out_path else None
    if out_path is not None:
        _check_writable(out_path)

    jobs = _jobs(config) if config.orders else []
    logger.info(f"Sweeping {len(jobs)} cells with {config.workers} worker(s)")
    if config.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            records = list(pool.map(_evaluate_cell, jobs))
    else:
        records = [_evaluate_cell(job) for job in jobs]

    records.sort(key=lambda rec: rec.sort_key)
    if out_path is not None:
        write_sweep_csv(out_path, records)
    return records


def fit_records(records: Sequence[SweepRecord]) -> Dict[int, FitResult]:
    """Fit R against N separately for each order present."""
    by_order: Dict[int, List[Tuple[float, float]]] = {}
    for rec in records:
        by_order.setdefault(rec.order, []).append((rec.N, rec.R))
    return {order: fit_power_law(points) for order, points in sorted(by_order.items())}


def compare(instance: SearchInstance, p: int, eps1: float = 0.1, seed: int = 42,
            max_evals: int = 500) -> ComparisonResult:
    """Closed-form angles vs Nelder-Mead started from them, at depth p."""
    schedule = schedule_discrete(ScheduleSpec(Variant.EXACT_INVERSION, p, eps1), instance.N)
    closed = objective(instance, synth_qaoa_params(schedule))
    config = OptimizerConfig(p=p, max_evals=max_evals, seed=seed,
                             init=InitStrategy.CLOSED_FORM, eps1=eps1)
    best, trace = optimize(instance, config)
    return ComparisonResult(
        p=p,
        closed_form_objective=closed,
        optimized_objective=objective(instance, best),
        evaluations=len(trace),
        status=trace.status,
    )
