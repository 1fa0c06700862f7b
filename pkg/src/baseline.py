"""Classical-optimizer QAOA loop used as a baseline for the closed-form angles.

A derivative-free downhill-simplex search over the 2p angles maximizes the
success probability, with a few seeded restarts. Every objective evaluation
is recorded so runs can be compared and replayed.
"""
import csv
import io
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Tuple

import numpy as np
from scipy.optimize import minimize

from .errors import DomainError
from .hamiltonian import initial_amplitudes
from .schedule import (
    QaoaParams,
    ScheduleSpec,
    SearchInstance,
    Variant,
    schedule_discrete,
    synth_qaoa_params,
)
from .simulator import Backend, run_qaoa

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


class InitStrategy(Enum):
    """Where the first simplex is centred."""
    RANDOM = "random"
    CLOSED_FORM = "closed_form"


@dataclass(frozen=True)
class OptimizerConfig:
    """Depth, budget and stopping rule of one optimization run."""
    p: int = 1
    max_evals: int = 500
    tol: float = 1e-6
    seed: int = 42
    init: InitStrategy = InitStrategy.RANDOM
    restarts: int = 3
    eps1: float = 0.1

    def __post_init__(self):
        if self.p < 1:
            raise DomainError(f"circuit depth p must be >= 1, got {self.p}")
        if self.max_evals < 1:
            raise DomainError(f"max_evals must be >= 1, got {self.max_evals}")
        if self.tol <= 0.0:
            raise DomainError(f"tol must be positive, got {self.tol}")
        if self.restarts < 1:
            raise DomainError(f"restarts must be >= 1, got {self.restarts}")


@dataclass(frozen=True)
class TraceEntry:
    evaluation: int
    best_objective: float
    params: Tuple[float, ...]


@dataclass
class OptimizerTrace:
    """Best-so-far objective after every evaluation."""
    entries: List[TraceEntry] = field(default_factory=list)
    status: str = "converged"

    def record(self, params: np.ndarray, value: float):
        best = max(value, self.best_objective) if self.entries else value
        self.entries.append(TraceEntry(len(self.entries) + 1, best, tuple(float(x) for x in params)))

    @property
    def best_objective(self) -> float:
        return self.entries[-1].best_objective if self.entries else float("-inf")

    def __len__(self):
        return len(self.entries)

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["eval", "best_objective"])
        for entry in self.entries:
            writer.writerow([entry.evaluation, format(entry.best_objective, ".17g")])
        return buffer.getvalue()


class _BudgetExhausted(Exception):
    pass


def objective(instance: SearchInstance, params: QaoaParams) -> float:
    """Success probability of the QAOA circuit (subspace backend)."""
    return run_qaoa(instance, params, Backend.SUBSPACE).success_prob


def closed_form_start(instance: SearchInstance, p: int, eps1: float = 0.1) -> QaoaParams:
    """Synthesized angles at depth p from the exact local schedule."""
    spec = ScheduleSpec(variant=Variant.EXACT_INVERSION, R=p, eps1=eps1)
    return synth_qaoa_params(schedule_discrete(spec, instance.N))


def _initial_simplex(x0: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    dim = x0.shape[0]
    steps = rng.uniform(0.2, 0.8, size=dim)
    simplex = np.tile(x0, (dim + 1, 1))
    simplex[1:] += np.diag(steps)
    return simplex


def optimize(instance: SearchInstance, config: OptimizerConfig) -> Tuple[QaoaParams, OptimizerTrace]:
    """Maximize the success probability with seeded Nelder-Mead restarts.

    The first restart starts from the closed-form angles when
    config.init is CLOSED_FORM; all other starts are drawn uniformly from
    [0, 2pi)^(2p). Returns the best angles (reduced mod 2pi) and the full
    trace; the trace status is "budget" when max_evals ran out first.
    """
    rng = np.random.default_rng(config.seed)
    trace = OptimizerTrace()
    best_x = None
    best_value = -math.inf

    def negated(x):
        nonlocal best_x, best_value
        if len(trace) >= config.max_evals:
            raise _BudgetExhausted()
        value = objective(instance, QaoaParams.from_vector(x))
        trace.record(x, value)
        if value > best_value:
            best_value, best_x = value, np.array(x, dtype=float)
        return -value

    for restart in range(config.restarts):
        if restart == 0 and config.init is InitStrategy.CLOSED_FORM:
            x0 = closed_form_start(instance, config.p, config.eps1).as_vector()
        else:
            x0 = rng.uniform(0.0, TWO_PI, size=2 * config.p)
        simplex = _initial_simplex(x0, rng)
        remaining = config.max_evals - len(trace)
        logger.info(f"Restart {restart + 1}/{config.restarts} with {remaining} evaluations left")
        try:
            minimize(
                negated,
                x0,
                method="Nelder-Mead",
                options={
                    "initial_simplex": simplex,
                    "maxfev": remaining,
                    "xatol": config.tol,
                    "fatol": config.tol,
                },
            )
        except _BudgetExhausted:
            pass
        if len(trace) >= config.max_evals:
            trace.status = "budget"
            logger.warning(f"Optimizer budget of {config.max_evals} evaluations exhausted")
            break

    best = QaoaParams.from_vector(best_x).wrapped()
    logger.info(f"Best objective {best_value:.6g} after {len(trace)} evaluations ({trace.status})")
    return best, trace


def grid_search(instance: SearchInstance, resolution: float = 0.01) -> Tuple[QaoaParams, float]:
    """Brute-force the p = 1 landscape over [0, 2pi)^2."""
    if resolution <= 0.0:
        raise DomainError(f"resolution must be positive, got {resolution}")
    angles = np.arange(0.0, TWO_PI, resolution)
    psi0_w, psi0_r = initial_amplitudes(instance.N)
    # One layer in closed form, vectorized over the whole (gamma, beta) grid.
    gamma, beta = np.meshgrid(angles, angles, indexing="ij")
    a_w = psi0_w + 0j
    a_r = psi0_r * np.exp(-1j * gamma)
    overlap = psi0_w * a_w + psi0_r * a_r
    final_w = np.exp(-1j * beta) * (a_w + (np.exp(1j * beta) - 1.0) * overlap * psi0_w)
    probs = np.abs(final_w) ** 2
    i, j = np.unravel_index(np.argmax(probs), probs.shape)
    return QaoaParams(gamma=(angles[i],), beta=(angles[j],)), float(probs[i, j])
