"""Exact execution of the Grover-QAOA circuit on two interchangeable backends.

The subspace backend tracks the two amplitudes on |w> and |r>; the
statevector backend tracks all 2^n amplitudes. Both apply the same closed
forms with the same phase conventions, so their results agree entrywise.
"""
import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Tuple, Union

import numpy as np

from .errors import DomainError
from .hamiltonian import exact_steps, initial_amplitudes, ordered_product
from .schedule import (
    QaoaParams,
    Schedule,
    SearchInstance,
    schedule_continuous_many,
)

logger = logging.getLogger(__name__)


class Backend(Enum):
    """Simulation backend."""
    SUBSPACE = "subspace"
    STATEVECTOR = "statevector"

    @classmethod
    def from_cli(cls, name: str) -> "Backend":
        try:
            return cls(name.lower())
        except ValueError:
            raise DomainError(f"Unknown backend '{name}' (expected subspace or statevector)")


@dataclass(frozen=True)
class SimulatorConfig:
    """Limits for the statevector backend."""
    max_qubits: int = 24


DEFAULT_CONFIG = SimulatorConfig()


@dataclass
class SubspaceState:
    """Amplitudes on |w> and on |r> = (1/sqrt(N-1)) sum_{x != w} |x>."""
    N: int
    a_omega: complex
    a_r: complex

    @property
    def norm_sq(self) -> float:
        return abs(self.a_omega) ** 2 + abs(self.a_r) ** 2

    def as_array(self) -> np.ndarray:
        return np.array([self.a_omega, self.a_r], dtype=complex)

    def copy(self) -> "SubspaceState":
        return SubspaceState(self.N, self.a_omega, self.a_r)


@dataclass
class StateVector:
    """All 2^n amplitudes; `marked` is the index of |w>."""
    amplitudes: np.ndarray
    marked: int

    @property
    def N(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def norm_sq(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def copy(self) -> "StateVector":
        return StateVector(self.amplitudes.copy(), self.marked)


State = Union[SubspaceState, StateVector]


@dataclass
class RunResult:
    """Final state, success probability and (optionally) its per-step trace."""
    state: State
    success_prob: float
    trace: List[float] = field(default_factory=list)

    def __post_init__(self):
        if not -1e-12 <= self.success_prob <= 1.0 + 1e-12:
            raise DomainError(f"success probability {self.success_prob} outside [0, 1]")
        self.success_prob = min(max(self.success_prob, 0.0), 1.0)

    def to_dict(self) -> Dict:
        return {"success_prob": self.success_prob, "trace": list(self.trace)}

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def success_probability(state: State) -> float:
    """|<w|psi>|^2."""
    if isinstance(state, SubspaceState):
        return abs(state.a_omega) ** 2
    return float(abs(state.amplitudes[state.marked]) ** 2)


def initial_state(instance: SearchInstance, backend: Backend = Backend.SUBSPACE,
                  config: SimulatorConfig = DEFAULT_CONFIG) -> State:
    """Uniform superposition |+>^n on the requested backend."""
    N = instance.N
    if backend is Backend.SUBSPACE:
        a_omega, a_r = initial_amplitudes(N)
        return SubspaceState(N, complex(a_omega), complex(a_r))
    if instance.n_qubits > config.max_qubits:
        raise DomainError(
            f"statevector backend limited to {config.max_qubits} qubits, got {instance.n_qubits}"
        )
    amplitudes = np.full(N, 1.0 / math.sqrt(N), dtype=complex)
    return StateVector(amplitudes, instance.marked)


def _cost_inplace(state: State, gamma: float):
    phase = np.exp(-1j * gamma)
    if isinstance(state, SubspaceState):
        state.a_r *= phase
        return
    # Phase everything, then put |w> back untouched.
    kept = state.amplitudes[state.marked]
    state.amplitudes *= phase
    state.amplitudes[state.marked] = kept


def _mixer_inplace(state: State, beta: float):
    # exp(-i beta (I - P)) v = e^{-i beta} (v + (e^{i beta} - 1) <psi0|v> psi0)
    N = state.N
    phase = np.exp(-1j * beta)
    kick = np.exp(1j * beta) - 1.0
    if isinstance(state, SubspaceState):
        psi0 = initial_amplitudes(N)
        overlap = psi0[0] * state.a_omega + psi0[1] * state.a_r
        state.a_omega = phase * (state.a_omega + kick * overlap * psi0[0])
        state.a_r = phase * (state.a_r + kick * overlap * psi0[1])
        return
    scale = 1.0 / math.sqrt(N)
    overlap = state.amplitudes.sum() * scale
    state.amplitudes += kick * overlap * scale
    state.amplitudes *= phase


def apply_cost(state: State, gamma: float) -> State:
    """exp(-i gamma Hf): |w> untouched, every other amplitude phased by e^{-i gamma}."""
    out = state.copy()
    _cost_inplace(out, gamma)
    return out


def apply_mixer(state: State, beta: float) -> State:
    """exp(-i beta H0) with H0 = I - |psi0><psi0|."""
    out = state.copy()
    _mixer_inplace(out, beta)
    return out


def run_qaoa(instance: SearchInstance, params: QaoaParams,
             backend: Backend = Backend.SUBSPACE, record_trace: bool = False,
             config: SimulatorConfig = DEFAULT_CONFIG) -> RunResult:
    """Apply cost(gamma_l) then mixer(beta_l) for l = 1..p to |+>^n."""
    if len(params.gamma) != len(params.beta):
        raise DomainError("gamma and beta must have equal lengths")
    if params.p == 0:
        raise DomainError("QAOA circuit needs at least one layer")

    state = initial_state(instance, backend, config)
    trace = []
    for gamma, beta in zip(params.gamma, params.beta):
        _cost_inplace(state, gamma)
        _mixer_inplace(state, beta)
        if record_trace:
            trace.append(success_probability(state))

    prob = success_probability(state)
    logger.debug(f"QAOA p={params.p} on {backend.value} (n={instance.n_qubits}): "
                 f"success_prob={prob:.6g}")
    return RunResult(state=state, success_prob=prob, trace=trace)


def reference_grid(schedule: Schedule, refine: int) -> np.ndarray:
    """s-values of the refine*R exact sub-steps.

    Every variant is resampled from the continuous schedule, so the grid
    ends at s = 1 even when the discrete schedule does not.
    """
    if refine < 1:
        raise DomainError(f"refine must be >= 1, got {refine}")
    M = refine * schedule.R
    times = np.linspace(schedule.T / M, schedule.T, M)
    return schedule_continuous_many(times, schedule.N, schedule.spec.eps1)


def run_reference_adiabatic(instance: SearchInstance, schedule: Schedule, refine: int = 64,
                            record_trace: bool = False) -> RunResult:
    """Stand-in for the continuous adiabatic evolution: refine*R exact steps."""
    if instance.N != schedule.N:
        raise DomainError(f"instance has N={instance.N} but schedule was built for N={schedule.N}")
    s_fine = reference_grid(schedule, refine)
    blocks = exact_steps(s_fine, schedule.N, schedule.T / s_fine.shape[0])
    psi = initial_amplitudes(schedule.N).astype(complex)

    trace = []
    if record_trace:
        # Probability after each coarse step l, i.e. every refine sub-steps.
        for l in range(schedule.R):
            psi = ordered_product(blocks[l * refine:(l + 1) * refine]) @ psi
            trace.append(float(abs(psi[0]) ** 2))
    else:
        psi = ordered_product(blocks) @ psi

    state = SubspaceState(schedule.N, complex(psi[0]), complex(psi[1]))
    prob = success_probability(state)
    logger.debug(f"Reference run N={schedule.N}, {s_fine.shape[0]} steps: success_prob={prob:.6g}")
    return RunResult(state=state, success_prob=prob, trace=trace)


def project_to_subspace(state: StateVector) -> Tuple[SubspaceState, float]:
    """Project onto span{|w>, |r>}; also return the norm left outside it."""
    N = state.N
    amps = state.amplitudes
    others = np.delete(amps, state.marked)
    a_r = others.sum() / math.sqrt(N - 1)
    residual = float(np.linalg.norm(others - a_r / math.sqrt(N - 1)))
    return SubspaceState(N, complex(amps[state.marked]), complex(a_r)), residual


def state_to_csv(state: State) -> str:
    """Render amplitudes as index,re,im (subspace: 0 = |w>, 1 = |r>)."""
    amps = state.as_array() if isinstance(state, SubspaceState) else state.amplitudes
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["index", "re", "im"])
    for index, amp in enumerate(amps):
        writer.writerow([index, format(amp.real, ".17g"), format(amp.imag, ".17g")])
    return buffer.getvalue()


def write_state_csv(path, state: State):
    """Write state_to_csv output to path."""
    with open(Path(path), "w", newline="") as f:
        f.write(state_to_csv(state))
    logger.info(f"Wrote {state.N} amplitudes to {path}")
