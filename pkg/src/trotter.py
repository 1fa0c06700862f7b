"""Product-formula approximations of the schedule steps and their errors.

Each step exp(-i[(1-s)H0 + sHf]dt) is split into exponentials of the two
projector terms: symmetrically at second order, and lifted to order 2k by
the five-factor Suzuki recursion. Errors are spectral norms of differences
of 2x2 unitaries, so they are exact rather than bounds.
"""
import logging
import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Dict

import numpy as np

from .errors import DomainError
from .hamiltonian import (
    MARKED_PROJECTOR,
    Unitary2,
    exact_steps,
    initial_amplitudes,
    initial_projector,
    ordered_product,
    projector_exp,
)
from .schedule import Schedule, synth_qaoa_params, total_time

logger = logging.getLogger(__name__)


class TrotterOrder(IntEnum):
    """Supported even orders 2k of the product formula."""
    SECOND = 2
    FOURTH = 4
    SIXTH = 6
    EIGHTH = 8

    @classmethod
    def from_int(cls, order: int) -> "TrotterOrder":
        try:
            return cls(int(order))
        except ValueError:
            raise DomainError(f"unsupported Trotter order {order} (expected one of 2, 4, 6, 8)")

    @property
    def k(self) -> int:
        return self.value // 2


@dataclass(frozen=True)
class ErrorReport:
    """Trotter and adiabatic error components of one discretized run."""
    trotter_err: float
    adiabatic_infidelity: float
    state_infidelity: float
    total: float
    eps1: float
    order: int
    R: int

    def __post_init__(self):
        if self.trotter_err < 0.0:
            raise DomainError(f"trotter error must be non-negative, got {self.trotter_err}")

    def to_dict(self) -> Dict:
        return {
            "trotter_err": self.trotter_err,
            "adiabatic_infidelity": self.adiabatic_infidelity,
            "state_infidelity": self.state_infidelity,
            "total": self.total,
            "eps1": self.eps1,
            "order": self.order,
            "R": self.R,
        }


def _mixer(N: int, theta):
    return projector_exp(initial_projector(N), theta)


def _cost(theta):
    return projector_exp(MARKED_PROJECTOR, theta)


def _strang_blocks(s: np.ndarray, N: int, dt: float) -> np.ndarray:
    half_mixer = _mixer(N, 0.5 * dt * (1.0 - s))
    cost = _cost(dt * s)
    return half_mixer @ cost @ half_mixer


def _suzuki_blocks(order: int, s: np.ndarray, N: int, dt: float) -> np.ndarray:
    if order == 2:
        return _strang_blocks(s, N, dt)
    p = suzuki_coefficient(order)
    outer = _suzuki_blocks(order - 2, s, N, p * dt)
    inner = _suzuki_blocks(order - 2, s, N, (1.0 - 4.0 * p) * dt)
    return outer @ outer @ inner @ outer @ outer


def suzuki_coefficient(order: int) -> float:
    """s_k = 1 / (4 - 4^(1/(2k-1))) for the step from order 2k-2 to 2k."""
    k = TrotterOrder.from_int(order).k
    return 1.0 / (4.0 - 4.0 ** (1.0 / (2 * k - 1)))


def lie_step(s: float, N: int, dt: float) -> Unitary2:
    """First-order product exp(-i dt s Hf) exp(-i dt (1-s) H0)."""
    return _cost(dt * s) @ _mixer(N, dt * (1.0 - s))


def strang_step(s: float, N: int, dt: float) -> Unitary2:
    """Symmetric split exp(-i dt A H0/2) exp(-i dt C Hf) exp(-i dt A H0/2), A = 1-s, C = s."""
    return _strang_blocks(np.array([s], dtype=float), N, dt)[0]


def suzuki_step(order, s: float, N: int, dt: float) -> Unitary2:
    """Order-2k step: [U(p dt)]^2 U((1-4p) dt) [U(p dt)]^2 over order 2k-2."""
    order = TrotterOrder.from_int(order)
    if order == TrotterOrder.SECOND:
        return strang_step(s, N, dt)
    return _suzuki_blocks(int(order), np.array([s], dtype=float), N, dt)[0]


def op_norm_diff(u: Unitary2, v: Unitary2) -> float:
    """Spectral norm of u - v: sqrt of the top eigenvalue of (u-v)^H (u-v)."""
    diff = np.asarray(u) - np.asarray(v)
    gram = diff.conj().T @ diff
    top = np.linalg.eigvalsh(gram)[-1]
    return math.sqrt(max(float(top), 0.0))


def grid_product(schedule: Schedule) -> Unitary2:
    """prod_{l=R..1} exp(-i H(s_l) tau), l = 1 acting first."""
    return ordered_product(exact_steps(schedule.s, schedule.N, schedule.tau))


def merged_product(schedule: Schedule) -> Unitary2:
    """The order-2 product with adjacent mixer half-steps merged.

    Equals V_R U_R ... V_1 U_1 M_1, where U_l, V_l use the synthesized angles
    and M_1 is the leading half mixer exp(-i tau (1-s_1) H0 / 2).
    """
    params = synth_qaoa_params(schedule)
    N = schedule.N
    cost = _cost(np.asarray(params.gamma))
    mixer = _mixer(N, np.asarray(params.beta))
    layers = mixer @ cost
    leading = _mixer(N, 0.5 * schedule.tau * (1.0 - schedule.s[0]))
    return ordered_product(np.concatenate([leading[None], layers], axis=0))


def trotter_product(schedule: Schedule, order) -> Unitary2:
    """Product of order-2k factors over the schedule; order 2 uses the merged form."""
    order = TrotterOrder.from_int(order)
    if order == TrotterOrder.SECOND:
        return merged_product(schedule)
    s = np.asarray(schedule.s, dtype=float)
    return ordered_product(_suzuki_blocks(int(order), s, schedule.N, schedule.tau))


def evolution_error(schedule: Schedule, order, N: int = None) -> ErrorReport:
    """Compare the Trotterized product against the same-grid exact product."""
    order = TrotterOrder.from_int(order)
    if N is not None and N != schedule.N:
        raise DomainError(f"schedule was built for N={schedule.N}, not N={N}")
    N = schedule.N

    exact = grid_product(schedule)
    approx = trotter_product(schedule, order)
    trotter_err = op_norm_diff(exact, approx)

    psi0 = initial_amplitudes(N).astype(complex)
    psi_exact = exact @ psi0
    psi_approx = approx @ psi0
    adiabatic_infidelity = 1.0 - abs(psi_exact[0]) ** 2
    state_infidelity = 1.0 - abs(np.vdot(psi_exact, psi_approx)) ** 2

    eps1 = schedule.spec.eps1
    report = ErrorReport(
        trotter_err=trotter_err,
        adiabatic_infidelity=float(adiabatic_infidelity),
        state_infidelity=float(max(state_infidelity, 0.0)),
        total=trotter_err + eps1,
        eps1=eps1,
        order=int(order),
        R=schedule.R,
    )
    logger.debug(f"N={N} R={schedule.R} order={int(order)}: trotter_err={trotter_err:.6g}")
    return report


def required_steps_for_time(T: float, budget: float, order, constant: float = 1.0) -> int:
    """ceil(constant * ((2T)^(2k+1) / budget)^(1/(2k)))."""
    k = TrotterOrder.from_int(order).k
    if budget <= 0.0:
        raise DomainError(f"Trotter error budget must be positive, got {budget}")
    # Work in logs so large T does not overflow.
    log_r = ((2 * k + 1) * math.log(2.0 * T) - math.log(budget)) / (2 * k)
    return max(1, math.ceil(constant * math.exp(log_r)))


def required_R(N: int, eps: float, eps1: float, order=TrotterOrder.SECOND,
               constant: float = 1.0) -> int:
    """Step count that keeps the Trotter error within eps - eps1."""
    if eps <= eps1:
        raise DomainError(f"total budget eps={eps} must exceed eps1={eps1}")
    return required_steps_for_time(total_time(N, eps1), eps - eps1, order, constant)
