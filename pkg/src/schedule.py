"""AGS interpolation schedules and the QAOA angles synthesized from them.

The local (gap-adapted) schedule of adiabatic Grover search is available in
closed form both ways: t(s) and its inverse s(t). Discretizing it into R
steps and splitting every step with the second-order product formula gives
the QAOA angles directly, with no classical optimization loop.
"""
import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional, Tuple

import numpy as np

from .errors import DomainError

logger = logging.getLogger(__name__)

# Relative slack on t > T accepted by schedule_continuous.
TIME_SLACK = 1e-9


class Variant(Enum):
    """How the discrete schedule s_1..s_R is produced."""
    PAPER_LITERAL = "paper"
    REGULARIZED = "regularized"
    EXACT_INVERSION = "exact"

    @classmethod
    def from_cli(cls, name: str) -> "Variant":
        """Map a CLI/config name (paper|regularized|exact) to a variant."""
        try:
            return cls(name.lower())
        except ValueError:
            choices = ", ".join(v.value for v in cls)
            raise DomainError(f"Unknown schedule variant '{name}' (expected one of: {choices})")


@dataclass(frozen=True)
class SearchInstance:
    """An unstructured search problem over N = 2^n items with one marked index."""
    n_qubits: int
    marked: int = 0

    def __post_init__(self):
        if self.n_qubits < 1:
            raise DomainError(f"n_qubits must be >= 1, got {self.n_qubits}")
        if not 0 <= self.marked < self.N:
            raise DomainError(f"marked index {self.marked} outside [0, {self.N})")

    @property
    def N(self) -> int:
        return 2 ** self.n_qubits

    def to_dict(self) -> Dict:
        return {"n_qubits": self.n_qubits, "N": self.N, "marked": self.marked}


@dataclass(frozen=True)
class ScheduleSpec:
    """Variant, step count and adiabatic accuracy of a discrete schedule."""
    variant: Variant = Variant.EXACT_INVERSION
    R: int = 1
    eps1: float = 0.1

    def __post_init__(self):
        if self.R < 1:
            raise DomainError(f"step count R must be >= 1, got {self.R}")
        if not 0.0 < self.eps1 < 1.0:
            raise DomainError(f"eps1 must lie in (0, 1), got {self.eps1}")


@dataclass(frozen=True)
class Schedule:
    """A discretized schedule: s_1..s_R sampled at t_l = l*tau, tau = T/R."""
    spec: ScheduleSpec
    N: int
    s: Tuple[float, ...]
    tau: float
    T: float
    out_of_range: bool = False

    def __post_init__(self):
        if len(self.s) != self.spec.R:
            raise DomainError(f"schedule holds {len(self.s)} values but R = {self.spec.R}")
        if not all(math.isfinite(v) for v in self.s):
            raise DomainError("schedule values must be finite")

    @property
    def R(self) -> int:
        return self.spec.R

    @property
    def times(self) -> Tuple[float, ...]:
        """Time stamps l*tau of the steps, l = 1..R."""
        return tuple(l * self.tau for l in range(1, self.R + 1))

    def to_dict(self) -> Dict:
        return {
            "variant": self.spec.variant.value,
            "N": self.N,
            "R": self.R,
            "eps1": self.spec.eps1,
            "tau": self.tau,
            "T": self.T,
            "s": list(self.s),
        }


@dataclass(frozen=True)
class QaoaParams:
    """Cost angles gamma_1..gamma_p and mixer angles beta_1..beta_p (radians).

    Angles are stored unreduced; use wrapped() for a mod-2pi view.
    """
    gamma: Tuple[float, ...]
    beta: Tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "gamma", tuple(float(g) for g in self.gamma))
        object.__setattr__(self, "beta", tuple(float(b) for b in self.beta))
        if len(self.gamma) != len(self.beta):
            raise DomainError(
                f"gamma and beta lengths differ ({len(self.gamma)} vs {len(self.beta)})"
            )
        if not all(math.isfinite(a) for a in self.gamma + self.beta):
            raise DomainError("QAOA angles must be finite")

    @property
    def p(self) -> int:
        return len(self.gamma)

    def wrapped(self) -> "QaoaParams":
        """Return a copy with every angle reduced into [0, 2pi)."""
        two_pi = 2.0 * math.pi
        return QaoaParams(
            gamma=tuple(g % two_pi for g in self.gamma),
            beta=tuple(b % two_pi for b in self.beta),
        )

    def as_vector(self) -> np.ndarray:
        """Interleave as [gamma_1, beta_1, gamma_2, beta_2, ...]."""
        vec = np.empty(2 * self.p)
        vec[0::2] = self.gamma
        vec[1::2] = self.beta
        return vec

    @classmethod
    def from_vector(cls, vec) -> "QaoaParams":
        vec = np.asarray(vec, dtype=float)
        return cls(gamma=tuple(vec[0::2]), beta=tuple(vec[1::2]))

    def to_dict(self) -> Dict:
        return {"gamma": list(self.gamma), "beta": list(self.beta)}

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def _check_N(N: int):
    if N < 2:
        raise DomainError(f"search-space size N must be >= 2, got {N}")


def total_time(N: int, eps1: float) -> float:
    """Total evolution time T = t(s=1) of the local schedule.

    T = N / (eps1 * sqrt(N-1)) * arctan(sqrt(N-1)), which tends to
    pi*sqrt(N) / (2*eps1) for large N.
    """
    _check_N(N)
    # eps1 = 1 is accepted here so T can be evaluated at the boundary.
    if not 0.0 < eps1 <= 1.0:
        raise DomainError(f"eps1 must lie in (0, 1), got {eps1}")
    root = math.sqrt(N - 1)
    return N / (eps1 * root) * math.atan(root)


def time_of_s(s: float, N: int, eps1: float) -> float:
    """Closed-form time at which the local schedule reaches s."""
    _check_N(N)
    root = math.sqrt(N - 1)
    return N / (2.0 * eps1 * root) * (math.atan(root * (2.0 * s - 1.0)) + math.atan(root))


def schedule_continuous(t: float, N: int, eps1: float) -> float:
    """Invert the local schedule exactly: s(t) on [0, T].

    s(t) = 1/2 + tan(theta(t) - theta0) / (2 sqrt(N-1)) with
    theta(t) = 2 t eps1 sqrt(N-1) / N and theta0 = arctan(sqrt(N-1)).
    """
    T = total_time(N, eps1)
    if t < 0.0 or t > T * (1.0 + TIME_SLACK):
        raise DomainError(f"time {t} outside [0, T={T}]")
    return float(schedule_continuous_many(np.array([t]), N, eps1)[0])


def schedule_continuous_many(times, N: int, eps1: float) -> np.ndarray:
    """Vectorized schedule_continuous; times are clamped into [0, T]."""
    T = total_time(N, eps1)
    t = np.clip(np.asarray(times, dtype=float), 0.0, T)
    root = math.sqrt(N - 1)
    theta = 2.0 * t * eps1 * root / N
    s = 0.5 + np.tan(theta - math.atan(root)) / (2.0 * root)
    s = np.clip(s, 0.0, 1.0)
    s[t >= T] = 1.0
    s[t == 0.0] = 0.0
    return s


def _tangent_schedule(theta: np.ndarray, N: int) -> np.ndarray:
    # s = sqrt(N) tan(theta) / (2 (sqrt(N) tan(theta) + 1)), rewritten so that
    # theta = pi/2 stays finite.
    cot = np.cos(theta) / np.sin(theta)
    return 1.0 / (2.0 + 2.0 * cot / math.sqrt(N))


def regularized_max_angle(N: int) -> float:
    """Angle at which the tangent schedule reaches exactly s = 1."""
    _check_N(N)
    return math.pi - math.atan(2.0 / math.sqrt(N))


def schedule_discrete(spec: ScheduleSpec, N: int) -> Schedule:
    """Sample the schedule at t_l = l*T/R for l = 1..R."""
    _check_N(N)
    R = spec.R
    T = total_time(N, spec.eps1)
    tau = T / R
    l = np.arange(1, R + 1, dtype=float)

    if spec.variant is Variant.PAPER_LITERAL:
        s = _tangent_schedule(math.pi * l / R, N)
    elif spec.variant is Variant.REGULARIZED:
        s = _tangent_schedule(regularized_max_angle(N) * l / R, N)
        s = np.clip(s, 0.0, 1.0)
        s[-1] = 1.0
    else:
        s = schedule_continuous_many(l * tau, N, spec.eps1)
        s[-1] = 1.0

    out_of_range = bool(np.any((s < 0.0) | (s > 1.0)))
    if out_of_range:
        logger.warning(f"{spec.variant.value} schedule for N={N}, R={R} leaves [0, 1]")
    logger.debug(f"Built {spec.variant.value} schedule: N={N}, R={R}, T={T:.6g}")
    return Schedule(spec=spec, N=N, s=tuple(float(v) for v in s), tau=tau, T=T,
                    out_of_range=out_of_range)


def synth_qaoa_params(schedule: Schedule) -> QaoaParams:
    """Read the QAOA angles off the merged second-order product.

    gamma_l = tau*s_l; beta_l = (tau/2)(2 - s_l - s_{l+1}) for l < R and
    beta_R = (tau/2)(1 - s_R). The leading half mixer only contributes a
    global phase on the initial state and is dropped.
    """
    s = np.asarray(schedule.s, dtype=float)
    tau = schedule.tau
    gamma = tau * s
    beta = np.empty_like(s)
    beta[:-1] = 0.5 * tau * (2.0 - (s[:-1] + s[1:]))
    beta[-1] = 0.5 * tau * (1.0 - s[-1])
    return QaoaParams(gamma=tuple(gamma), beta=tuple(beta))


def schedule_to_json(schedule: Schedule, params: Optional[QaoaParams] = None,
                     indent: int = 2) -> str:
    """Serialize a schedule with its angles as one JSON document."""
    params = params or synth_qaoa_params(schedule)
    data = schedule.to_dict()
    data.update(params.to_dict())
    return json.dumps(data, indent=indent)


def params_to_csv(schedule: Schedule, params: Optional[QaoaParams] = None) -> str:
    """Render the l,s,gamma,beta table."""
    params = params or synth_qaoa_params(schedule)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["l", "s", "gamma", "beta"])
    for l, (s, g, b) in enumerate(zip(schedule.s, params.gamma, params.beta), 1):
        writer.writerow([l, format(s, ".17g"), format(g, ".17g"), format(b, ".17g")])
    return buffer.getvalue()


def read_params_json(text: str) -> Tuple[Optional[Schedule], QaoaParams]:
    """Parse a document written by schedule_to_json or QaoaParams.to_json."""
    data = json.loads(text)
    params = QaoaParams(gamma=tuple(data["gamma"]), beta=tuple(data["beta"]))
    if "s" not in data:
        return None, params
    spec = ScheduleSpec(variant=Variant.from_cli(data["variant"]), R=int(data["R"]),
                        eps1=float(data["eps1"]))
    s = tuple(float(v) for v in data["s"])
    schedule = Schedule(spec=spec, N=int(data["N"]), s=s, tau=float(data["tau"]),
                        T=float(data["T"]),
                        out_of_range=any(v < 0.0 or v > 1.0 for v in s))
    return schedule, params
