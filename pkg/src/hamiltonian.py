"""H(s) = (1-s)H0 + sHf restricted to the invariant plane span{|w>, |r>}.

H0 = I - |psi0><psi0| and Hf = I - |w><w| are complements of rank-one
projectors, so the whole evolution lives in two dimensions and every
exponential has a closed form. Nothing here builds 2^n x 2^n matrices.
"""
import csv
import io
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError
from .schedule import schedule_continuous, total_time

logger = logging.getLogger(__name__)

# A 2x2 complex unitary, row-major, in the {|w>, |r>} basis.
Unitary2 = np.ndarray

IDENTITY = np.eye(2, dtype=complex)
MARKED_PROJECTOR = np.array([[1.0, 0.0], [0.0, 0.0]])


def _check_N(N: int):
    if N < 2:
        raise DomainError(f"search-space size N must be >= 2, got {N}")


def initial_amplitudes(N: int) -> np.ndarray:
    """|psi0> in the {|w>, |r>} basis: (1/sqrt(N), sqrt((N-1)/N))."""
    _check_N(N)
    return np.array([1.0 / math.sqrt(N), math.sqrt((N - 1) / N)])


def initial_projector(N: int) -> np.ndarray:
    """|psi0><psi0| in the {|w>, |r>} basis."""
    psi0 = initial_amplitudes(N)
    return np.outer(psi0, psi0)


@dataclass(frozen=True)
class Hamiltonian2:
    """Hermitian 2x2 block of H(s) in the {|w>, |r>} basis."""
    matrix: np.ndarray
    s: float
    N: int

    @property
    def a(self) -> float:
        return float(np.real(self.matrix[0, 0]))

    @property
    def b(self) -> complex:
        """Upper off-diagonal entry; a plain float for real matrices."""
        b = self.matrix[0, 1]
        return complex(b) if np.iscomplexobj(self.matrix) else float(b)

    @property
    def d(self) -> float:
        return float(np.real(self.matrix[1, 1]))


@dataclass(frozen=True)
class EigenSystem2:
    """Eigenvalues lambda0 <= lambda1 and matching orthonormal eigenvectors."""
    values: Tuple[float, float]
    vectors: Tuple[np.ndarray, np.ndarray]

    @property
    def ground(self) -> np.ndarray:
        return self.vectors[0]

    @property
    def excited(self) -> np.ndarray:
        return self.vectors[1]

    @property
    def gap(self) -> float:
        return self.values[1] - self.values[0]


def h_subspace(s: float, N: int) -> Hamiltonian2:
    """Build H(s) in the invariant plane.

    [[(1-s)(N-1)/N, -(1-s)sqrt(N-1)/N], [-(1-s)sqrt(N-1)/N, 1-(1-s)(N-1)/N]]
    Values of s slightly outside [0, 1] are accepted for diagnostics.
    """
    _check_N(N)
    a = (1.0 - s) * (N - 1) / N
    b = -(1.0 - s) * math.sqrt(N - 1) / N
    matrix = np.array([[a, b], [b, 1.0 - a]])
    return Hamiltonian2(matrix=matrix, s=float(s), N=N)


def _fix_sign(vec: np.ndarray) -> np.ndarray:
    # First nonzero component made real positive.
    for component in vec:
        if component != 0:
            return vec * (abs(component) / component)
    return vec


def eigensystem(h: Hamiltonian2) -> EigenSystem2:
    """Closed-form eigensolve of a Hermitian 2x2 matrix."""
    a, b, d = h.a, h.b, h.d
    mid = 0.5 * (a + d)
    radius = math.hypot(0.5 * (a - d), abs(b))
    lam0, lam1 = mid - radius, mid + radius

    if b == 0.0:
        if a <= d:
            v0, v1 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
        else:
            v0, v1 = np.array([0.0, 1.0]), np.array([1.0, 0.0])
    else:
        # Of the two null-space candidates of (H - lam0 I), keep the longer one.
        u = np.array([b, lam0 - a])
        w = np.array([lam0 - d, np.conj(b)])
        v0 = u if np.vdot(u, u).real >= np.vdot(w, w).real else w
        v0 = v0 / np.linalg.norm(v0)
        v1 = np.array([-np.conj(v0[1]), np.conj(v0[0])])

    return EigenSystem2(values=(lam0, lam1), vectors=(_fix_sign(v0), _fix_sign(v1)))


def gap(s: float, N: int) -> float:
    """Spectral gap lambda1 - lambda0 of H(s)."""
    return eigensystem(h_subspace(s, N)).gap


def gap_closed_form(s: float, N: int) -> float:
    """sqrt(1 - 4 s (1-s) (N-1)/N), the gap read off the 2x2 block directly."""
    _check_N(N)
    return math.sqrt(max(1.0 - 4.0 * s * (1.0 - s) * (N - 1) / N, 0.0))


def minimum_gap(N: int) -> float:
    """Smallest gap over s in [0, 1], attained at s = 1/2."""
    _check_N(N)
    return 1.0 / math.sqrt(N)


def projector_exp(projector: np.ndarray, theta) -> np.ndarray:
    """exp(-i theta (I - P)) = e^{-i theta} I + (1 - e^{-i theta}) P.

    theta may be a scalar or a 1-D array; arrays yield a stack of blocks.
    """
    theta = np.asarray(theta, dtype=float)
    phase = np.exp(-1j * theta)[..., None, None]
    return phase * IDENTITY + (1.0 - phase) * projector


def exact_step(s: float, N: int, dt: float) -> Unitary2:
    """exp(-i H(s) dt) as the spectral sum of the two eigenprojectors."""
    system = eigensystem(h_subspace(s, N))
    unitary = np.zeros((2, 2), dtype=complex)
    for lam, vec in zip(system.values, system.vectors):
        unitary += np.exp(-1j * lam * dt) * np.outer(vec, np.conj(vec))
    return unitary


def exact_steps(s_values: Sequence[float], N: int, dt: float) -> np.ndarray:
    """Batched exp(-i H(s_l) dt) for a whole grid, shape (len(s_values), 2, 2).

    Uses exp(-iHdt) = e^{-i m dt} [cos(r dt) I - i sin(r dt)/r (H - m I)] with
    m the mean eigenvalue and r half the gap; r >= 1/(2 sqrt(N)) > 0.
    """
    _check_N(N)
    s = np.asarray(s_values, dtype=float)
    a = (1.0 - s) * (N - 1) / N
    b = -(1.0 - s) * math.sqrt(N - 1) / N
    d = 1.0 - a
    mid = 0.5 * (a + d)
    radius = np.hypot(0.5 * (a - d), b)

    traceless = np.empty(s.shape + (2, 2))
    traceless[:, 0, 0] = a - mid
    traceless[:, 1, 1] = d - mid
    traceless[:, 0, 1] = b
    traceless[:, 1, 0] = b

    cos = np.cos(radius * dt)[:, None, None]
    sinc = (np.sin(radius * dt) / radius)[:, None, None]
    phase = np.exp(-1j * mid * dt)[:, None, None]
    return phase * (cos * IDENTITY - 1j * sinc * traceless)


def ordered_product(blocks: np.ndarray) -> Unitary2:
    """Time-ordered product B_{m-1} ... B_1 B_0 of a stack (block 0 acts first).

    Pairwise reduction keeps the cost at O(log m) vectorized matmuls.
    """
    stack = np.asarray(blocks, dtype=complex)
    if stack.shape[0] == 0:
        return IDENTITY.copy()
    while stack.shape[0] > 1:
        if stack.shape[0] % 2:
            stack = np.concatenate([stack, IDENTITY[None]], axis=0)
        stack = np.matmul(stack[1::2], stack[0::2])
    return stack[0]


def adiabatic_margin(N: int, eps1: float, grid: int = 1001,
                     schedule_fn: Optional[Callable[[float], float]] = None) -> float:
    """Largest |<l1| dH/dt |l0>| / g^2 over a uniform time grid on [0, T].

    dH/dt = (ds/dt)(Hf - H0); ds/dt comes from a central difference of the
    schedule with step 1e-6*T (one-sided at the two endpoints).
    """
    if grid < 100:
        raise DomainError(f"adiabatic margin needs at least 100 grid points, got {grid}")
    T = total_time(N, eps1)
    if schedule_fn is None:
        def schedule_fn(t):
            return schedule_continuous(t, N, eps1)

    step = 1e-6 * T
    direction = initial_projector(N) - MARKED_PROJECTOR  # Hf - H0
    margin = 0.0
    for t in np.linspace(0.0, T, grid):
        lo, hi = max(t - step, 0.0), min(t + step, T)
        ds_dt = (schedule_fn(hi) - schedule_fn(lo)) / (hi - lo)
        system = eigensystem(h_subspace(schedule_fn(t), N))
        coupling = abs(np.conj(system.excited) @ direction @ system.ground) * abs(ds_dt)
        margin = max(margin, coupling / system.gap ** 2)
    logger.debug(f"Adiabatic margin N={N}, eps1={eps1}: {margin:.6g}")
    return margin


def gap_grid(N: int, points: int = 1001) -> List[Tuple[float, float, float, float]]:
    """(s, lambda0, lambda1, gap) rows on a uniform s-grid."""
    if points < 2:
        raise DomainError(f"gap grid needs at least 2 points, got {points}")
    rows = []
    for s in np.linspace(0.0, 1.0, points):
        system = eigensystem(h_subspace(float(s), N))
        rows.append((float(s), system.values[0], system.values[1], system.gap))
    return rows


def gap_csv(rows: Sequence[Tuple[float, float, float, float]]) -> str:
    """Render gap_grid rows with header s,lambda0,lambda1,gap."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["s", "lambda0", "lambda1", "gap"])
    for row in rows:
        writer.writerow([format(v, ".17g") for v in row])
    return buffer.getvalue()


def write_gap_csv(path, rows: Sequence[Tuple[float, float, float, float]]):
    with open(Path(path), "w", newline="") as f:
        f.write(gap_csv(rows))
    logger.info(f"Wrote {len(rows)} gap rows to {path}")
