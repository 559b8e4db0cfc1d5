"""Mixed-integer MPC problem on double-integrator flat outputs.

Decision vector layout (``VariableLayout``)::

    [ x_0 .. x_N | u_0 .. u_{N-1} | b_{1,1} .. b_{N,C} | slacks ]

with ``x_k = (x, y, ẋ, ẏ)``, ``u_k = (ẍ, ÿ)`` and one binary per partition
cell per step. Every inequality row carries a label so ``soften`` can leave
input rows hard.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from navstack.errors import NoLocalFreeSpaceError
from navstack.geometry.partition import ConvexPartition
from navstack.geometry.sets import HPolytope, Point2, Zonotope
from navstack.miqp.problem import MIQProblem
from navstack.mpc.config import MPCConfig

NX, NU = 4, 2

VELOCITY = "velocity"
INPUT = "input"
LOCAL_BOX = "local_box"
FREE_SPACE = "free_space"
TERMINAL = "terminal"
TERMINAL_VELOCITY = "terminal_velocity"
SLACK = "slack"

# Sign patterns of the diamond-shaped speed/acceleration polytopes.
_DIAMOND = ((1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0))


@dataclass(frozen=True)
class FlatState:
    """Double-integrator state; ``ax``/``ay`` hold the input applied from this state."""

    x: float
    y: float
    vx: float = 0.0
    vy: float = 0.0
    ax: float = 0.0
    ay: float = 0.0

    def __post_init__(self) -> None:
        if not all(math.isfinite(v) for v in (self.x, self.y, self.vx, self.vy, self.ax, self.ay)):
            raise ValueError("FlatState entries must be finite")

    @classmethod
    def from_array(cls, state: Sequence[float], accel: Sequence[float] = (0.0, 0.0)) -> FlatState:
        return cls(*(float(v) for v in state[:4]), float(accel[0]), float(accel[1]))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.vx, self.vy])

    @property
    def position(self) -> Point2:
        return Point2(self.x, self.y)


@dataclass(frozen=True, eq=False)
class TerminalSpec:
    """Terminal position reference with a deviation set; terminal velocity is zero."""

    reference: Point2
    deviation: Zonotope

    def region(self) -> HPolytope:
        return self.deviation.translate(self.reference.as_array()).to_hpolytope()


def dynamics(dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Exact discretization of the planar double integrator."""
    A = np.eye(NX)
    A[0, 2] = A[1, 3] = dt
    B = np.zeros((NX, NU))
    B[0, 0] = B[1, 1] = 0.5 * dt * dt
    B[2, 0] = B[3, 1] = dt
    return A, B


@dataclass(frozen=True)
class VariableLayout:
    N: int
    cells: int

    def x(self, k: int) -> int:
        return NX * k

    def u(self, k: int) -> int:
        return NX * (self.N + 1) + NU * k

    def b(self, k: int, i: int) -> int:
        """Binary of cell ``i`` at step ``k`` (1 ≤ k ≤ N)."""
        return NX * (self.N + 1) + NU * self.N + (k - 1) * self.cells + i

    @property
    def n_base(self) -> int:
        return NX * (self.N + 1) + NU * self.N + self.N * self.cells

    @property
    def binaries(self) -> tuple[int, ...]:
        return tuple(range(self.b(1, 0), self.n_base))

    def states(self, z: np.ndarray) -> np.ndarray:
        return np.asarray(z[: NX * (self.N + 1)]).reshape(self.N + 1, NX)

    def inputs(self, z: np.ndarray) -> np.ndarray:
        return np.asarray(z[self.u(0) : self.u(0) + NU * self.N]).reshape(self.N, NU)

    def selection(self, z: np.ndarray) -> np.ndarray:
        return np.asarray(z[self.b(1, 0) : self.n_base]).reshape(self.N, self.cells)


class _RowBuilder:
    """Accumulates sparse rows with right-hand sides and labels."""

    def __init__(self, n: int):
        self.n = n
        self.rows: list[int] = []
        self.cols: list[int] = []
        self.vals: list[float] = []
        self.rhs: list[float] = []
        self.labels: list[str] = []

    def add(self, entries: Iterable[tuple[int, float]], rhs: float, label: str = "") -> None:
        r = len(self.rhs)
        for c, v in entries:
            if v != 0.0:
                self.rows.append(r)
                self.cols.append(c)
                self.vals.append(float(v))
        self.rhs.append(float(rhs))
        self.labels.append(label)

    def matrix(self) -> sp.csr_matrix:
        return sp.csr_matrix((self.vals, (self.rows, self.cols)), shape=(len(self.rhs), self.n))

    def vector(self) -> np.ndarray:
        return np.asarray(self.rhs, dtype=float)


def big_m(normal: np.ndarray, offset: float, box: HPolytope) -> float:
    """Smallest M such that every point of ``box`` satisfies ``n·p <= d + M``."""
    return box.support(normal) - offset


def build_problem(
    x0: FlatState,
    terminal: TerminalSpec,
    partition: ConvexPartition,
    config: MPCConfig,
    local_box: HPolytope | None = None,
) -> MIQProblem:
    """Hard-constrained MIQP for one MPC solve (call ``soften`` before solving)."""
    if partition.is_empty():
        raise NoLocalFreeSpaceError("local partition has no cells")
    box = partition.bounding_box if local_box is None else local_box
    N, C = config.N, len(partition)
    L = VariableLayout(N, C)
    n = L.n_base
    Qk, Rk, QN = config.weights()
    A, B = dynamics(config.dt)
    xr = np.array([terminal.reference.x, terminal.reference.y, 0.0, 0.0])

    # Cost: Σ_{k<N} (x_k - x_r)ᵀQ_k(x_k - x_r) + u_kᵀR_k u_k + (x_N - x_r)ᵀQ_N(x_N - x_r).
    H = sp.block_diag(
        [2 * Qk] * N + [2 * QN] + [2 * Rk] * N + [sp.csc_matrix((N * C, N * C))], format="csc"
    )
    f = np.zeros(n)
    for k in range(N):
        f[L.x(k) : L.x(k) + NX] = -2 * Qk @ xr
    f[L.x(N) : L.x(N) + NX] = -2 * QN @ xr
    constant = N * float(xr @ Qk @ xr) + float(xr @ QN @ xr)

    eq = _RowBuilder(n)
    for i, value in enumerate(x0.as_array()):
        eq.add([(L.x(0) + i, 1.0)], value)
    for k in range(N):
        for i in range(NX):
            entries = [(L.x(k + 1) + i, 1.0)]
            entries += [(L.x(k) + j, -A[i, j]) for j in range(NX)]
            entries += [(L.u(k) + j, -B[i, j]) for j in range(NU)]
            eq.add(entries, 0.0)
    for k in range(1, N + 1):
        eq.add([(L.b(k, i), 1.0) for i in range(C)], 1.0)

    ineq = _RowBuilder(n)
    for k in range(1, N + 1):
        for sx, sy in _DIAMOND:
            ineq.add([(L.x(k) + 2, sx), (L.x(k) + 3, sy)], config.v_max, VELOCITY)
    for k in range(N):
        for sx, sy in _DIAMOND:
            ineq.add([(L.u(k), sx), (L.u(k) + 1, sy)], config.input_bound, INPUT)

    box_unit = box.normalized()
    for k in range(1, N + 1):
        for normal, offset in zip(box_unit.normals, box_unit.offsets):
            ineq.add([(L.x(k), normal[0]), (L.x(k) + 1, normal[1])], offset, LOCAL_BOX)

    for c, cell in enumerate(partition.cells):
        unit = cell.normalized()
        for normal, offset in zip(unit.normals, unit.offsets):
            M = big_m(normal, offset, box)
            if M <= 0.0:
                continue
            for k in range(1, N + 1):
                ineq.add(
                    [(L.x(k), normal[0]), (L.x(k) + 1, normal[1]), (L.b(k, c), M)],
                    offset + M,
                    FREE_SPACE,
                )

    region = terminal.region()
    for normal, offset in zip(region.normals, region.offsets):
        ineq.add([(L.x(N), normal[0]), (L.x(N) + 1, normal[1])], offset, TERMINAL)

    if config.soften_terminal_velocity:
        for i in (2, 3):
            ineq.add([(L.x(N) + i, 1.0)], 0.0, TERMINAL_VELOCITY)
            ineq.add([(L.x(N) + i, -1.0)], 0.0, TERMINAL_VELOCITY)
    else:
        for i in (2, 3):
            eq.add([(L.x(N) + i, 1.0)], 0.0)

    return MIQProblem(
        H=H,
        f=f,
        A_eq=eq.matrix(),
        b_eq=eq.vector(),
        A_in=ineq.matrix(),
        b_in=ineq.vector(),
        binaries=L.binaries,
        constant=constant,
        in_labels=tuple(ineq.labels),
    )


def soften(
    problem: MIQProblem, weight: float, exempt: Sequence[str] = (INPUT,)
) -> MIQProblem:
    """Give every non-exempt inequality row its own slack ``s_i >= 0`` costing ``weight·s_i²``.

    Equality rows stay hard. Rows already labelled as slack bounds are never softened.
    """
    labels = problem.in_labels or ("",) * problem.A_in.shape[0]
    skip = set(exempt) | {SLACK}
    soft = [i for i, label in enumerate(labels) if label not in skip]
    ns = len(soft)
    if ns == 0:
        return problem
    n, m = problem.n_z, problem.A_in.shape[0]

    picks = sp.csr_matrix((-np.ones(ns), (soft, np.arange(ns))), shape=(m, ns))
    bounds = sp.hstack([sp.csr_matrix((ns, n)), -sp.identity(ns, format="csr")])
    A_in = sp.vstack([sp.hstack([problem.A_in, picks]), bounds]).tocsr()
    b_in = np.concatenate([problem.b_in, np.zeros(ns)])
    A_eq = sp.hstack([problem.A_eq, sp.csr_matrix((problem.A_eq.shape[0], ns))]).tocsr()
    H = sp.block_diag([problem.H, 2.0 * weight * sp.identity(ns)], format="csc")

    return MIQProblem(
        H=H,
        f=np.concatenate([problem.f, np.zeros(ns)]),
        A_eq=A_eq,
        b_eq=problem.b_eq,
        A_in=A_in,
        b_in=b_in,
        binaries=problem.binaries,
        constant=problem.constant,
        in_labels=tuple(labels) + (SLACK,) * ns,
    )
