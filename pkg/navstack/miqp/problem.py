"""Problem containers for convex QPs and mixed-integer QPs.

Objective convention everywhere: ``j(z) = ½ zᵀHz + fᵀz + constant``.
Inequalities read ``A_in z <= b_in``; equalities ``A_eq z = b_eq``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigvalsh

from navstack.errors import DimensionMismatchError, NonConvexProblemError

_ZERO_ROW_TOL = 1e-10
_PSD_TOL = 1e-9


def _as_csr(a: Any, n_cols: int, name: str) -> sp.csr_matrix:
    if a is None:
        return sp.csr_matrix((0, n_cols))
    m = sp.csr_matrix(a, dtype=float)
    if m.shape[1] != n_cols:
        if m.nnz == 0 and 0 in m.shape:
            return sp.csr_matrix((0, n_cols))
        raise DimensionMismatchError(f"{name} has {m.shape[1]} columns, expected {n_cols}")
    return m


def _as_vector(b: Any, length: int, name: str) -> np.ndarray:
    v = np.zeros(0) if b is None else np.asarray(b, dtype=float).reshape(-1)
    if v.shape != (length,):
        raise DimensionMismatchError(f"{name} has length {v.shape[0]}, expected {length}")
    return v


def ensure_convex(H: sp.spmatrix) -> None:
    """Raise NonConvexProblemError unless ``H`` is symmetric positive semidefinite."""
    H = sp.csr_matrix(H)
    if H.shape[0] == 0:
        return
    scale = max(1.0, float(abs(H).max()))
    if H.nnz and abs(H - H.T).max() > _PSD_TOL * scale:
        raise NonConvexProblemError("quadratic cost matrix is not symmetric")
    offdiag = H - sp.diags(H.diagonal())
    if offdiag.nnz == 0 or abs(offdiag).max() == 0.0:
        smallest = float(H.diagonal().min())
    else:
        smallest = float(eigvalsh(H.toarray())[0])
    if smallest < -_PSD_TOL * scale:
        raise NonConvexProblemError(
            f"quadratic cost matrix is not PSD (smallest eigenvalue {smallest:.3e})"
        )


@dataclass(frozen=True, eq=False)
class QuadraticProgram:
    """A convex QP in the solver's standard form."""

    H: sp.csc_matrix
    f: np.ndarray
    A_eq: sp.csr_matrix
    b_eq: np.ndarray
    A_in: sp.csr_matrix
    b_in: np.ndarray
    constant: float = 0.0
    # Set when substitution produced a contradictory constant row.
    known_infeasible: bool = False

    def __post_init__(self) -> None:
        f = np.asarray(self.f, dtype=float).reshape(-1)
        n = f.shape[0]
        H = sp.csc_matrix(self.H, dtype=float) if self.H is not None else sp.csc_matrix((n, n))
        if H.shape != (n, n):
            raise DimensionMismatchError(f"H has shape {H.shape}, expected ({n}, {n})")
        A_eq = _as_csr(self.A_eq, n, "A_eq")
        A_in = _as_csr(self.A_in, n, "A_in")
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "A_eq", A_eq)
        object.__setattr__(self, "A_in", A_in)
        object.__setattr__(self, "b_eq", _as_vector(self.b_eq, A_eq.shape[0], "b_eq"))
        object.__setattr__(self, "b_in", _as_vector(self.b_in, A_in.shape[0], "b_in"))

    @property
    def n(self) -> int:
        return int(self.f.shape[0])

    def objective(self, z: np.ndarray) -> float:
        z = np.asarray(z, dtype=float)
        return float(0.5 * z @ (self.H @ z) + self.f @ z + self.constant)

    def primal_violation(self, z: np.ndarray) -> float:
        """Largest equality or inequality violation at ``z`` (0 when feasible)."""
        z = np.asarray(z, dtype=float)
        eq = np.abs(self.A_eq @ z - self.b_eq)
        ineq = np.maximum(self.A_in @ z - self.b_in, 0.0)
        return float(max(np.max(eq, initial=0.0), np.max(ineq, initial=0.0)))


@dataclass(frozen=True, eq=False)
class Restriction:
    """A QP over the free variables of an MIQP plus the map back to the full vector."""

    qp: QuadraticProgram
    free: np.ndarray
    fixed: np.ndarray
    fixed_values: np.ndarray

    def lift(self, z_free: np.ndarray) -> np.ndarray:
        z = np.empty(self.free.size + self.fixed.size)
        z[self.free] = z_free
        z[self.fixed] = self.fixed_values
        return z


@dataclass(frozen=True, eq=False)
class MIQProblem:
    """Convex QP data plus a set of variables restricted to {0, 1}.

    ``in_labels`` names every inequality row (used by ``mpc.soften`` to tell
    input rows from the rest); it is empty or has one entry per row.
    """

    H: sp.csc_matrix
    f: np.ndarray
    A_eq: sp.csr_matrix
    b_eq: np.ndarray
    A_in: sp.csr_matrix
    b_in: np.ndarray
    binaries: tuple[int, ...] = ()
    constant: float = 0.0
    in_labels: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        base = QuadraticProgram(self.H, self.f, self.A_eq, self.b_eq, self.A_in, self.b_in)
        for name in ("H", "f", "A_eq", "b_eq", "A_in", "b_in"):
            object.__setattr__(self, name, getattr(base, name))
        binaries = tuple(sorted({int(i) for i in self.binaries}))
        if binaries and (binaries[0] < 0 or binaries[-1] >= base.n):
            raise DimensionMismatchError(f"binary indices must lie in [0, {base.n})")
        object.__setattr__(self, "binaries", binaries)
        labels = tuple(self.in_labels)
        if labels and len(labels) != self.A_in.shape[0]:
            raise DimensionMismatchError(
                f"{len(labels)} inequality labels for {self.A_in.shape[0]} rows"
            )
        object.__setattr__(self, "in_labels", labels)

    @property
    def n_z(self) -> int:
        return int(self.f.shape[0])

    def objective(self, z: np.ndarray) -> float:
        z = np.asarray(z, dtype=float)
        return float(0.5 * z @ (self.H @ z) + self.f @ z + self.constant)

    def check_convex(self) -> None:
        ensure_convex(self.H)

    # ------------------------------------------------------------------
    # Relaxations
    # ------------------------------------------------------------------

    def restrict(self, fixings: Mapping[int, int]) -> Restriction:
        """Substitute fixed binaries and relax the remaining ones to [0, 1]."""
        n = self.n_z
        fixed = np.array(sorted(fixings), dtype=int)
        values = np.array([float(fixings[i]) for i in fixed])
        mask = np.ones(n, dtype=bool)
        mask[fixed] = False
        free = np.flatnonzero(mask)

        H = self.H.tocsc()
        H_ff = H[free][:, free]
        H_fx = H[free][:, fixed]
        f = self.f[free] + H_fx @ values
        constant = (
            self.constant
            + float(self.f[fixed] @ values)
            + 0.5 * float(values @ (H[fixed][:, fixed] @ values))
        )

        A_eq = self.A_eq.tocsc()
        b_eq = self.b_eq - A_eq[:, fixed] @ values
        A_eq = A_eq[:, free].tocsr()
        A_in = self.A_in.tocsc()
        b_in = self.b_in - A_in[:, fixed] @ values
        A_in = A_in[:, free].tocsr()

        infeasible = False
        eq_empty = np.diff(A_eq.indptr) == 0
        if np.any(np.abs(b_eq[eq_empty]) > _ZERO_ROW_TOL):
            infeasible = True
        in_empty = np.diff(A_in.indptr) == 0
        if np.any(b_in[in_empty] < -_ZERO_ROW_TOL):
            infeasible = True
        A_eq, b_eq = A_eq[~eq_empty], b_eq[~eq_empty]
        A_in, b_in = A_in[~in_empty], b_in[~in_empty]

        # [0, 1] rows for binaries left free.
        position = {int(v): k for k, v in enumerate(free)}
        open_bins = [position[i] for i in self.binaries if i in position]
        if open_bins:
            m = len(open_bins)
            rows = np.arange(2 * m)
            cols = np.concatenate([open_bins, open_bins])
            data = np.concatenate([np.ones(m), -np.ones(m)])
            bounds = sp.csr_matrix((data, (rows, cols)), shape=(2 * m, free.size))
            A_in = sp.vstack([A_in, bounds]).tocsr()
            b_in = np.concatenate([b_in, np.ones(m), np.zeros(m)])

        qp = QuadraticProgram(
            H_ff, f, A_eq, b_eq, A_in, b_in, constant=constant, known_infeasible=infeasible
        )
        return Restriction(qp=qp, free=free, fixed=fixed, fixed_values=values)

    def relax(self) -> Restriction:
        return self.restrict({})

    # ------------------------------------------------------------------
    # Serialization
    # ------------------------------------------------------------------

    def to_record(self) -> dict[str, Any]:
        """JSON-compatible dict (sparse matrices as COO triplets)."""

        def coo(m: sp.spmatrix) -> dict[str, Any]:
            c = sp.coo_matrix(m)
            return {
                "shape": list(c.shape),
                "row": c.row.tolist(),
                "col": c.col.tolist(),
                "data": c.data.tolist(),
            }

        return {
            "n_z": self.n_z,
            "H": coo(self.H),
            "f": self.f.tolist(),
            "constant": self.constant,
            "A_eq": coo(self.A_eq),
            "b_eq": self.b_eq.tolist(),
            "A_in": coo(self.A_in),
            "b_in": self.b_in.tolist(),
            "binaries": list(self.binaries),
            "in_labels": list(self.in_labels),
        }

    @classmethod
    def from_record(cls, record: Mapping[str, Any]) -> MIQProblem:
        def matrix(d: Mapping[str, Any]) -> sp.csr_matrix:
            return sp.csr_matrix(
                (d["data"], (d["row"], d["col"])), shape=tuple(d["shape"]), dtype=float
            )

        try:
            return cls(
                H=matrix(record["H"]),
                f=np.asarray(record["f"], dtype=float),
                A_eq=matrix(record["A_eq"]),
                b_eq=np.asarray(record["b_eq"], dtype=float),
                A_in=matrix(record["A_in"]),
                b_in=np.asarray(record["b_in"], dtype=float),
                binaries=tuple(record.get("binaries", ())),
                constant=float(record.get("constant", 0.0)),
                in_labels=tuple(record.get("in_labels", ())),
            )
        except KeyError as exc:
            raise DimensionMismatchError(f"problem record is missing field {exc}") from exc


def dense_problem(
    H: Sequence[Sequence[float]] | np.ndarray,
    f: Sequence[float] | np.ndarray,
    A_eq: np.ndarray | None = None,
    b_eq: np.ndarray | None = None,
    A_in: np.ndarray | None = None,
    b_in: np.ndarray | None = None,
    binaries: Sequence[int] = (),
    constant: float = 0.0,
) -> MIQProblem:
    """Convenience constructor from dense arrays (fixtures, CLI)."""
    f = np.asarray(f, dtype=float).reshape(-1)
    n = f.size
    return MIQProblem(
        H=sp.csc_matrix(np.asarray(H, dtype=float).reshape(n, n)),
        f=f,
        A_eq=None if A_eq is None else sp.csr_matrix(np.asarray(A_eq, dtype=float).reshape(-1, n)),
        b_eq=b_eq,
        A_in=None if A_in is None else sp.csr_matrix(np.asarray(A_in, dtype=float).reshape(-1, n)),
        b_in=b_in,
        binaries=tuple(binaries),
        constant=constant,
    )
