"""Certified convex-hull membership by phase-one simplex.

A target point is inside the hull of the columns of a vertex matrix when
``V w = target, sum(w) = 1, w >= 0`` is feasible. Every answer carries a
certificate: the weights when feasible, otherwise a separating functional
``y`` with ``y . target > max_j y . V_j`` read off the phase-one duals
(Farkas' lemma). Certificates are re-checked before a result is returned.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .errors import NumericalFailure

FEAS_TOL = 1e-9
PIVOT_TOL = 1e-10
# degenerate pivots in a row before pricing falls back to Bland's rule
STALL_LIMIT = 30
MAX_ITER = 50_000


class Verdict(str, enum.Enum):
    IN = "In"
    OUT = "Out"

    def __str__(self):
        return self.value


@dataclass(frozen=True, eq=False)
class FeasibilityProblem:
    """Is ``target`` a convex combination of the columns of ``vertex_matrix``?"""

    vertex_matrix: np.ndarray
    target: np.ndarray
    tol: float = FEAS_TOL

    def __post_init__(self):
        v = np.array(self.vertex_matrix, dtype=float)
        t = np.array(self.target, dtype=float).ravel()
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise ValueError(f"vertex matrix must be a non-empty 2-D array, got shape {v.shape}")
        if t.shape[0] != v.shape[0]:
            raise ValueError(f"target has length {t.shape[0]}, vertices have dimension {v.shape[0]}")
        v.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "vertex_matrix", v)
        object.__setattr__(self, "target", t)

    @property
    def n_vertices(self) -> int:
        return self.vertex_matrix.shape[1]


@dataclass(frozen=True, eq=False)
class MembershipResult:
    verdict: Verdict
    weights: np.ndarray | None = None
    witness: np.ndarray | None = None
    offset: float | None = None
    residual: float | None = None
    margin: float | None = None
    iterations: int = 0
    parts: dict = field(default_factory=dict)
    note: str = ""

    @property
    def is_in(self) -> bool:
        return self.verdict is Verdict.IN

    def support(self, atol: float = 0.0) -> np.ndarray:
        if self.weights is None:
            return np.array([], dtype=int)
        return np.flatnonzero(self.weights > atol)

    def to_dict(self) -> dict:
        d = {"verdict": str(self.verdict)}
        if self.weights is not None:
            idx = self.support()
            d["weights"] = {int(i): float(self.weights[i]) for i in idx}
            d["residual"] = self.residual
        if self.witness is not None:
            d["witness"] = [float(x) for x in self.witness]
            d["offset"] = self.offset
            d["margin"] = self.margin
        if self.parts:
            d["parts"] = {k: v.to_dict() for k, v in self.parts.items()}
        if self.note:
            d["note"] = self.note
        return d


# -- phase one --------------------------------------------------------------


@dataclass
class PhaseOne:
    basis: np.ndarray
    x: np.ndarray
    dual: np.ndarray
    objective: float
    iterations: int
    n_structural: int

    def primal(self) -> np.ndarray:
        w = np.zeros(self.n_structural)
        mask = self.basis < self.n_structural
        w[self.basis[mask]] = self.x[mask]
        return w


def phase_one(A: np.ndarray, b: np.ndarray, pivot_tol: float = PIVOT_TOL,
              max_iter: int = MAX_ITER) -> PhaseOne:
    """Minimise the sum of artificials for ``A x = b, x >= 0``.

    Revised simplex with a fresh LU of the basis each iteration. Entering
    columns use Dantzig pricing; after ``STALL_LIMIT`` consecutive degenerate
    pivots both entering and leaving choices follow Bland's rule until the
    objective moves again, which rules out cycling. The returned dual is in
    the original row signs.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    sign = np.where(b < 0, -1.0, 1.0)
    A = A * sign[:, None]
    b = b * sign
    full = np.hstack([A, np.eye(m)])
    cost = np.concatenate([np.zeros(n), np.ones(m)])
    basis = np.arange(n, n + m)
    stall = 0
    for it in range(max_iter):
        lu = lu_factor(full[:, basis], check_finite=False)
        x = lu_solve(lu, b, check_finite=False)
        u = lu_solve(lu, cost[basis], trans=1, check_finite=False)
        reduced = -(u @ A)
        reduced[basis[basis < n]] = 0.0
        cand = np.flatnonzero(reduced < -pivot_tol)
        if cand.size == 0:
            break
        bland = stall >= STALL_LIMIT
        q = cand[0] if bland else cand[np.argmin(reduced[cand])]
        d = lu_solve(lu, A[:, q], check_finite=False)
        rows = np.flatnonzero(d > pivot_tol)
        if rows.size == 0:
            raise NumericalFailure("phase-one direction is unbounded")
        ratios = np.maximum(x[rows], 0.0) / d[rows]
        theta = ratios.min()
        ties = rows[ratios <= theta + 1e-12]
        if bland:
            leave = ties[np.argmin(basis[ties])]
        else:
            # drive artificials out first, then take the steadiest pivot
            art = ties[basis[ties] >= n]
            pool = art if art.size else ties
            leave = pool[np.argmax(d[pool])]
        stall = stall + 1 if theta <= 1e-14 else 0
        basis[leave] = q
    else:
        raise NumericalFailure(f"phase one did not converge in {max_iter} iterations")
    return PhaseOne(basis=basis, x=x, dual=u * sign, objective=float(cost[basis] @ x),
                    iterations=it, n_structural=n)


# -- certificate checks -----------------------------------------------------
# These only use the problem data, never solver state.


def _stack(problems: Sequence[FeasibilityProblem]):
    V = np.vstack([p.vertex_matrix for p in problems])
    t = np.concatenate([p.target for p in problems])
    return V, t


def weight_residual(problems: Sequence[FeasibilityProblem], w: np.ndarray) -> float:
    """Largest violation among reconstruction, normalization and sign constraints."""
    V, t = _stack(problems)
    w = np.asarray(w, dtype=float)
    return float(max(np.abs(V @ w - t).max(), abs(w.sum() - 1.0), max(0.0, -w.min())))


def witness_margin(problems: Sequence[FeasibilityProblem], y: np.ndarray) -> float:
    """``y . target - max_j y . V_j``; positive means ``y`` separates."""
    V, t = _stack(problems)
    y = np.asarray(y, dtype=float)
    return float(y @ t - (y @ V).max())


def certificate_holds(problems, result: MembershipResult, tol: float | None = None) -> bool:
    if isinstance(problems, FeasibilityProblem):
        problems = [problems]
    tol = min(p.tol for p in problems) if tol is None else tol
    if result.is_in:
        return result.weights is not None and weight_residual(problems, result.weights) <= tol
    return result.witness is not None and witness_margin(problems, result.witness) > tol / 2


# -- solvers ----------------------------------------------------------------


def _certify(problems, sol: PhaseOne, tol: float) -> MembershipResult:
    V, t = _stack(problems)
    w = np.clip(sol.primal(), 0.0, None)
    res = weight_residual(problems, w)
    if res <= tol:
        return MembershipResult(Verdict.IN, weights=w, residual=res, iterations=sol.iterations)
    y = sol.dual[: V.shape[0]].copy()
    scale = np.abs(y).max()
    if scale > 0:
        y /= scale
        margin = witness_margin(problems, y)
        if margin > tol / 2:
            return MembershipResult(
                Verdict.OUT, witness=y, offset=float((y @ V).max()), margin=margin,
                iterations=sol.iterations,
            )
    raise NumericalFailure(
        f"neither certificate verifies (phase-one objective {sol.objective:.3e}, "
        f"weight residual {res:.3e})"
    )


def solve_joint_feasibility(problems: Sequence[FeasibilityProblem]) -> MembershipResult:
    """One weight vector must satisfy every problem's equality system at once.

    The witness of an Out verdict is the concatenation of one functional per
    problem; it separates the stacked target from every stacked column.
    """
    problems = list(problems)
    if not problems:
        raise ValueError("need at least one problem")
    n = problems[0].n_vertices
    if any(p.n_vertices != n for p in problems):
        raise ValueError("joint problems must share the column count")
    tol = min(p.tol for p in problems)
    V, t = _stack(problems)
    A = np.vstack([V, np.ones((1, n))])
    b = np.concatenate([t, [1.0]])
    return _certify(problems, phase_one(A, b), tol)


def solve_feasibility(prob: FeasibilityProblem) -> MembershipResult:
    return solve_joint_feasibility([prob])
