"""Vertex enumeration and membership tests for the bilocality hierarchy.

Every class except NS is a polytope whose vertices are products of a
deterministic party-1 strategy with an extremal response of parties 2 and 3:

* FL: both of parties 2 and 3 answer from their own input.
* NSBL: the pair shares a no-signaling extremal box (16 local + 8 PR).
* ATOBL_RIGHT: party 2 answers from i2; party 3 may read i2 (2 -> 3 signaling).
* ATOBL_LEFT: party 3 answers from i3; party 2 may read i3 (3 -> 2 signaling).
* BL: both may read both inputs.

ATOBL_HULL is the hull of the two one-way sets, ATOBL_UNION their union.
TOBL asks for one hidden variable that carries a 2 -> 3 and a 3 -> 2
decomposition at once; its vertices are the triples (party-1 strategy,
2 -> 3 response, 3 -> 2 response) with two equality systems sharing one
weight vector.
"""

from __future__ import annotations

import enum
import functools
import itertools
from dataclasses import dataclass, field

import numpy as np

from . import lp
from .boxes import Box2, Box3, NsReport, no_signaling_check, product_box
from .constructors import det_box1, det_box2_twoway, det_box3, pr_box
from .errors import HierarchyInconsistency, NumericalFailure, UnsupportedClass
from .lp import FeasibilityProblem, MembershipResult, Verdict

DEFAULT_TOL = 1e-9


class HierarchyClass(str, enum.Enum):
    FL = "FL"
    NSBL = "NSBL"
    TOBL = "TOBL"
    ATOBL_LEFT = "ATOBL_LEFT"
    ATOBL_RIGHT = "ATOBL_RIGHT"
    ATOBL_UNION = "ATOBL_UNION"
    ATOBL_HULL = "ATOBL_HULL"
    BL = "BL"
    NS = "NS"

    def __str__(self):
        return self.value


H = HierarchyClass

# (subset, superset) pairs; every other inclusion follows by transitivity
INCLUSIONS = (
    (H.FL, H.NSBL),
    (H.NSBL, H.TOBL),
    (H.TOBL, H.ATOBL_LEFT),
    (H.TOBL, H.ATOBL_RIGHT),
    (H.ATOBL_LEFT, H.ATOBL_UNION),
    (H.ATOBL_RIGHT, H.ATOBL_UNION),
    (H.ATOBL_UNION, H.ATOBL_HULL),
    (H.ATOBL_HULL, H.BL),
    # a TOBL box has no-signaling marginals; the one-way sets need not
    (H.TOBL, H.NS),
)

FINEST_ORDER = (H.FL, H.NSBL, H.TOBL, H.ATOBL_LEFT, H.ATOBL_RIGHT,
                H.ATOBL_UNION, H.ATOBL_HULL, H.BL, H.NS)

_BITS2 = tuple(itertools.product((0, 1), repeat=2))
_BITS4 = tuple(itertools.product((0, 1), repeat=4))


@dataclass(frozen=True)
class VertexLabel:
    """Strategy behind one vertex.

    ``o2``/``o3`` are 4-bit responses indexed by ``2*i2 + i3``; for PR
    vertices ``pr`` holds the variant bits and the responses are None.
    """

    party1: tuple[int, int]
    o2: tuple[int, ...] | None = None
    o3: tuple[int, ...] | None = None
    pr: tuple[int, int, int] | None = None

    def pair_box(self) -> Box2:
        if self.pr is not None:
            return pr_box(self.pr)
        return det_box2_twoway(self.o2, self.o3)

    def __str__(self):
        p1 = "".join(map(str, self.party1))
        if self.pr is not None:
            return f"o1={p1} PR{''.join(map(str, self.pr))}"
        return f"o1={p1} o2={''.join(map(str, self.o2))} o3={''.join(map(str, self.o3))}"


@dataclass(frozen=True, eq=False)
class VertexSet:
    cls: HierarchyClass
    labels: tuple[VertexLabel, ...]
    matrix: np.ndarray  # 64 x n, column j is vertex j flattened

    def __len__(self):
        return len(self.labels)

    @property
    def vertices(self) -> list[Box3]:
        return [Box3(self.matrix[:, j].reshape(8, 8)) for j in range(len(self))]


def _spread_i2(f):
    return tuple(f[r >> 1] for r in range(4))


def _spread_i3(f):
    return tuple(f[r & 1] for r in range(4))


def _right_responses():
    """(o2, o3) response pairs with o2 = f(i2), o3 = g(i2, i3)."""
    return [(_spread_i2(f), g) for f in _BITS2 for g in _BITS4]


def _left_responses():
    """(o2, o3) response pairs with o3 = f(i3), o2 = g(i2, i3)."""
    return [(g, _spread_i3(f)) for f in _BITS2 for g in _BITS4]


def _labels(c: HierarchyClass) -> list[VertexLabel]:
    if c is H.FL:
        pairs = [(_spread_i2(f2), _spread_i3(f3)) for f2 in _BITS2 for f3 in _BITS2]
    elif c is H.ATOBL_RIGHT:
        pairs = _right_responses()
    elif c is H.ATOBL_LEFT:
        pairs = _left_responses()
    elif c is H.BL:
        pairs = [(f, g) for f in _BITS4 for g in _BITS4]
    elif c is H.NSBL:
        local = [(_spread_i2(f2), _spread_i3(f3)) for f2 in _BITS2 for f3 in _BITS2]
        return [VertexLabel(p1, o2, o3) for p1 in _BITS2 for o2, o3 in local] + [
            VertexLabel(p1, pr=v) for p1 in _BITS2 for v in itertools.product((0, 1), repeat=3)
        ]
    else:
        raise UnsupportedClass(f"{c} has no vertex enumeration")
    return [VertexLabel(p1, o2, o3) for p1 in _BITS2 for o2, o3 in pairs]


def _vertex_box(label: VertexLabel) -> Box3:
    if label.pr is not None:
        return product_box(det_box1(label.party1), pr_box(label.pr))
    return det_box3(label.party1, label.o2, label.o3)


@functools.lru_cache(maxsize=None)
def enumerate_vertices(c: HierarchyClass) -> VertexSet:
    c = HierarchyClass(c)
    labels = _labels(c)
    matrix = np.column_stack([_vertex_box(lab).flat for lab in labels])
    matrix.setflags(write=False)
    return VertexSet(c, tuple(labels), matrix)


@functools.lru_cache(maxsize=None)
def hull_vertices() -> VertexSet:
    """Left vertices followed by right vertices (duplicates kept)."""
    left, right = enumerate_vertices(H.ATOBL_LEFT), enumerate_vertices(H.ATOBL_RIGHT)
    matrix = np.hstack([left.matrix, right.matrix])
    matrix.setflags(write=False)
    return VertexSet(H.ATOBL_HULL, left.labels + right.labels, matrix)


@functools.lru_cache(maxsize=None)
def tobl_matrices() -> tuple[np.ndarray, np.ndarray]:
    """Column k = (a, r, l) with k = 4096*a + 64*r + l.

    First matrix holds a (x) right response r, second a (x) left response l.
    """
    right = enumerate_vertices(H.ATOBL_RIGHT).matrix
    left = enumerate_vertices(H.ATOBL_LEFT).matrix
    k = np.arange(4 * 64 * 64)
    a, r, l = k // 4096, (k // 64) % 64, k % 64
    vr = right[:, 64 * a + r]
    vl = left[:, 64 * a + l]
    vr.setflags(write=False)
    vl.setflags(write=False)
    return vr, vl


def tobl_problems(b: Box3, tol: float = DEFAULT_TOL) -> list[FeasibilityProblem]:
    vr, vl = tobl_matrices()
    return [FeasibilityProblem(vr, b.flat, tol), FeasibilityProblem(vl, b.flat, tol)]


def problems_for(b: Box3, c: HierarchyClass, tol: float = DEFAULT_TOL) -> list[FeasibilityProblem]:
    """The LP system whose certificate decides ``c``; UNION and NS have none."""
    c = HierarchyClass(c)
    if c is H.TOBL:
        return tobl_problems(b, tol)
    if c is H.ATOBL_HULL:
        return [FeasibilityProblem(hull_vertices().matrix, b.flat, tol)]
    if c in (H.ATOBL_UNION, H.NS):
        raise UnsupportedClass(f"{c} is not decided by a single LP")
    return [FeasibilityProblem(enumerate_vertices(c).matrix, b.flat, tol)]


# -- TOBL -------------------------------------------------------------------


def _tobl_reduced(b: Box3, tol: float) -> MembershipResult:
    # Marginal form: weights mu over (a, r) and nu over (a, l) with equal
    # party-1 marginals. Any solution lifts to triple weights
    # mu(a, r) nu(a, l) / pi(a); any Farkas vector restricts to a triple
    # witness because the coupling multipliers cancel in mu + nu pairs.
    right = enumerate_vertices(H.ATOBL_RIGHT).matrix
    left = enumerate_vertices(H.ATOBL_LEFT).matrix
    n = right.shape[1]
    block = np.kron(np.eye(4), np.ones((1, 64)))
    A = np.vstack([
        np.hstack([right, np.zeros_like(left)]),
        np.hstack([np.zeros_like(right), left]),
        np.hstack([block, -block]),
        np.hstack([np.ones((1, n)), np.zeros((1, n))]),
    ])
    rhs = np.concatenate([b.flat, b.flat, np.zeros(4), [1.0]])
    sol = lp.phase_one(A, rhs)
    problems = tobl_problems(b, tol)

    x = np.clip(sol.primal(), 0.0, None)
    mu, nu = x[:n].reshape(4, 64), x[n:].reshape(4, 64)
    pi = mu.sum(axis=1)
    w = np.zeros((4, 64, 64))
    for a in range(4):
        if pi[a] > 0:
            w[a] = np.outer(mu[a], nu[a]) / pi[a]
    w = w.ravel()
    res = lp.weight_residual(problems, w)
    if res <= tol:
        return MembershipResult(Verdict.IN, weights=w, residual=res, iterations=sol.iterations)

    y = sol.dual[:128].copy()
    scale = np.abs(y).max()
    if scale > 0:
        y /= scale
        margin = lp.witness_margin(problems, y)
        if margin > tol / 2:
            V = np.vstack([p.vertex_matrix for p in problems])
            return MembershipResult(Verdict.OUT, witness=y, offset=float((y @ V).max()),
                                    margin=margin, iterations=sol.iterations)
    raise NumericalFailure(f"TOBL certificates fail (objective {sol.objective:.3e}, residual {res:.3e})")


def tobl_membership(b: Box3, tol: float = DEFAULT_TOL, method: str = "reduced") -> MembershipResult:
    """Shared-hidden-variable membership; certificates refer to the triple system.

    ``method="triples"`` runs the simplex on all 16,384 triple columns;
    ``"reduced"`` solves the equivalent 512-column marginal problem and lifts
    its certificate. Both return weights over (or a witness for) the triples.
    """
    if method == "triples":
        return lp.solve_joint_feasibility(tobl_problems(b, tol))
    if method == "reduced":
        return _tobl_reduced(b, tol)
    raise ValueError(f"unknown TOBL method {method!r}")


def tobl_from_one_way(b: Box3, one_way: MembershipResult, side: HierarchyClass,
                      tol: float = DEFAULT_TOL) -> MembershipResult:
    """Out certificate for TOBL from an Out certificate of one one-way set.

    A functional separating ``b`` from the right (left) vertices separates it
    from every triple once padded with zeros on the other system.
    """
    if one_way.is_in:
        raise ValueError("need an Out result to derive a TOBL witness")
    zero = np.zeros(64)
    y = np.concatenate([one_way.witness, zero] if side is H.ATOBL_RIGHT else [zero, one_way.witness])
    problems = tobl_problems(b, tol)
    margin = lp.witness_margin(problems, y)
    if margin <= tol / 2:
        raise NumericalFailure("padded one-way witness does not separate the triple system")
    V = np.vstack([p.vertex_matrix for p in problems])
    return MembershipResult(Verdict.OUT, witness=y, offset=float((y @ V).max()), margin=margin,
                            note=f"derived from {side} witness")


# -- membership -------------------------------------------------------------


def _ns_result(b: Box3, tol: float) -> MembershipResult:
    rep = no_signaling_check(b, tol)
    return MembershipResult(Verdict.IN if rep.is_ns else Verdict.OUT,
                            note=f"max marginal discrepancy {rep.max_violation:.3e}")


def _union(left: MembershipResult, right: MembershipResult) -> MembershipResult:
    parts = {str(H.ATOBL_LEFT): left, str(H.ATOBL_RIGHT): right}
    n = len(enumerate_vertices(H.ATOBL_LEFT))
    if left.is_in or right.is_in:
        w = np.zeros(2 * n)
        if left.is_in:
            w[:n], residual = left.weights, left.residual
        else:
            w[n:], residual = right.weights, right.residual
        return MembershipResult(Verdict.IN, weights=w, residual=residual, parts=parts)
    return MembershipResult(Verdict.OUT, parts=parts)


def membership(b: Box3, c: HierarchyClass, tol: float = DEFAULT_TOL) -> MembershipResult:
    c = HierarchyClass(c)
    if c is H.NS:
        return _ns_result(b, tol)
    if c is H.TOBL:
        return tobl_membership(b, tol)
    if c is H.ATOBL_UNION:
        return _union(membership(b, H.ATOBL_LEFT, tol), membership(b, H.ATOBL_RIGHT, tol))
    return lp.solve_feasibility(problems_for(b, c, tol)[0])


def verify_membership(b: Box3, c: HierarchyClass, result: MembershipResult,
                      tol: float = DEFAULT_TOL) -> bool:
    """Re-check a result from the box and vertex data alone."""
    c = HierarchyClass(c)
    if c is H.NS:
        return no_signaling_check(b, tol).is_ns == result.is_in
    if c is H.ATOBL_UNION:
        left = result.parts[str(H.ATOBL_LEFT)]
        right = result.parts[str(H.ATOBL_RIGHT)]
        ok_left = verify_membership(b, H.ATOBL_LEFT, left, tol)
        ok_right = verify_membership(b, H.ATOBL_RIGHT, right, tol)
        if result.is_in:
            n = len(enumerate_vertices(H.ATOBL_LEFT))
            one_sided = not result.weights[:n].any() or not result.weights[n:].any()
            hull_ok = lp.certificate_holds(problems_for(b, H.ATOBL_HULL, tol), result, tol)
            return hull_ok and one_sided and ((left.is_in and ok_left) or (right.is_in and ok_right))
        return not left.is_in and not right.is_in and ok_left and ok_right
    return lp.certificate_holds(problems_for(b, c, tol), result, tol)


# -- full report ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ClassificationReport:
    results: dict[HierarchyClass, MembershipResult]
    finest_class: HierarchyClass | None
    ns_report: NsReport
    open_notes: tuple[str, ...] = field(default_factory=tuple)

    def verdict(self, c: HierarchyClass) -> Verdict:
        return self.results[HierarchyClass(c)].verdict

    def is_in(self, c: HierarchyClass) -> bool:
        return self.results[HierarchyClass(c)].is_in

    def to_dict(self, certificates: bool = True) -> dict:
        return {
            "finest_class": None if self.finest_class is None else str(self.finest_class),
            "verdicts": {str(c): str(r.verdict) for c, r in self.results.items()},
            "no_signaling": {
                "is_ns": self.ns_report.is_ns,
                "max_violation": self.ns_report.max_violation,
                "violating_party": self.ns_report.violating_party,
            },
            "notes": list(self.open_notes),
            **({"certificates": {str(c): r.to_dict() for c, r in self.results.items()}}
               if certificates else {}),
        }

    def format_text(self) -> str:
        lines = [f"finest class: {self.finest_class or 'none (signaling, not bilocal)'}"]
        for c in FINEST_ORDER:
            r = self.results[c]
            extra = ""
            if r.margin is not None:
                extra = f"  witness margin {r.margin:.3e}"
            elif r.residual is not None:
                extra = f"  residual {r.residual:.1e}, support {len(r.support())}"
            lines.append(f"  {str(c):<12} {str(r.verdict):<4}{extra}")
        lines.append(f"  no-signaling max violation {self.ns_report.max_violation:.3e}")
        lines.extend(f"  note: {n}" for n in self.open_notes)
        return "\n".join(lines)


def check_hierarchy(results: dict[HierarchyClass, MembershipResult]) -> None:
    for sub, sup in INCLUSIONS:
        if results[sub].is_in and not results[sup].is_in:
            raise HierarchyInconsistency(f"In for {sub} but Out for its superset {sup}")


def finest_class(results: dict[HierarchyClass, MembershipResult]) -> HierarchyClass | None:
    for c in FINEST_ORDER:
        if results[c].is_in:
            return c
    return None


def classify_full(b: Box3, tol: float = DEFAULT_TOL) -> ClassificationReport:
    """Decide every class, check the inclusions, and name the finest class.

    When either one-way set rejects the box, the TOBL verdict reuses that
    witness (padded) instead of solving the joint system.
    """
    results: dict[HierarchyClass, MembershipResult] = {}
    for c in (H.FL, H.NSBL, H.ATOBL_LEFT, H.ATOBL_RIGHT, H.ATOBL_HULL, H.BL):
        results[c] = membership(b, c, tol)
    left, right = results[H.ATOBL_LEFT], results[H.ATOBL_RIGHT]
    results[H.ATOBL_UNION] = _union(left, right)
    if not right.is_in:
        results[H.TOBL] = tobl_from_one_way(b, right, H.ATOBL_RIGHT, tol)
    elif not left.is_in:
        results[H.TOBL] = tobl_from_one_way(b, left, H.ATOBL_LEFT, tol)
    else:
        results[H.TOBL] = tobl_membership(b, tol)
    ns = no_signaling_check(b, tol)
    results[H.NS] = MembershipResult(Verdict.IN if ns.is_ns else Verdict.OUT,
                                     note=f"max marginal discrepancy {ns.max_violation:.3e}")
    results = {c: results[c] for c in FINEST_ORDER}
    check_hierarchy(results)
    notes = []
    if left.is_in and right.is_in and not results[H.TOBL].is_in:
        notes.append("in both one-way sets but without a shared hidden variable")
    return ClassificationReport(results, finest_class(results), ns, tuple(notes))
