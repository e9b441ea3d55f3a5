"""Probability tables for two- and three-party boxes with binary inputs and outputs.

A box stores p(outputs | inputs) as a square matrix. Rows index the joint
input and columns the joint output, both in dictionary order, so for three
parties ``row = 4*i1 + 2*i2 + i3`` and ``col = 4*o1 + 2*o2 + o3``. Reshaping
the matrix to ``(2,) * 2n`` gives a tensor indexed ``[i1, .., in, o1, .., on]``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path
from typing import ClassVar, Sequence

import numpy as np

from .errors import (
    BadWeights,
    NegativeProbability,
    NotNormalized,
    ParseError,
    ShapeMismatch,
)

CLAMP_TOL = 1e-12
NORM_TOL = 1e-9
WEIGHT_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Box:
    probs: np.ndarray

    n_parties: ClassVar[int] = 0

    def __post_init__(self):
        arr = np.array(self.probs, dtype=float)
        size = 2**self.n_parties
        if arr.shape != (size, size):
            raise ShapeMismatch(
                f"{type(self).__name__} needs a {size}x{size} table, got shape {arr.shape}"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "probs", arr)

    @property
    def tensor(self) -> np.ndarray:
        """View indexed ``[i1, .., in, o1, .., on]``."""
        return self.probs.reshape((2,) * (2 * self.n_parties))

    @property
    def flat(self) -> np.ndarray:
        return self.probs.ravel()

    def p(self, outputs: Sequence[int], inputs: Sequence[int]) -> float:
        return float(self.tensor[tuple(inputs) + tuple(outputs)])

    def allclose(self, other: "Box", atol: float = 1e-12) -> bool:
        return type(self) is type(other) and bool(
            np.allclose(self.probs, other.probs, rtol=0.0, atol=atol)
        )

    def __repr__(self):
        return f"{type(self).__name__}(\n{np.array2string(self.probs, precision=6)})"


class Box3(Box):
    """Tripartite box p(o1 o2 o3 | i1 i2 i3) as an 8x8 matrix."""

    n_parties = 3


class Box2(Box):
    """Bipartite box p(o o' | i i') as a 4x4 matrix."""

    n_parties = 2


def _validated(cls, rows, tol: float):
    arr = np.array(rows, dtype=float)
    size = 2**cls.n_parties
    if arr.shape != (size, size):
        raise ShapeMismatch(f"expected a {size}x{size} table, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NegativeProbability("table contains non-finite entries")
    if arr.min() < -tol:
        r, c = np.unravel_index(np.argmin(arr), arr.shape)
        raise NegativeProbability(f"entry ({r}, {c}) = {arr[r, c]:.3e} is below -{tol:g}")
    arr = np.where(arr < 0.0, 0.0, arr)
    sums = arr.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > max(tol, NORM_TOL))
    if bad.size:
        raise NotNormalized(f"row {bad[0]} sums to {sums[bad[0]]!r}")
    return cls(arr)


def make_box3(rows, tol: float = CLAMP_TOL) -> Box3:
    """Validate an 8x8 table and return it as a Box3.

    Entries in ``[-tol, 0)`` are clamped to zero; rows must sum to one
    within ``max(tol, 1e-9)``.
    """
    return _validated(Box3, rows, tol)


def make_box2(rows, tol: float = CLAMP_TOL) -> Box2:
    return _validated(Box2, rows, tol)


def make_box(rows, tol: float = CLAMP_TOL) -> Box:
    """Dispatch on table size: 8x8 gives a Box3, 4x4 a Box2."""
    arr = np.asarray(rows, dtype=float)
    if arr.shape == (8, 8):
        return make_box3(arr, tol)
    if arr.shape == (4, 4):
        return make_box2(arr, tol)
    raise ShapeMismatch(f"no box type has shape {arr.shape}")


# -- no-signaling ---------------------------------------------------------


@dataclass(frozen=True)
class NsReport:
    is_ns: bool
    max_violation: float
    violating_party: int | None = None
    violating_subset: tuple[int, ...] | None = None


def no_signaling_check(b: Box, tol: float = NORM_TOL) -> NsReport:
    """Check that every group's marginal ignores the other parties' inputs.

    For each non-empty proper subset of parties, sum out the remaining
    parties' outputs and measure how far the marginal moves as the remaining
    parties' inputs vary. Parties are numbered from 1. Ties are resolved in
    favour of smaller subsets.
    """
    n = b.n_parties
    t = b.tensor
    worst, worst_subset = 0.0, None
    for size in range(1, n):
        for kept in itertools.combinations(range(n), size):
            others = [k for k in range(n) if k not in kept]
            marg = t.sum(axis=tuple(n + k for k in others))
            spread = marg.max(axis=tuple(others)) - marg.min(axis=tuple(others))
            v = float(spread.max())
            if v > worst:
                worst, worst_subset = v, tuple(k + 1 for k in kept)
    is_ns = worst <= tol
    return NsReport(
        is_ns=is_ns,
        max_violation=worst,
        violating_party=None if is_ns else worst_subset[0],
        violating_subset=None if is_ns else worst_subset,
    )


# -- combinations ---------------------------------------------------------


def mix(boxes: Sequence[Box], weights: Sequence[float]) -> Box:
    """Convex combination of boxes of one type."""
    if len(boxes) == 0 or len(boxes) != len(weights):
        raise BadWeights(f"{len(boxes)} boxes but {len(weights)} weights")
    kind = type(boxes[0])
    if any(type(b) is not kind for b in boxes):
        raise BadWeights("cannot mix boxes of different types")
    w = np.asarray(weights, dtype=float)
    if np.any(w < -WEIGHT_TOL) or abs(w.sum() - 1.0) > WEIGHT_TOL:
        raise BadWeights(f"weights must be non-negative and sum to 1, got {w.tolist()}")
    w = np.clip(w, 0.0, None)
    probs = np.tensordot(w, np.stack([b.probs for b in boxes]), axes=1)
    return _validated(kind, probs, CLAMP_TOL)


def product_box(party1: np.ndarray, pair: Box2) -> Box3:
    """Box p(o1|i1) q(o2 o3|i2 i3) from a 2x2 party-1 table and a party-2/3 box."""
    p1 = np.asarray(party1, dtype=float)
    if p1.shape != (2, 2):
        raise ShapeMismatch(f"party-1 table must be 2x2, got {p1.shape}")
    return make_box3(np.kron(p1, pair.probs))


def permute_parties(b: Box, order: Sequence[int]) -> Box:
    """Relabel parties so that new party k is old party ``order[k]`` (0-based)."""
    n = b.n_parties
    if sorted(order) != list(range(n)):
        raise ValueError(f"{order} is not a permutation of {n} parties")
    axes = list(order) + [n + k for k in order]
    size = 2**n
    return type(b)(b.tensor.transpose(axes).reshape(size, size))


def swap_23(b: Box3) -> Box3:
    return permute_parties(b, (0, 2, 1))


# -- text format ----------------------------------------------------------


def _fmt(x: float) -> str:
    return f"{x + 0.0:.16e}"


def serialize(b: Box) -> str:
    """Canonical JSON text for a box; numbers carry 17 significant digits."""
    rows = ",\n".join(
        "    [" + ", ".join(_fmt(x) for x in row) + "]" for row in b.probs
    )
    return (
        "{\n"
        f'  "scenario": {{"parties": {b.n_parties}, "inputs": 2, "outputs": 2}},\n'
        '  "ordering": "dictionary",\n'
        '  "probabilities": [\n'
        f"{rows}\n"
        "  ]\n"
        "}\n"
    )


def deserialize(text: str) -> Box:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError("box file must hold a JSON object")
    try:
        scenario = doc["scenario"]
        parties = scenario["parties"]
        ordering = doc["ordering"]
        table = doc["probabilities"]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"missing field {exc}") from exc
    if parties not in (2, 3):
        raise ParseError(f"unsupported party count {parties!r}")
    if scenario.get("inputs", 2) != 2 or scenario.get("outputs", 2) != 2:
        raise ParseError("only binary inputs and outputs are supported")
    if ordering != "dictionary":
        raise ParseError(f"unsupported ordering {ordering!r}")
    size = 2**parties
    if (
        not isinstance(table, list)
        or len(table) != size
        or any(not isinstance(r, list) or len(r) != size for r in table)
    ):
        raise ParseError(f"probabilities must be a {size}x{size} nested array")
    try:
        arr = np.array(table, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"non-numeric probability: {exc}") from exc
    return make_box3(arr) if parties == 3 else make_box2(arr)


def save_box(path, b: Box) -> None:
    Path(path).write_text(serialize(b))


def load_box(path) -> Box:
    return deserialize(Path(path).read_text())
