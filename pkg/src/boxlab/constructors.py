"""Named boxes: the GHZ quantum box, the epsilon families, PR, deterministic and noise boxes.

Binary strategies are given as truth tables. A party-1 strategy is a pair
``(f(0), f(1))``. A response of party 2 or 3 that may look at both inputs is
a 4-tuple indexed by ``2*i2 + i3``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .boxes import Box2, Box3, make_box2, make_box3, mix, product_box, swap_23
from .errors import BadDescriptor, BadWeights

_I2 = np.eye(2, dtype=complex)
_PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


@dataclass(frozen=True)
class Observable:
    """Dichotomic qubit observable n.sigma; outcome +1 is bit 0, -1 is bit 1."""

    bloch: tuple[float, float, float]

    def __post_init__(self):
        v = tuple(float(x) for x in self.bloch)
        if len(v) != 3 or abs(math.sqrt(sum(x * x for x in v)) - 1.0) > 1e-12:
            raise BadDescriptor(f"Bloch vector {self.bloch} is not a unit 3-vector")
        object.__setattr__(self, "bloch", v)

    def projector(self, bit: int) -> np.ndarray:
        s = 1.0 if bit == 0 else -1.0
        n_sigma = sum(c * p for c, p in zip(self.bloch, _PAULI))
        return (_I2 + s * n_sigma) / 2


SIGMA_Z = Observable((0.0, 0.0, 1.0))
SIGMA_X = Observable((1.0, 0.0, 0.0))
ZX_PLUS = Observable((1 / math.sqrt(2), 0.0, 1 / math.sqrt(2)))
ZX_MINUS = Observable((-1 / math.sqrt(2), 0.0, 1 / math.sqrt(2)))

M_ZX = (SIGMA_Z, SIGMA_X)
M_DIAG = (ZX_PLUS, ZX_MINUS)


@dataclass(frozen=True)
class MeasurementAssignment:
    """Observables per party, indexed ``parties[k][input]``."""

    parties: tuple[tuple[Observable, Observable], ...]

    def __post_init__(self):
        ps = tuple(tuple(p) for p in self.parties)
        if len(ps) != 3 or any(len(p) != 2 for p in ps):
            raise BadDescriptor("need two observables for each of three parties")
        if not all(isinstance(o, Observable) for p in ps for o in p):
            raise BadDescriptor("assignment entries must be Observable instances")
        object.__setattr__(self, "parties", ps)


DEFAULT_ASSIGNMENT = MeasurementAssignment((M_ZX, M_ZX, M_DIAG))
SWAPPED_ASSIGNMENT = MeasurementAssignment((M_ZX, M_DIAG, M_ZX))


@dataclass(frozen=True)
class EpsParams:
    eps: float

    def __post_init__(self):
        if not 0.0 <= self.eps <= 1.0:
            raise BadDescriptor(f"eps must lie in [0, 1], got {self.eps}")

    @property
    def k_plus(self) -> float:
        return (1.0 + self.eps) / 4.0

    @property
    def k_minus(self) -> float:
        return (1.0 - self.eps) / 4.0


def _eps(e) -> EpsParams:
    return e if isinstance(e, EpsParams) else EpsParams(float(e))


# -- GHZ ------------------------------------------------------------------


def ghz_box(m: MeasurementAssignment = DEFAULT_ASSIGNMENT) -> Box3:
    """Statistics of projective measurements on (|000> + |111>)/sqrt(2)."""
    psi = np.zeros((2, 2, 2), dtype=complex)
    psi[0, 0, 0] = psi[1, 1, 1] = 1 / math.sqrt(2)
    table = np.empty((8, 8))
    for i1, i2, i3 in itertools.product((0, 1), repeat=3):
        obs = (m.parties[0][i1], m.parties[1][i2], m.parties[2][i3])
        for o1, o2, o3 in itertools.product((0, 1), repeat=3):
            p1, p2, p3 = (ob.projector(o) for ob, o in zip(obs, (o1, o2, o3)))
            phi = np.einsum("ad,be,cf,def->abc", p1, p2, p3, psi)
            table[4 * i1 + 2 * i2 + i3, 4 * o1 + 2 * o2 + o3] = np.vdot(psi, phi).real
    return make_box3(table)


# -- epsilon families -----------------------------------------------------


def _left_table(kp: float, km: float) -> np.ndarray:
    a = [2 * kp, 2 * km, 0, 0, 0, 0, 2 * km, 2 * kp]
    b = [kp, km, kp, km, km, kp, km, kp]
    c = [kp, km, km, kp, kp, km, km, kp]
    return 0.5 * np.array([
        a, a, b, b, c, c,
        [kp, km, km, kp, km, kp, kp, km],
        [km, kp, kp, km, kp, km, km, kp],
    ])


def _right_table(kp: float, km: float) -> np.ndarray:
    a = [2 * kp, 0, 2 * km, 0, 0, 2 * km, 0, 2 * kp]
    b = [kp, kp, km, km, km, km, kp, kp]
    c = [kp, km, km, kp, kp, km, km, kp]
    return 0.5 * np.array([
        a, b, a, b, c,
        [kp, km, km, kp, km, kp, kp, km],
        c,
        [km, kp, kp, km, kp, km, km, kp],
    ])


def p_eps_left(e) -> Box3:
    """The family whose one-way decomposition only signals from party 3 to party 2."""
    e = _eps(e)
    return make_box3(_left_table(e.k_plus, e.k_minus))


def p_eps_right(e) -> Box3:
    """Mirror of :func:`p_eps_left` with the roles of parties 2 and 3 exchanged."""
    e = _eps(e)
    return make_box3(_right_table(e.k_plus, e.k_minus))


def p_eps_alpha(e, alpha: float) -> Box3:
    if not 0.0 <= alpha <= 1.0:
        raise BadWeights(f"alpha must lie in [0, 1], got {alpha}")
    return mix([p_eps_left(e), p_eps_right(e)], [alpha, 1.0 - alpha])


# -- strategies and extremal boxes ----------------------------------------


def _table(bits, n: int, what: str) -> tuple[int, ...]:
    t = tuple(int(x) for x in bits)
    if len(t) != n or any(x not in (0, 1) for x in t):
        raise BadDescriptor(f"{what} must be {n} bits, got {bits!r}")
    return t


def det_box1(f) -> np.ndarray:
    """Party-1 table p(o1|i1) for the deterministic response o1 = f[i1]."""
    f = _table(f, 2, "party-1 strategy")
    t = np.zeros((2, 2))
    for i in (0, 1):
        t[i, f[i]] = 1.0
    return t


def det_box2_twoway(f, g) -> Box2:
    """o2 = f[2*i2 + i3], o3 = g[2*i2 + i3]; may signal in both directions."""
    f = _table(f, 4, "party-2 response")
    g = _table(g, 4, "party-3 response")
    t = np.zeros((4, 4))
    for r in range(4):
        t[r, 2 * f[r] + g[r]] = 1.0
    return make_box2(t)


def det_box2_local(f2, f3) -> Box2:
    """o2 = f2[i2], o3 = f3[i3]."""
    f2 = _table(f2, 2, "party-2 strategy")
    f3 = _table(f3, 2, "party-3 strategy")
    return det_box2_twoway(
        [f2[r >> 1] for r in range(4)], [f3[r & 1] for r in range(4)]
    )


def det_box2_oneway(direction: str, first, second) -> Box2:
    """Deterministic box with signaling allowed in one direction only.

    ``direction="2->3"``: o2 = first[i2], o3 = second[2*i2 + i3].
    ``direction="3->2"``: o3 = first[i3], o2 = second[2*i2 + i3].
    """
    first = _table(first, 2, "first-mover strategy")
    second = _table(second, 4, "second-mover response")
    if direction == "2->3":
        return det_box2_twoway([first[r >> 1] for r in range(4)], second)
    if direction == "3->2":
        return det_box2_twoway(second, [first[r & 1] for r in range(4)])
    raise BadDescriptor(f"direction must be '2->3' or '3->2', got {direction!r}")


def pr_box(variant=(0, 0, 0)) -> Box2:
    """PR box: o XOR o' = i*i' XOR a*i XOR b*i' XOR g, uniformly."""
    a, b, g = _table(variant, 3, "PR variant")
    t = np.zeros((4, 4))
    for i, ip, o in itertools.product((0, 1), repeat=3):
        op = o ^ (i & ip) ^ (a & i) ^ (b & ip) ^ g
        t[2 * i + ip, 2 * o + op] = 0.5
    return make_box2(t)


def noise_box() -> Box3:
    return make_box3(np.full((8, 8), 1 / 8))


def noise_box2() -> Box2:
    return make_box2(np.full((4, 4), 1 / 4))


def det_box3(p1, f, g) -> Box3:
    """Deterministic box o1 = p1[i1], o2 = f[2*i2+i3], o3 = g[2*i2+i3]."""
    return product_box(det_box1(p1), det_box2_twoway(f, g))


def det_box3_from_rule(rule: Callable[[int, int, int], Sequence[int]]) -> Box3:
    """Deterministic box whose outputs are ``rule(i1, i2, i3)``; may signal arbitrarily."""
    t = np.zeros((8, 8))
    for i1, i2, i3 in itertools.product((0, 1), repeat=3):
        o1, o2, o3 = (int(x) for x in rule(i1, i2, i3))
        t[4 * i1 + 2 * i2 + i3, 4 * o1 + 2 * o2 + o3] = 1.0
    return make_box3(t)


# -- explicit one-way decompositions --------------------------------------

# (party-1 strategy, o2 response over 2*i2+i3, o3 leans to 0) for four terms
# of weight 1/4; inside a term o3 ignores both inputs.
_LEFT_TERMS = (
    ((0, 0), (0, 0, 0, 1), True),
    ((0, 1), (0, 0, 1, 0), True),
    ((1, 0), (1, 1, 1, 0), False),
    ((1, 1), (1, 1, 0, 1), False),
)


def p_eps_left_decomposition(e) -> list[tuple[float, tuple, tuple, tuple]]:
    """Weights over deterministic 3->2 one-way strategies reproducing p_eps_left.

    Returns ``(weight, party1, o2_table, o3_table)`` entries; each table
    feeds :func:`det_box3`. Weights are k+/2 or k-/2.
    """
    e = _eps(e)
    out = []
    for p1, o2, biased_zero in _LEFT_TERMS:
        w0, w1 = (e.k_plus, e.k_minus) if biased_zero else (e.k_minus, e.k_plus)
        out.append((w0 / 2, p1, o2, (0, 0, 0, 0)))
        out.append((w1 / 2, p1, o2, (1, 1, 1, 1)))
    return out


def p_eps_right_decomposition(e) -> list[tuple[float, tuple, tuple, tuple]]:
    """Mirror of :func:`p_eps_left_decomposition` for 2->3 one-way strategies."""
    out = []
    for w, p1, o2, o3 in p_eps_left_decomposition(e):
        # exchanging parties 2 and 3 transposes the (i2, i3) index
        swap = (0, 2, 1, 3)
        out.append((w, p1, tuple(o3[swap[r]] for r in range(4)), tuple(o2[swap[r]] for r in range(4))))
    return out


def box_from_terms(terms) -> Box3:
    return mix([det_box3(p1, f, g) for _, p1, f, g in terms], [w for w, *_ in terms])


def pr_product(party1=(0, 0), variant=(0, 0, 0)) -> Box3:
    """Deterministic party 1 alongside a PR box shared by parties 2 and 3."""
    return product_box(det_box1(party1), pr_box(variant))


__all__ = [
    "Observable", "MeasurementAssignment", "EpsParams",
    "SIGMA_Z", "SIGMA_X", "ZX_PLUS", "ZX_MINUS", "M_ZX", "M_DIAG",
    "DEFAULT_ASSIGNMENT", "SWAPPED_ASSIGNMENT",
    "ghz_box", "p_eps_left", "p_eps_right", "p_eps_alpha",
    "det_box1", "det_box2_local", "det_box2_oneway", "det_box2_twoway",
    "det_box3", "det_box3_from_rule", "pr_box", "pr_product", "noise_box", "noise_box2",
    "p_eps_left_decomposition", "p_eps_right_decomposition", "box_from_terms",
    "swap_23",
]
