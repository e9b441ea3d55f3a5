"""Deterministic wirings that merge parties 2 and 3 into one lab.

The result is a bipartite box across the 1|23 cut: rows ``2*i1 + j`` where
``j`` is the lab's input, columns ``2*o1 + o`` where ``o`` is the lab's output.
Wiring a signaling box can yield an unnormalized table, which is rejected by
Box2 validation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .boxes import Box2, Box3, make_box2
from .errors import BadDescriptor

IDENTITY = (0, 1)
NEGATION = (1, 0)


@dataclass(frozen=True)
class WiringSpec:
    """One-step wiring inside the {2, 3} lab.

    The lab input ``j`` goes to the first mover as ``input_map[j]``; the first
    mover's output ``o`` becomes the second mover's input ``relay_map[o]``.
    ``output_select`` ("first" or "second") names whose output leaves the lab;
    the other output is summed out.
    """

    first_mover: int = 2
    input_map: tuple[int, int] = IDENTITY
    relay_map: tuple[int, int] = IDENTITY
    output_select: str = "second"

    def __post_init__(self):
        if self.first_mover not in (2, 3):
            raise BadDescriptor(f"first_mover must be 2 or 3, got {self.first_mover}")
        for name in ("input_map", "relay_map"):
            m = tuple(getattr(self, name))
            if len(m) != 2 or any(x not in (0, 1) for x in m):
                raise BadDescriptor(f"{name} must map {{0,1}} to {{0,1}}, got {m}")
            object.__setattr__(self, name, m)
        if self.output_select not in ("first", "second"):
            raise BadDescriptor("output_select must be 'first' or 'second'")


PROTOCOL_2TO3 = WiringSpec(first_mover=2)
PROTOCOL_3TO2 = WiringSpec(first_mover=3)


def wire_2to3(b: Box3) -> Box2:
    """Party 2 takes the lab input, party 3 takes i3 = o2, o3 leaves the lab."""
    q = np.einsum("ajbcbd->ajcd", b.tensor)
    return make_box2(q.reshape(4, 4))


def wire_3to2(b: Box3) -> Box2:
    """Party 3 takes the lab input, party 2 takes i2 = o3, o2 leaves the lab."""
    q = np.einsum("abjcdb->ajcd", b.tensor)
    return make_box2(q.reshape(4, 4))


def wire_general(b: Box3, w: WiringSpec) -> Box2:
    t = b.tensor
    q = np.zeros((2, 2, 2, 2))
    for i1, j, o1, o_first, o_second in itertools.product((0, 1), repeat=5):
        x_first = w.input_map[j]
        x_second = w.relay_map[o_first]
        if w.first_mover == 2:
            p = t[i1, x_first, x_second, o1, o_first, o_second]
        else:
            p = t[i1, x_second, x_first, o1, o_second, o_first]
        out = o_second if w.output_select == "second" else o_first
        q[i1, j, o1, out] += p
    return make_box2(q.reshape(4, 4))


PROTOCOLS = {"2to3": wire_2to3, "3to2": wire_3to2}
