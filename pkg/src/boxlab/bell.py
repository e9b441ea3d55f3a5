"""CHSH evaluation for bipartite boxes."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .boxes import Box2
from .errors import BadDescriptor

LOCAL_BOUND = 2.0
NS_BOUND = 4.0


@dataclass(frozen=True)
class ChshVariant:
    """Signs applied to E(0,0), E(0,1), E(1,0), E(1,1); an odd number are negative."""

    signs: tuple[int, int, int, int]

    def __post_init__(self):
        s = tuple(int(x) for x in self.signs)
        if len(s) != 4 or any(x not in (1, -1) for x in s):
            raise BadDescriptor(f"CHSH signs must be four entries of +/-1, got {self.signs}")
        if s.count(-1) % 2 != 1:
            raise BadDescriptor(f"CHSH signs need an odd number of -1 entries, got {s}")
        object.__setattr__(self, "signs", s)

    @classmethod
    def parse(cls, text: str) -> "ChshVariant":
        """Read a sign string such as ``"++-+"``."""
        if len(text) != 4 or set(text) - {"+", "-"}:
            raise BadDescriptor(f"variant must be four '+'/'-' characters, got {text!r}")
        return cls(tuple(1 if c == "+" else -1 for c in text))

    def __str__(self):
        return "".join("+" if s > 0 else "-" for s in self.signs)


ALL_VARIANTS = tuple(
    ChshVariant(s) for s in itertools.product((1, -1), repeat=4) if s.count(-1) % 2 == 1
)

# E00 + E01 - E10 + E11. Fixed by matching the closed-form CHSH values of the
# wired epsilon-alpha family on a grid; the same variant serves both wirings.
CANONICAL = ChshVariant((1, 1, -1, 1))

_PARITY = np.array([1.0, -1.0, -1.0, 1.0])


def correlators(b: Box2) -> np.ndarray:
    """2x2 array of E(x, y) = sum (-1)^(o xor o') q(o o'|x y)."""
    return (b.probs @ _PARITY).reshape(2, 2)


def correlator(b: Box2, x: int, y: int) -> float:
    return float(b.probs[2 * x + y] @ _PARITY)


def chsh_value(b: Box2, v: ChshVariant = CANONICAL) -> float:
    return float(np.dot(v.signs, correlators(b).ravel()))


def chsh_max(b: Box2) -> float:
    e = correlators(b).ravel()
    return max(float(np.dot(v.signs, e)) for v in ALL_VARIANTS)


def is_chsh_local(b: Box2, tol: float = 1e-9) -> bool:
    """Locality test for no-signaling 2-input/2-output boxes (all CHSH forms <= 2)."""
    return chsh_max(b) <= LOCAL_BOUND + tol
