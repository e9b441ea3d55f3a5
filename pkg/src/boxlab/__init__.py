"""Tripartite no-signaling boxes, wirings, CHSH values and bilocality classes."""

from .boxes import (
    Box2,
    Box3,
    NsReport,
    deserialize,
    load_box,
    make_box2,
    make_box3,
    mix,
    no_signaling_check,
    product_box,
    save_box,
    serialize,
)
from .classify import HierarchyClass, classify_full, membership, tobl_membership
from .lp import FeasibilityProblem, MembershipResult, Verdict, solve_feasibility

__version__ = "0.1.0"

__all__ = [
    "Box2", "Box3", "NsReport", "deserialize", "load_box", "make_box2", "make_box3", "mix",
    "no_signaling_check", "product_box", "save_box", "serialize",
    "HierarchyClass", "classify_full", "membership", "tobl_membership",
    "FeasibilityProblem", "MembershipResult", "Verdict", "solve_feasibility",
]
