"""Command-line front end.

Exit codes: 0 success or In, 3 Out for the queried class, 2 usage or
validation error, 1 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import astuple, dataclass, fields
from pathlib import Path

import numpy as np

from . import bell, classify, constructors, wiring
from .boxes import Box2, Box3, load_box, save_box
from .classify import HierarchyClass as H
from .errors import BoxlabError, InvalidBox, NumericalFailure, ParseError

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_OUT = 0, 1, 2, 3
TOL_ENV = "BOXLAB_TOL"

SCAN_COLUMNS = {
    "in_fl": H.FL,
    "in_nsbl": H.NSBL,
    "in_tobl": H.TOBL,
    "in_atobl_left": H.ATOBL_LEFT,
    "in_atobl_right": H.ATOBL_RIGHT,
    "in_hull": H.ATOBL_HULL,
    "in_bl": H.BL,
}


class UsageError(Exception):
    pass


def default_tol() -> float:
    raw = os.environ.get(TOL_ENV)
    if raw is None:
        return classify.DEFAULT_TOL
    try:
        tol = float(raw)
    except ValueError:
        raise UsageError(f"{TOL_ENV}={raw!r} is not a number") from None
    if not tol > 0:
        raise UsageError(f"{TOL_ENV} must be positive")
    return tol


def _bits(text: str, n: int, what: str) -> tuple[int, ...]:
    if len(text) != n or set(text) - {"0", "1"}:
        raise UsageError(f"{what} must be {n} binary digits, got {text!r}")
    return tuple(int(c) for c in text)


def _load(path, kind=None):
    b = load_box(path)
    if kind is not None and not isinstance(b, kind):
        want = "tripartite" if kind is Box3 else "bipartite"
        raise UsageError(f"{path}: expected a {want} box")
    return b


# -- make -------------------------------------------------------------------


def build_box(args) -> Box2 | Box3:
    kind = args.kind
    if kind == "ghz":
        m = constructors.SWAPPED_ASSIGNMENT if args.swapped else constructors.DEFAULT_ASSIGNMENT
        return constructors.ghz_box(m)
    if kind in ("peps-left", "peps-right", "peps-alpha"):
        if args.eps is None:
            raise UsageError(f"{kind} needs --eps")
        if kind == "peps-left":
            return constructors.p_eps_left(args.eps)
        if kind == "peps-right":
            return constructors.p_eps_right(args.eps)
        if args.alpha is None:
            raise UsageError("peps-alpha needs --alpha")
        return constructors.p_eps_alpha(args.eps, args.alpha)
    if kind == "pr":
        variant = _bits(args.variant, 3, "--variant")
        if args.party1 is None:
            return constructors.pr_box(variant)
        return constructors.pr_product(_bits(args.party1, 2, "--party1"), variant)
    if kind == "noise":
        return constructors.noise_box()
    if kind == "det":
        return constructors.det_box3(
            _bits(args.party1 or "00", 2, "--party1"),
            _bits(args.o2, 4, "--o2"),
            _bits(args.o3, 4, "--o3"),
        )
    raise UsageError(f"unknown kind {kind!r}")


def cmd_make(args) -> int:
    save_box(args.output, build_box(args))
    return EXIT_OK


# -- classify / witness -----------------------------------------------------


def _single(b: Box3, c: H, tol: float):
    if c is H.TOBL:
        return classify.tobl_membership(b, tol)
    return classify.membership(b, c, tol)


def cmd_classify(args) -> int:
    b = _load(args.input, Box3)
    tol = args.tol or default_tol()
    if args.cls is None:
        report = classify.classify_full(b, tol)
        if args.json:
            print(json.dumps(report.to_dict(), indent=2))
        else:
            print(report.format_text())
        return EXIT_OK
    c = H(args.cls)
    result = _single(b, c, tol)
    if args.json:
        print(json.dumps({"class": str(c), **result.to_dict()}, indent=2))
    else:
        print(f"{c}: {result.verdict}")
        if result.is_in and result.weights is not None:
            print(f"  certificate: {len(result.support())} weights, residual {result.residual:.2e}")
        elif result.witness is not None:
            print(f"  witness margin {result.margin:.6e} (run 'witness' for coefficients)")
        if result.note:
            print(f"  {result.note}")
    return EXIT_OK if result.is_in else EXIT_OUT


def _print_functional(y: np.ndarray, title: str) -> None:
    print(title)
    with np.printoptions(precision=6, suppress=True, linewidth=120):
        print(y.reshape(8, 8))


def cmd_witness(args) -> int:
    b = _load(args.input, Box3)
    tol = args.tol or default_tol()
    c = H(args.cls)
    result = _single(b, c, tol)
    if result.is_in:
        print(f"{c}: In; no separating functional exists")
        return EXIT_OK
    if c is H.NS:
        print(f"{c}: Out; {result.note}")
        return EXIT_OUT
    parts = result.parts.items() if c is H.ATOBL_UNION else [(str(c), result)]
    for name, r in parts:
        y = r.witness
        if name == str(H.TOBL):
            _print_functional(y[:64], "coefficients on the 2->3 system (rows i1i2i3, cols o1o2o3):")
            _print_functional(y[64:], "coefficients on the 3->2 system:")
        else:
            _print_functional(y, f"{name} functional y (rows i1i2i3, cols o1o2o3):")
        print(f"members satisfy  sum y*p <= {r.offset:.12g}")
        print(f"this box gives   sum y*p  = {r.offset + r.margin:.12g}  (margin {r.margin:.3e})")
    return EXIT_OUT


# -- wire / chsh ------------------------------------------------------------


def cmd_wire(args) -> int:
    b = _load(args.input, Box3)
    save_box(args.output, wiring.PROTOCOLS[args.protocol](b))
    return EXIT_OK


def cmd_chsh(args) -> int:
    b = _load(args.input, Box2)
    variant = bell.ChshVariant.parse(args.variant) if args.variant else bell.CANONICAL
    print(f"chsh[{variant}] = {bell.chsh_value(b, variant):.12f}")
    print(f"chsh_max = {bell.chsh_max(b):.12f}")
    return EXIT_OK


# -- scan -------------------------------------------------------------------


@dataclass(frozen=True)
class ScanRecord:
    eps: float
    alpha: float
    chsh_2to3: float
    chsh_3to2: float
    in_fl: bool | None = None
    in_nsbl: bool | None = None
    in_tobl: bool | None = None
    in_atobl_left: bool | None = None
    in_atobl_right: bool | None = None
    in_hull: bool | None = None
    in_bl: bool | None = None


SCAN_HEADER = [f.name for f in fields(ScanRecord)]


def grid(start: float, stop: float, step: float) -> list[float]:
    """``start + k*step`` up to ``stop``; ``stop`` is appended if the step overshoots it."""
    if not (0.0 <= start <= stop <= 1.0):
        raise UsageError(f"range [{start}, {stop}] must lie inside [0, 1]")
    if not step > 0:
        if start == stop:
            return [start]
        raise UsageError("step must be positive")
    n = int(math.floor((stop - start) / step + 1e-9))
    points = [round(start + k * step, 12) for k in range(n + 1)]
    if points[-1] < stop - 1e-12:
        points.append(stop)
    return points


def scan_point(eps: float, alpha: float, classes: tuple, tol: float) -> ScanRecord:
    b = constructors.p_eps_alpha(eps, alpha)
    flags = {}
    if classes:
        if set(classes) == set(SCAN_COLUMNS):
            report = classify.classify_full(b, tol)
            flags = {col: report.is_in(c) for col, c in SCAN_COLUMNS.items()}
        else:
            flags = {col: _single(b, SCAN_COLUMNS[col], tol).is_in for col in classes}
    return ScanRecord(
        eps=eps,
        alpha=alpha,
        chsh_2to3=bell.chsh_value(wiring.wire_2to3(b)),
        chsh_3to2=bell.chsh_value(wiring.wire_3to2(b)),
        **flags,
    )


def _scan_job(job):
    return scan_point(*job)


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    return f"{round(v, 12) + 0.0:.12g}"


def write_scan_csv(records, stream) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(SCAN_HEADER)
    for r in records:
        w.writerow([_cell(v) for v in astuple(r)])


def run_scan(eps_range, alpha_range, classes=(), tol=classify.DEFAULT_TOL, jobs=1) -> list[ScanRecord]:
    jobs_list = [(e, a, tuple(classes), tol) for e in grid(*eps_range) for a in grid(*alpha_range)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_scan_job, jobs_list))
    return [_scan_job(j) for j in jobs_list]


def cmd_scan(args) -> int:
    if args.lp:
        classes = tuple(SCAN_COLUMNS)
    elif args.classes:
        classes = tuple(c.strip() for c in args.classes.split(",") if c.strip())
        unknown = [c for c in classes if c not in SCAN_COLUMNS]
        if unknown:
            raise UsageError(f"unknown LP columns {unknown}; choose from {list(SCAN_COLUMNS)}")
    else:
        classes = ()
    tol = args.tol or default_tol()
    records = run_scan(args.eps, args.alpha, classes, tol, args.jobs)
    buf = io.StringIO()
    write_scan_csv(records, buf)
    if args.output == "-":
        sys.stdout.write(buf.getvalue())
    else:
        Path(args.output).write_text(buf.getvalue())
    return EXIT_OK


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="boxlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    classes = [c.value for c in H]

    mk = sub.add_parser("make", help="write a named box to a file")
    mk.add_argument("kind", choices=["ghz", "peps-left", "peps-right", "peps-alpha", "pr", "noise", "det"])
    mk.add_argument("-o", "--output", required=True)
    mk.add_argument("--eps", type=float)
    mk.add_argument("--alpha", type=float)
    mk.add_argument("--swapped", action="store_true",
                    help="ghz: party 2 measures the diagonal pair, party 3 sigma_z/sigma_x")
    mk.add_argument("--variant", default="000", help="pr: bits a b g")
    mk.add_argument("--party1", help="pr/det: party-1 truth table, e.g. 01 for o1 = i1")
    mk.add_argument("--o2", default="0000", help="det: o2 truth table over 2*i2+i3")
    mk.add_argument("--o3", default="0000", help="det: o3 truth table over 2*i2+i3")
    mk.set_defaults(func=cmd_make)

    cl = sub.add_parser("classify", help="membership report for a tripartite box")
    cl.add_argument("input")
    cl.add_argument("--class", dest="cls", choices=classes)
    cl.add_argument("--tol", type=float)
    cl.add_argument("--json", action="store_true")
    cl.set_defaults(func=cmd_classify)

    wt = sub.add_parser("witness", help="print the separating functional for an Out verdict")
    wt.add_argument("input")
    wt.add_argument("--class", dest="cls", choices=classes, required=True)
    wt.add_argument("--tol", type=float)
    wt.set_defaults(func=cmd_witness)

    wr = sub.add_parser("wire", help="collapse parties 2 and 3 with a wiring")
    wr.add_argument("input")
    wr.add_argument("--protocol", choices=sorted(wiring.PROTOCOLS), required=True)
    wr.add_argument("-o", "--output", required=True)
    wr.set_defaults(func=cmd_wire)

    ch = sub.add_parser("chsh", help="CHSH values of a bipartite box")
    ch.add_argument("input")
    ch.add_argument("--variant", help="sign string such as ++-+ (default: canonical)")
    ch.set_defaults(func=cmd_chsh)

    sc = sub.add_parser("scan", help="sweep the epsilon-alpha family into a CSV")
    sc.add_argument("--eps", nargs=3, type=float, metavar=("START", "STOP", "STEP"), default=(0.0, 1.0, 0.1))
    sc.add_argument("--alpha", nargs=3, type=float, metavar=("START", "STOP", "STEP"), default=(0.0, 1.0, 0.25))
    sc.add_argument("-o", "--output", default="-")
    sc.add_argument("--lp", action="store_true", help="fill every membership column")
    sc.add_argument("--classes", help="comma-separated membership columns, e.g. in_atobl_left,in_hull")
    sc.add_argument("--tol", type=float)
    sc.add_argument("--jobs", type=int, default=1)
    sc.set_defaults(func=cmd_scan)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ParseError, InvalidBox, OSError) as exc:
        print(f"boxlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalFailure as exc:
        print(f"boxlab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except BoxlabError as exc:
        print(f"boxlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
