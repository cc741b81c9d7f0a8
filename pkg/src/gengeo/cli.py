"""``gengeo``: run the validators and reports on a frame document.

Exit codes: 0 success, 1 mathematical failure, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import json.scanner
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import deformation, hodge
from .frame import FrameSpec, InvalidFrameError, betti_numbers, ce_differential, twisted_betti, twisted_d, validate_frame
from .linalg import float_rank
from .multilinear import popcount
from .reports import Report
from .scalars import mpq, parse_rational
from .structures import (
    GCStructure,
    GKPair,
    check_integrability,
    from_complex,
    from_matrix,
    from_symplectic,
    gk_validate,
    type_of,
)

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
RESIDUAL_FLOOR = 1e-12

MODES = {
    "validate": ("exact",),
    "cohomology": ("exact", "float"),
    "diamond": ("float",),
    "identities": ("float",),
    "ddj": ("exact",),
    "deform": ("exact",),
    "lefschetz": ("exact",),
}


class DocumentError(Exception):
    def __init__(self, message: str, line: int | None = None, where: str = ""):
        self.line = line
        self.where = where
        loc = f"line {line}: " if line else ""
        at = f" (at {where})" if where else ""
        super().__init__(f"{loc}{message}{at}")


# -- document parsing ---------------------------------------------------------


class _Str(str):
    """String that remembers its offset in the source text."""

    pos = -1


class _Float(float):
    pass


def _decoder() -> json.JSONDecoder:
    dec = json.JSONDecoder(parse_float=_Float)
    base = dec.parse_string

    def parse_string(s, end, strict):
        val, new_end = base(s, end, strict)
        out = _Str(val)
        out.pos = end - 1
        return out, new_end

    dec.parse_string = parse_string
    dec.scan_once = json.scanner.py_make_scanner(dec)
    return dec


@dataclass
class Structure:
    name: str
    kind: str
    matrix: np.ndarray
    gc: GCStructure | None
    error: str = ""


@dataclass
class Document:
    name: str
    frame: FrameSpec
    structures: list = field(default_factory=list)
    pair: tuple | None = None

    def gk_pair(self) -> GKPair | None:
        if self.pair is None:
            return None
        a, b = (self.structures[i] for i in self.pair)
        if a.gc is None or b.gc is None:
            return None
        return GKPair(a.gc, b.gc)


class _Parser:
    def __init__(self, text: str):
        self.text = text

    def line(self, value) -> int | None:
        if isinstance(value, _Str) and value.pos >= 0:
            return self.text.count("\n", 0, value.pos) + 1
        return None

    def fail(self, msg: str, value=None, where: str = ""):
        raise DocumentError(msg, self.line(value), where)

    def rational(self, value, where: str):
        if isinstance(value, bool):
            self.fail("expected a rational, got a boolean", value, where)
        if isinstance(value, _Float):
            self.fail(f"floating-point value {float(value)!r} not allowed; write rationals as strings like \"1/2\"",
                      value, where)
        if isinstance(value, int):
            return mpq(value)
        if isinstance(value, str):
            try:
                return parse_rational(value)
            except ValueError:
                self.fail(f"malformed rational {str(value)!r}", value, where)
        self.fail(f"expected a rational, got {type(value).__name__}", value, where)

    def integer(self, value, where: str, lo: int, hi: int) -> int:
        if isinstance(value, bool) or not isinstance(value, int):
            if isinstance(value, str):
                try:
                    value = int(value)
                except ValueError:
                    self.fail(f"expected an integer, got {str(value)!r}", value, where)
            else:
                self.fail("expected an integer", value, where)
        if not lo <= value <= hi:
            self.fail(f"index {value} out of range {lo}..{hi}", None, where)
        return value

    def matrix(self, value, where: str, size: int) -> np.ndarray:
        if not isinstance(value, list) or len(value) != size:
            self.fail(f"expected a {size} x {size} matrix", None, where)
        out = np.empty((size, size), dtype=object)
        for r, row in enumerate(value):
            if not isinstance(row, list) or len(row) != size:
                self.fail(f"row {r} must have {size} entries", None, f"{where}[{r}]")
            for c, x in enumerate(row):
                out[r, c] = self.rational(x, f"{where}[{r}][{c}]")
        return out

    def triples(self, value, where: str, dim: int) -> list:
        if value is None:
            return []
        if not isinstance(value, list):
            self.fail("expected a list of {i, j, k, coeff} entries", None, where)
        out = []
        for n, e in enumerate(value):
            w = f"{where}[{n}]"
            if not isinstance(e, dict):
                self.fail("expected an object with keys i, j, k, coeff", None, w)
            for key in ("i", "j", "k", "coeff"):
                if key not in e:
                    self.fail(f"missing key {key!r}", None, w)
            i, j, k = (self.integer(e[x], f"{w}.{x}", 1, dim) for x in ("i", "j", "k"))
            out.append((i, j, k, self.rational(e["coeff"], f"{w}.coeff")))
        return out


def parse_document(text: str, source: str = "<document>") -> Document:
    try:
        raw = _decoder().decode(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"invalid JSON: {exc.msg}", exc.lineno) from None
    p = _Parser(text)
    if not isinstance(raw, dict):
        p.fail("top level must be an object")
    known = {"name", "dim", "brackets", "H", "g", "b", "structures", "pair", "description"}
    for key in raw:
        if key not in known:
            p.fail(f"unknown field {str(key)!r}")
    if "dim" not in raw:
        p.fail("missing field 'dim'")
    dim = p.integer(raw["dim"], "dim", 2, 8)
    if dim % 2:
        p.fail("dim must be even", None, "dim")
    brackets = p.triples(raw.get("brackets"), "brackets", dim)
    H = p.triples(raw.get("H"), "H", dim)
    for n, (i, j, k, _) in enumerate(H):
        if len({i, j, k}) < 3:
            p.fail("H entry has a repeated index", None, f"H[{n}]")
    g = p.matrix(raw["g"], "g", dim) if "g" in raw else np.eye(dim, dtype=int)
    b = p.matrix(raw["b"], "b", dim) if "b" in raw else None
    name = str(raw.get("name", Path(source).stem))
    structures = []
    names = set()
    items = raw.get("structures", [])
    if not isinstance(items, list):
        p.fail("expected a list", None, "structures")
    for n, s in enumerate(items):
        w = f"structures[{n}]"
        if not isinstance(s, dict) or "kind" not in s:
            p.fail("each structure needs a 'kind'", None, w)
        kind = s["kind"]
        sname = str(s.get("name", f"S{n + 1}"))
        if sname in names:
            p.fail(f"duplicate structure name {sname!r}", s.get("name"), w)
        names.add(sname)
        key = {"complex": "J", "symplectic": "omega", "explicit": "J4n"}.get(kind)
        if key is None:
            p.fail(f"unknown kind {str(kind)!r}; use complex, symplectic or explicit", kind, f"{w}.kind")
        if key not in s:
            p.fail(f"missing field {key!r}", None, w)
        size = 2 * dim if kind == "explicit" else dim
        M = p.matrix(s[key], f"{w}.{key}", size)
        build = {"complex": from_complex, "symplectic": from_symplectic, "explicit": from_matrix}[kind]
        try:
            gc, err = build(M, sname), ""
        except ValueError as exc:
            gc, err = None, str(exc)
        structures.append(Structure(sname, kind, M, gc, err))
    pair = None
    if "pair" in raw:
        pr = raw["pair"]
        if not isinstance(pr, list) or len(pr) != 2:
            p.fail("pair must list two structure names", None, "pair")
        idx = []
        for x in pr:
            hits = [k for k, s in enumerate(structures) if s.name == x]
            if not hits:
                p.fail(f"pair refers to unknown structure {str(x)!r}", x, "pair")
            idx.append(hits[0])
        pair = tuple(idx)
    try:
        frame = FrameSpec.from_brackets(dim, [e for e in brackets], H=H or None, g=g, b=b,
                                        structures=tuple((s.name, s.kind, s.matrix) for s in structures), name=name)
    except InvalidFrameError as exc:
        raise DocumentError(str(exc)) from None
    return Document(name, frame, structures, pair)


def load_document(path) -> Document:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DocumentError(f"cannot read {path}: {exc.strerror}") from None
    return parse_document(text, str(path))


# -- output helpers -----------------------------------------------------------


def fmt_residual(x: float) -> str:
    """Fixed formatting; values under the floor print as the floor so output is machine-independent."""
    return f"<{RESIDUAL_FLOOR:.0e}" if x < RESIDUAL_FLOOR else f"{x:.3e}"


@dataclass
class Outcome:
    command: str
    document: str
    sections: list = field(default_factory=list)  # list of Report
    tables: list = field(default_factory=list)  # (title, list of lines, data)
    status: int = EXIT_OK
    message: str = ""

    def fail(self, message: str = ""):
        self.status = EXIT_FAIL
        if message and not self.message:
            self.message = message

    def render_text(self) -> str:
        out = [f"gengeo {self.command}: {self.document}"]
        for title, lines, _ in self.tables:
            out.append("")
            out.append(title)
            out.extend("  " + line for line in lines)
        for rep in self.sections:
            out.append("")
            out.append(rep.title)
            out.extend("  " + line for line in rep.lines())
        out.append("")
        if self.message:
            out.append(self.message)
        out.append("result: " + ("ok" if self.status == EXIT_OK else "FAILED"))
        return "\n".join(out) + "\n"

    def render_json(self) -> str:
        doc = {
            "command": self.command,
            "document": self.document,
            "ok": self.status == EXIT_OK,
            "exit_code": self.status,
            "message": self.message,
            "reports": [r.as_dict() for r in self.sections],
            "tables": {title: data for title, _, data in self.tables},
        }
        return json.dumps(doc, indent=2) + "\n"


def _structure_report(s: Structure, frame: FrameSpec) -> Report:
    rep = Report(f"structure {s.name} ({s.kind})")
    rep.add("valid generalized complex structure", s.gc is not None, s.error)
    if s.gc is not None:
        integ = check_integrability(s.gc, frame)
        w = ""
        if not integ:
            a, b, _ = integ.witness
            w = f"[E_{a}, E_{b}] leaves E"
        rep.add("integrable", integ.integrable, w)
        rep.add("type", True, str(type_of(s.gc)), type_of(s.gc))
    return rep


def _pick(doc: Document, which: int | None, out: Outcome, kind: str | None = None) -> Structure | None:
    if which is not None:
        if not 1 <= which <= len(doc.structures):
            raise DocumentError(f"--which {which}: document has {len(doc.structures)} structure(s)")
        s = doc.structures[which - 1]
    else:
        cands = [s for s in doc.structures if kind is None or s.kind == kind]
        if not cands:
            out.fail(f"document has no {kind or 'generalized complex'} structure")
            return None
        s = cands[0]
    if s.gc is None:
        out.fail(f"structure {s.name} is invalid: {s.error}")
        return None
    return s


def _require_pair(doc: Document, out: Outcome) -> GKPair | None:
    if doc.pair is None:
        out.fail("document defines no generalized Kähler pair")
        return None
    pair = doc.gk_pair()
    if pair is None:
        out.fail("a structure of the pair is invalid")
    return pair


# -- commands -----------------------------------------------------------------


def cmd_validate(doc: Document, args) -> Outcome:
    out = Outcome("validate", doc.name)
    rep = validate_frame(doc.frame)
    out.sections.append(rep)
    if not rep.ok:
        out.fail()
    frame_ok = rep["jacobi"].passed and rep["dH = 0"].passed
    for s in doc.structures:
        if not frame_ok:
            break
        srep = _structure_report(s, doc.frame)
        out.sections.append(srep)
        if not srep.ok:
            out.fail()
    if frame_ok and doc.pair is not None:
        pair = doc.gk_pair()
        if pair is None:
            out.fail("a structure of the pair is invalid")
        else:
            prep = gk_validate(pair, doc.frame)
            prep.title = "pair ({}, {})".format(*(doc.structures[i].name for i in doc.pair))
            try:
                met = pair.metric()
                same = bool(np.all(met.g == doc.frame.g)) and bool(
                    np.all(met.b == (doc.frame.b if doc.frame.b is not None else 0)))
                prep.add("pair metric equals document (g, b)", same)
            except ValueError as exc:
                prep.add("pair metric equals document (g, b)", False, str(exc))
            out.sections.append(prep)
            if not prep.ok:
                out.fail()
    return out


def _float_ranks(D, blocks) -> list[int]:
    A = D.to_array()
    return [float_rank(A[np.ix_(cod, dom)], 1e-9) if dom and cod else 0 for dom, cod in blocks]


def cmd_cohomology(doc: Document, args) -> Outcome:
    out = Outcome("cohomology", doc.name)
    frame = doc.frame
    rep = validate_frame(frame)
    if not (rep["jacobi"].passed and rep["dH = 0"].passed):
        out.sections.append(rep)
        out.fail("frame is not a valid Lie algebra with closed H")
        return out
    m = frame.dim
    twisted = args.twisted and not frame.H.is_zero()
    if twisted:
        if args.mode == "float":
            even = [x for x in range(1 << m) if not popcount(x) & 1]
            odd = [x for x in range(1 << m) if popcount(x) & 1]
            r_eo, r_oe = _float_ranks(twisted_d(frame), [(even, odd), (odd, even)])
            ev, od = len(even) - r_eo - r_oe, len(odd) - r_oe - r_eo
        else:
            ev, od = twisted_betti(frame)
        out.tables.append(("twisted Betti numbers (even, odd)", [f"even {ev}", f"odd {od}"],
                           {"even": ev, "odd": od, "mode": args.mode}))
    else:
        if args.mode == "float":
            deg = [[x for x in range(1 << m) if popcount(x) == k] for k in range(m + 1)]
            ranks = _float_ranks(ce_differential(frame), [(deg[k], deg[k + 1]) for k in range(m)]) + [0]
            betti = [len(deg[k]) - ranks[k] - (ranks[k - 1] if k else 0) for k in range(m + 1)]
        else:
            betti = betti_numbers(frame)
        note = " (H ignored; use --twisted)" if not frame.H.is_zero() else ""
        out.tables.append((f"Betti numbers by degree{note}", [" ".join(map(str, betti))],
                           {"betti": betti, "mode": args.mode}))
    return out


def _diamond_lines(dims: dict, n: int) -> list[str]:
    width = max(3, max(len(str(v)) for v in dims.values()) + 1)
    lines = []
    for q in range(n, -n - 1, -1):
        cells = []
        for p in range(-n, n + 1):
            if (p, q) in dims:
                cells.append(str(dims[(p, q)]).rjust(width))
            else:
                cells.append(" " * width)
        lines.append(f"q={q:+d} " + "".join(cells).rstrip())
    lines.append("     " + "".join(f"{p:+d}".rjust(width) for p in range(-n, n + 1)) + "  (p)")
    return lines


def _gk_gate(doc: Document, out: Outcome) -> GKPair | None:
    pair = _require_pair(doc, out)
    if pair is None:
        return None
    rep = gk_validate(pair, doc.frame)
    if not rep.ok:
        out.sections.append(rep)
        out.fail("pair fails generalized Kähler validation")
        return None
    return pair


def cmd_diamond(doc: Document, args) -> Outcome:
    out = Outcome("diamond", doc.name)
    pair = _gk_gate(doc, out)
    if pair is None:
        return out
    space = hodge.BISpace(doc.frame, pair.metric(), tol=args.tol)
    space.require_unimodular()
    rep = hodge.hodge_diamond(pair, space)
    n = pair.n
    lines = _diamond_lines(rep.dims, n)
    lines.append(f"total {rep.total}")
    lines.append(f"twisted Betti: even {rep.betti_even}, odd {rep.betti_odd}")
    lines.append(f"types {rep.types[0]}, {rep.types[1]}")
    out.tables.append(("Hodge diamond dim H^{p,q}", lines, {
        "dims": {f"{p},{q}": d for (p, q), d in rep.dims.items()},
        "total": rep.total,
        "betti_even": rep.betti_even,
        "betti_odd": rep.betti_odd,
        "types": list(rep.types),
        "tolerance": args.tol,
    }))
    flags = Report("flags")
    for k, v in rep.flags.items():
        flags.add(k, v, rep.residuals["parity rule"] if k == "parity corollary" else "")
    out.sections.append(flags)
    if not flags.ok:
        out.fail()
    return out


def cmd_identities(doc: Document, args) -> Outcome:
    out = Outcome("identities", doc.name)
    pair = _require_pair(doc, out)
    if pair is None:
        return out
    try:
        space = hodge.BISpace(doc.frame, tol=args.tol)
        space.require_unimodular()
        grading = hodge.pq_grading(pair, args.tol)
    except ValueError as exc:
        out.fail(str(exc))
        return out
    D = space.dH()
    split = hodge.split_dh(grading, D)
    res = hodge.kahler_identities_check(space, split, D)
    rep = Report(f"residuals (operator 2-norm, tolerance {args.tol:g})")
    for name, r in res.items():
        rep.add(name, r <= args.tol, fmt_residual(r))
    out.sections.append(rep)
    if not rep.ok:
        out.fail()
    return out


def cmd_ddj(doc: Document, args) -> Outcome:
    out = Outcome("ddj", doc.name)
    s = _pick(doc, args.which or 1, out)
    if s is None:
        return out
    rep = hodge.ddj_check(s.gc, doc.frame)
    rep.title = f"dd^J property for {s.name} ({s.kind})"
    out.sections.append(rep)
    if not rep.ok:
        out.fail()
    return out


def cmd_deform(doc: Document, args) -> Outcome:
    out = Outcome("deform", doc.name)
    s = _pick(doc, args.which or 1, out)
    if s is None:
        return out
    rep = deformation.deformation_report(s.gc, doc.frame)
    rep.title = f"deformation complex of {s.name} ({s.kind})"
    out.sections.append(rep)
    if not rep.ok:
        out.fail()
    return out


def cmd_lefschetz(doc: Document, args) -> Outcome:
    out = Outcome("lefschetz", doc.name)
    s = _pick(doc, args.which, out, kind="symplectic")
    if s is None:
        return out
    if s.kind != "symplectic":
        out.fail(f"structure {s.name} is not symplectic")
        return out
    try:
        rep = hodge.lefschetz_check(s.matrix, doc.frame)
    except ValueError as exc:
        out.fail(str(exc))
        return out
    rep.title = f"strong Lefschetz for {s.name}"
    out.sections.append(rep)
    if not rep.ok:
        out.fail()
    return out


COMMANDS = {
    "validate": (cmd_validate, "frame, structure and pair validation"),
    "cohomology": (cmd_cohomology, "Betti numbers, per degree or twisted by parity"),
    "diamond": (cmd_diamond, "generalized Hodge diamond of a GK pair"),
    "identities": (cmd_identities, "Kähler identity and Laplacian residuals"),
    "ddj": (cmd_ddj, "dd^J property of a structure"),
    "deform": (cmd_deform, "deformation complex dimensions"),
    "lefschetz": (cmd_lefschetz, "strong Lefschetz property of a symplectic form"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("file", help="frame document (JSON)")
    common.add_argument("--twisted", action="store_true", help="use d_H (cohomology)")
    common.add_argument("--tol", type=float, default=hodge.DEFAULT_TOL, help="float tolerance (default 1e-9)")
    common.add_argument("--which", type=int, choices=(1, 2), default=None, help="structure number")
    common.add_argument("--mode", choices=("exact", "float"), default=None)
    common.add_argument("--format", choices=("text", "json"), default="text")
    parser = argparse.ArgumentParser(prog="gengeo", description="Generalized geometry on Lie algebra frames.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, helptext) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=helptext)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    modes = MODES[args.command]
    if args.mode is None:
        args.mode = modes[0]
    elif args.mode not in modes:
        print(f"gengeo: error: --mode {args.mode} is not available for {args.command} "
              f"(supported: {', '.join(modes)})", file=sys.stderr)
        return EXIT_INPUT
    if not args.tol > 0:
        print("gengeo: error: --tol must be positive", file=sys.stderr)
        return EXIT_INPUT
    try:
        doc = load_document(args.file)
        outcome = COMMANDS[args.command][0](doc, args)
    except DocumentError as exc:
        print(f"gengeo: error: {args.file}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    text = outcome.render_json() if args.format == "json" else outcome.render_text()
    sys.stdout.write(text)
    return outcome.status


if __name__ == "__main__":
    sys.exit(main())
