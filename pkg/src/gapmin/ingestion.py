"""Problem ingestion: the native text format, a CBF subset, saddle lowering.

A ConicProgram is

    minimize (or maximize)  <c, x> + obj_offset
    subject to              b - A x in K,   x in X,

with K a product of row cone blocks and X a product of variable cone blocks
(kinds: zero, free, nonneg, nonpos, soc). The saddle form pairs
f(x) = <c_eff, x> + indicator(x in X) against g*(y) = <b, y> + indicator(y in
K*), coupled through A; maximization flips the sign of c.

Native format (text, '#' starts a comment, sections in any order, each at
most once)::

    OBJ             # sense line, then sparse "index value" entries
    min
    0 1.5

    VARS            # "kind dim" blocks, in variable order; dims sum to n
    nonneg 4

    ROWS            # single line: m
    3

    TRIPLETS        # "row col value" entries of A; duplicates sum
    0 0 0.25

    RHS             # sparse "row value" entries of b; duplicates overwrite
    0 1.0

    CONES           # "kind dim" row blocks, in row order; dims sum to m
    zero 3

    OFFSET          # optional: single objective-constant line
    0.5

The CBF subset accepts VER, OBJSENSE, VAR, CON, OBJACOORD, OBJBCOORD, ACOORD,
BCOORD with cones F, L+, L-, L=, Q; anything else raises
UnsupportedFormatError naming the keyword. CBF states constraints as
A x + b in K, so A is negated on ingestion to match the native orientation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import MatrixCoupling, SaddleProblem
from .errors import ConePartitionError, DimensionError, ParseError, UnsupportedFormatError
from .prox import (BlockLinear, ConeDescriptor, LinearFn, LinearPlusDualCone,
                   LinearPlusNonneg, check_partition)

_SECTIONS = ("OBJ", "VARS", "ROWS", "TRIPLETS", "RHS", "CONES", "OFFSET")

_CBF_CONES = {"F": "free", "L+": "nonneg", "L-": "nonpos", "L=": "zero", "Q": "soc"}


@dataclass
class ParseDiagnostics:
    """Non-fatal parse findings, each tagged with its 1-based line number."""

    warnings: list[str] = field(default_factory=list)
    lines: list[int] = field(default_factory=list)

    def warn(self, line: int, message: str) -> None:
        self.warnings.append(message)
        self.lines.append(line)

    def formatted(self) -> list[str]:
        return [f"line {ln}: {msg}" for ln, msg in zip(self.lines, self.warnings)]


@dataclass
class ConicProgram:
    """A conic program in the orientation described in the module docstring."""

    n: int
    m: int
    sense: str
    c: np.ndarray
    b: np.ndarray
    a_rows: np.ndarray
    a_cols: np.ndarray
    a_vals: np.ndarray
    row_cones: tuple[ConeDescriptor, ...]
    var_cones: tuple[ConeDescriptor, ...]
    obj_offset: float = 0.0

    def __post_init__(self):
        if self.sense not in ("min", "max"):
            raise ParseError(f"sense must be 'min' or 'max', got {self.sense!r}")
        self.c = np.asarray(self.c, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        if self.c.shape != (self.n,):
            raise DimensionError(f"c has shape {self.c.shape}, expected ({self.n},)")
        if self.b.shape != (self.m,):
            raise DimensionError(f"b has shape {self.b.shape}, expected ({self.m},)")
        self.a_rows = np.asarray(self.a_rows, dtype=int)
        self.a_cols = np.asarray(self.a_cols, dtype=int)
        self.a_vals = np.asarray(self.a_vals, dtype=float)
        if not (self.a_rows.shape == self.a_cols.shape == self.a_vals.shape):
            raise DimensionError("triplet arrays must share one shape")
        if self.a_rows.size:
            if self.a_rows.min() < 0 or self.a_rows.max() >= self.m:
                raise DimensionError("triplet row index out of range")
            if self.a_cols.min() < 0 or self.a_cols.max() >= self.n:
                raise DimensionError("triplet column index out of range")
        self.row_cones = tuple(self.row_cones)
        self.var_cones = tuple(self.var_cones)
        check_partition(self.row_cones, self.m, "row")
        check_partition(self.var_cones, self.n, "variable")

    def coupling(self) -> MatrixCoupling:
        return MatrixCoupling.from_triplets(
            self.m, self.n, self.a_rows, self.a_cols, self.a_vals)


def to_saddle(program: ConicProgram) -> SaddleProblem:
    """Lower a conic program to its primal-dual saddle form.

    The constant obj_offset does not appear: it shifts every objective value
    equally and cancels from all duality-gap quantities.
    """
    c = program.c if program.sense == "min" else -program.c
    kinds = {cone.kind for cone in program.var_cones if cone.dim > 0}
    if not kinds or kinds == {"free"}:
        f = LinearFn(c)
    elif kinds == {"nonneg"}:
        f = LinearPlusNonneg(c)
    else:
        f = BlockLinear(c, program.var_cones)
    gstar = LinearPlusDualCone(program.b, program.row_cones)
    return SaddleProblem(f, gstar, program.coupling())


def _strip(line: str) -> str:
    cut = line.find("#")
    return line if cut < 0 else line[:cut]


def _floatval(token: str, ln: int, what: str) -> float:
    try:
        v = float(token)
    except ValueError:
        raise ParseError(f"bad {what} {token!r}", ln) from None
    if not np.isfinite(v):
        raise ParseError(f"{what} must be finite, got {token!r}", ln)
    return v


def _intval(token: str, ln: int, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise ParseError(f"bad {what} {token!r}", ln) from None


def _cone_entry(tokens: list[str], ln: int) -> ConeDescriptor:
    if len(tokens) != 2:
        raise ParseError("expected 'kind dim'", ln)
    try:
        return ConeDescriptor(tokens[0], _intval(tokens[1], ln, "cone dimension"))
    except ConePartitionError as exc:
        raise ParseError(str(exc), ln) from None


def parse_native(text: str) -> tuple[ConicProgram, ParseDiagnostics]:
    """Parse the native format; raises ParseError with a line number."""
    diags = ParseDiagnostics()
    sections: dict[str, list[tuple[int, list[str]]]] = {}
    current = None
    for ln, raw in enumerate(text.splitlines(), start=1):
        tokens = _strip(raw).split()
        if not tokens:
            continue
        if tokens[0] in _SECTIONS:
            if len(tokens) != 1:
                raise ParseError(f"section header {tokens[0]} takes no arguments", ln)
            if tokens[0] in sections:
                raise ParseError(f"duplicate section {tokens[0]}", ln)
            current = tokens[0]
            sections[current] = []
            continue
        if current is None:
            raise ParseError(f"content before any section: {raw.strip()!r}", ln)
        sections[current].append((ln, tokens))

    for required in ("OBJ", "VARS", "ROWS"):
        if required not in sections:
            raise ParseError(f"missing section {required}")

    obj = sections["OBJ"]
    if not obj:
        raise ParseError("OBJ section is empty")
    ln, tokens = obj[0]
    if len(tokens) != 1 or tokens[0] not in ("min", "max"):
        raise ParseError("first OBJ line must be 'min' or 'max'", ln)
    sense = tokens[0]

    var_cones = [_cone_entry(tokens, ln) for ln, tokens in sections["VARS"]]
    n = sum(c.dim for c in var_cones)

    rows = sections["ROWS"]
    if len(rows) != 1 or len(rows[0][1]) != 1:
        raise ParseError("ROWS section must hold a single row count")
    m = _intval(rows[0][1][0], rows[0][0], "row count")
    if m < 0:
        raise ParseError("row count must be nonnegative", rows[0][0])

    c = np.zeros(n)
    seen_c: set[int] = set()
    for ln, tokens in obj[1:]:
        if len(tokens) != 2:
            raise ParseError("expected 'index value'", ln)
        j = _intval(tokens[0], ln, "objective index")
        if not 0 <= j < n:
            raise ParseError(f"objective index {j} out of range [0, {n})", ln)
        if j in seen_c:
            diags.warn(ln, f"objective index {j} repeated; overwriting")
        seen_c.add(j)
        c[j] = _floatval(tokens[1], ln, "objective value")

    a_rows: list[int] = []
    a_cols: list[int] = []
    a_vals: list[float] = []
    seen_t: set[tuple[int, int]] = set()
    for ln, tokens in sections.get("TRIPLETS", []):
        if len(tokens) != 3:
            raise ParseError("expected 'row col value'", ln)
        i = _intval(tokens[0], ln, "row index")
        j = _intval(tokens[1], ln, "column index")
        if not 0 <= i < m:
            raise ParseError(f"row index {i} out of range [0, {m})", ln)
        if not 0 <= j < n:
            raise ParseError(f"column index {j} out of range [0, {n})", ln)
        if (i, j) in seen_t:
            diags.warn(ln, f"triplet ({i}, {j}) repeated; values sum")
        seen_t.add((i, j))
        a_rows.append(i)
        a_cols.append(j)
        a_vals.append(_floatval(tokens[2], ln, "matrix value"))

    b = np.zeros(m)
    seen_b: set[int] = set()
    for ln, tokens in sections.get("RHS", []):
        if len(tokens) != 2:
            raise ParseError("expected 'row value'", ln)
        i = _intval(tokens[0], ln, "rhs index")
        if not 0 <= i < m:
            raise ParseError(f"rhs index {i} out of range [0, {m})", ln)
        if i in seen_b:
            diags.warn(ln, f"rhs index {i} repeated; overwriting")
        seen_b.add(i)
        b[i] = _floatval(tokens[1], ln, "rhs value")

    row_cones = [_cone_entry(tokens, ln) for ln, tokens in sections.get("CONES", [])]

    obj_offset = 0.0
    offset = sections.get("OFFSET", [])
    if offset:
        if len(offset) != 1 or len(offset[0][1]) != 1:
            raise ParseError("OFFSET section must hold a single value")
        obj_offset = _floatval(offset[0][1][0], offset[0][0], "objective offset")

    try:
        program = ConicProgram(
            n=n, m=m, sense=sense, c=c, b=b, a_rows=np.array(a_rows, dtype=int),
            a_cols=np.array(a_cols, dtype=int), a_vals=np.array(a_vals),
            row_cones=tuple(row_cones), var_cones=tuple(var_cones),
            obj_offset=obj_offset)
    except ConePartitionError as exc:
        raise ParseError(str(exc)) from None
    return program, diags


def serialize_native(program: ConicProgram) -> str:
    """Canonical native text: fixed section order, sorted sparse entries.

    parse_native(serialize_native(p)) reproduces p up to triplet
    canonicalization (duplicates summed, entries sorted by row then column).
    """
    out = ["OBJ", program.sense]
    out.extend(f"{j} {float(v)!r}" for j, v in enumerate(program.c) if v != 0.0)
    out.append("")
    out.append("VARS")
    out.extend(f"{c.kind} {c.dim}" for c in program.var_cones)
    out.append("")
    out.append("ROWS")
    out.append(str(program.m))
    out.append("")
    out.append("TRIPLETS")
    merged: dict[tuple[int, int], float] = {}
    for i, j, v in zip(program.a_rows, program.a_cols, program.a_vals):
        key = (int(i), int(j))
        merged[key] = merged.get(key, 0.0) + float(v)
    out.extend(f"{i} {j} {v!r}" for (i, j), v in sorted(merged.items()))
    out.append("")
    out.append("RHS")
    out.extend(f"{i} {float(v)!r}" for i, v in enumerate(program.b) if v != 0.0)
    out.append("")
    out.append("CONES")
    out.extend(f"{c.kind} {c.dim}" for c in program.row_cones)
    if program.obj_offset != 0.0:
        out.append("")
        out.append("OFFSET")
        out.append(repr(program.obj_offset))
    out.append("")
    return "\n".join(out)


class _CbfReader:
    def __init__(self, text: str):
        self.items: list[tuple[int, list[str]]] = []
        for ln, raw in enumerate(text.splitlines(), start=1):
            stripped = raw.strip()
            if not stripped or stripped.startswith("#"):
                continue
            self.items.append((ln, stripped.split()))
        self.pos = 0

    def done(self) -> bool:
        return self.pos >= len(self.items)

    def take(self, what: str) -> tuple[int, list[str]]:
        if self.done():
            raise ParseError(f"unexpected end of file while reading {what}")
        item = self.items[self.pos]
        self.pos += 1
        return item


def _cbf_cones(reader: _CbfReader, count: int, what: str) -> list[ConeDescriptor]:
    cones = []
    for _ in range(count):
        ln, tokens = reader.take(f"{what} cone line")
        if len(tokens) != 2:
            raise ParseError(f"expected 'CONE dim' in {what}", ln)
        kind = _CBF_CONES.get(tokens[0])
        if kind is None:
            raise UnsupportedFormatError(f"unsupported cone {tokens[0]!r}", ln)
        try:
            cones.append(ConeDescriptor(kind, _intval(tokens[1], ln, "cone dimension")))
        except ConePartitionError as exc:
            raise ParseError(str(exc), ln) from None
    return cones


def parse_cbf_subset(text: str) -> tuple[ConicProgram, ParseDiagnostics]:
    """Parse the supported CBF slice (see module docstring).

    Every keyword outside the subset raises UnsupportedFormatError naming it,
    so unsupported inputs fail loudly rather than being silently truncated.
    """
    diags = ParseDiagnostics()
    reader = _CbfReader(text)
    sense = None
    var_cones = row_cones = None
    n = m = None
    obj_entries: list[tuple[int, int, float]] = []
    obj_offset = 0.0
    a_entries: list[tuple[int, int, int, float]] = []
    b_entries: list[tuple[int, int, float]] = []
    saw_ver = False

    while not reader.done():
        ln, tokens = reader.take("keyword")
        keyword = tokens[0]
        if keyword == "VER":
            vln, vtok = reader.take("version")
            version = _intval(vtok[0], vln, "version")
            if version not in (1, 2, 3, 4):
                raise UnsupportedFormatError(f"unsupported version {version}", vln)
            saw_ver = True
        elif keyword == "OBJSENSE":
            sln, stok = reader.take("objective sense")
            if stok[0] == "MIN":
                sense = "min"
            elif stok[0] == "MAX":
                sense = "max"
            else:
                raise ParseError(f"bad objective sense {stok[0]!r}", sln)
        elif keyword == "VAR":
            hln, htok = reader.take("variable header")
            if len(htok) != 2:
                raise ParseError("VAR header must be 'n blocks'", hln)
            n = _intval(htok[0], hln, "variable count")
            var_cones = _cbf_cones(reader, _intval(htok[1], hln, "block count"), "VAR")
        elif keyword == "CON":
            hln, htok = reader.take("constraint header")
            if len(htok) != 2:
                raise ParseError("CON header must be 'm blocks'", hln)
            m = _intval(htok[0], hln, "constraint count")
            row_cones = _cbf_cones(reader, _intval(htok[1], hln, "block count"), "CON")
        elif keyword == "OBJACOORD":
            hln, htok = reader.take("objective entry count")
            for _ in range(_intval(htok[0], hln, "entry count")):
                eln, etok = reader.take("objective entry")
                if len(etok) != 2:
                    raise ParseError("expected 'index value'", eln)
                obj_entries.append((eln, _intval(etok[0], eln, "index"),
                                    _floatval(etok[1], eln, "value")))
        elif keyword == "OBJBCOORD":
            oln, otok = reader.take("objective offset")
            obj_offset = _floatval(otok[0], oln, "objective offset")
        elif keyword == "ACOORD":
            hln, htok = reader.take("matrix entry count")
            for _ in range(_intval(htok[0], hln, "entry count")):
                eln, etok = reader.take("matrix entry")
                if len(etok) != 3:
                    raise ParseError("expected 'row col value'", eln)
                a_entries.append((eln, _intval(etok[0], eln, "row"),
                                  _intval(etok[1], eln, "col"),
                                  _floatval(etok[2], eln, "value")))
        elif keyword == "BCOORD":
            hln, htok = reader.take("rhs entry count")
            for _ in range(_intval(htok[0], hln, "entry count")):
                eln, etok = reader.take("rhs entry")
                if len(etok) != 2:
                    raise ParseError("expected 'row value'", eln)
                b_entries.append((eln, _intval(etok[0], eln, "row"),
                                  _floatval(etok[1], eln, "value")))
        else:
            raise UnsupportedFormatError(f"unsupported CBF keyword {keyword!r}", ln)

    if not saw_ver:
        diags.warn(0, "missing VER section")
    if sense is None:
        diags.warn(0, "missing OBJSENSE; assuming MIN")
        sense = "min"
    if n is None or var_cones is None:
        raise ParseError("missing VAR section")
    if m is None or row_cones is None:
        raise ParseError("missing CON section")
    if sum(c.dim for c in var_cones) != n:
        raise ParseError("VAR cone dimensions do not sum to the variable count")
    if sum(c.dim for c in row_cones) != m:
        raise ParseError("CON cone dimensions do not sum to the constraint count")

    c = np.zeros(n)
    for ln, j, v in obj_entries:
        if not 0 <= j < n:
            raise ParseError(f"objective index {j} out of range [0, {n})", ln)
        c[j] = v
    b = np.zeros(m)
    for ln, i, v in b_entries:
        if not 0 <= i < m:
            raise ParseError(f"rhs index {i} out of range [0, {m})", ln)
        b[i] = v
    a_rows = np.array([e[1] for e in a_entries], dtype=int)
    a_cols = np.array([e[2] for e in a_entries], dtype=int)
    a_vals = np.array([e[3] for e in a_entries], dtype=float)
    if a_rows.size:
        if a_rows.min() < 0 or (a_rows.max() >= m):
            raise ParseError("matrix row index out of range")
        if a_cols.min() < 0 or (a_cols.max() >= n):
            raise ParseError("matrix column index out of range")

    # CBF states constraints as A x + b in K; the native orientation is
    # b - A x in K, so the matrix flips sign.
    program = ConicProgram(
        n=n, m=m, sense=sense, c=c, b=b, a_rows=a_rows, a_cols=a_cols,
        a_vals=-a_vals, row_cones=tuple(row_cones), var_cones=tuple(var_cones),
        obj_offset=obj_offset)
    return program, diags
