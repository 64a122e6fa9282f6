"""Grid notation for frameworks, dialogue parsing and the built-in fixtures.

Grammar (one row per line)::

    document := [ "opener:" ("p"|"q") NL ] row { NL row }
    row      := cell { "|" cell }
    cell     := "-" | entry { "," entry }
    entry    := [ "*" ] ("y"|"n") ( "[" rational "]" | "(" rational ")" )
    rational := INT [ "/" INT ]

Rows are agent p's cells, columns agent q's.  ``y`` states belong to the event,
the starred entry is the true state.  Blank lines are ignored.
"""
from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .model import Framework, FrameworkError, Partition, drop_null_states, require_valid
from .rationalizer import SILENCE, Dialogue, RationalizationError, expand_silence

FIXTURE_DIR_ENV = "RATIONAL_DIALOGUES_FIXTURES"


class MatrixParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Entry:
    in_event: bool
    mass: Fraction
    starred: bool = False


@dataclass(frozen=True)
class MatrixDocument:
    rows: tuple[tuple[tuple[Entry, ...], ...], ...]
    opener: str = "p"

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), len(self.rows[0]) if self.rows else 0


_ENTRY = re.compile(r"\s*(\*?)\s*([yn])\s*(?:\[\s*([^\]]*?)\s*\]|\(\s*([^)]*?)\s*\))\s*")
_RATIONAL = re.compile(r"(\d+)(?:\s*/\s*(\d+))?")
_OPENER = re.compile(r"\s*opener\s*:\s*(\S+)\s*")


def _parse_rational(text: str, line: int, col: int) -> Fraction:
    m = _RATIONAL.fullmatch(text)
    if not m:
        raise MatrixParseError(f"malformed rational {text!r}", line, col)
    num, den = int(m.group(1)), int(m.group(2) or 1)
    if den == 0:
        raise MatrixParseError(f"zero denominator in {text!r}", line, col)
    return Fraction(num, den)


def _parse_cell(text: str, line: int, col: int) -> tuple[Entry, ...]:
    if text.strip() == "-":
        return ()
    if not text.strip():
        raise MatrixParseError("empty cell (write '-' for a cell without states)", line, col)
    entries = []
    offset = 0
    for chunk in text.split(","):
        m = _ENTRY.fullmatch(chunk)
        here = col + offset + len(chunk) - len(chunk.lstrip())
        if not m:
            raise MatrixParseError(f"malformed entry {chunk.strip()!r}", line, here)
        raw = m.group(3) if m.group(3) is not None else m.group(4)
        entries.append(Entry(m.group(2) == "y", _parse_rational(raw, line, here), bool(m.group(1))))
        offset += len(chunk) + 1
    return tuple(entries)


def parse_matrix(text: str) -> MatrixDocument:
    opener = "p"
    rows = []
    width = None
    seen_row = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        m = _OPENER.fullmatch(raw)
        if m and not seen_row:
            if m.group(1) not in ("p", "q"):
                raise MatrixParseError(f"opener must be p or q, got {m.group(1)!r}", lineno, 1)
            opener = m.group(1)
            continue
        seen_row = True
        cells = []
        col = 1
        for part in raw.split("|"):
            cells.append(_parse_cell(part, lineno, col))
            col += len(part) + 1
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise MatrixParseError(f"row has {len(cells)} cells, expected {width} (grid is not rectangular)", lineno)
        rows.append(tuple(cells))
    if not rows:
        raise MatrixParseError("empty document")
    stars = sum(e.starred for row in rows for cell in row for e in cell)
    if stars == 0:
        raise MatrixParseError("missing fixed state (mark one entry with '*')")
    if stars > 1:
        raise MatrixParseError(f"{stars} entries are starred; exactly one fixed state is allowed")
    if not any(e.mass > 0 for row in rows for cell in row for e in cell):
        raise MatrixParseError("no entry has positive mass")
    return MatrixDocument(tuple(rows), opener)


def matrix_to_framework(doc: MatrixDocument, opener: str | None = None) -> tuple[Framework, int]:
    """Rows become p's cells, columns q's cells; zero-mass entries are dropped.

    A row or column made only of zero-mass placeholders carries no states and is
    skipped; the staged example grids use such placeholder lines.
    """
    labels, mass, event, row_of, col_of = [], [], [], [], []
    star = None
    for r, row in enumerate(doc.rows):
        for c, cell in enumerate(row):
            for k, e in enumerate(cell):
                idx = len(labels)
                suffix = "" if len(cell) == 1 else chr(ord("a") + k) if k < 26 else f"_{k}"
                labels.append(f"{'y' if e.in_event else 'n'}{r + 1}.{c + 1}{suffix}")
                mass.append(e.mass)
                if e.in_event:
                    event.append(idx)
                row_of.append(r)
                col_of.append(c)
                if e.starred:
                    star = idx
    if star is None:
        raise FrameworkError("missing fixed state")
    if mass[star] <= 0:
        raise FrameworkError("the starred entry has zero mass")
    n = len(labels)
    live = [i for i in range(n) if mass[i] > 0]
    # placeholder lines hold only zero-mass states; park those on a live line
    # so they vanish with the rest of the zero-mass states
    parts = []
    for line_of in (row_of, col_of):
        live_lines = {line_of[i] for i in live}
        fallback = line_of[live[0]]
        cells: dict[int, list[int]] = {}
        for i in range(n):
            cells.setdefault(line_of[i] if line_of[i] in live_lines else fallback, []).append(i)
        parts.append(Partition(tuple(tuple(cells[k]) for k in sorted(cells)), n))
    fw = drop_null_states(labels, mass, event, tuple(parts), opener or doc.opener)
    return fw, live.index(star)


def _fmt(x: Fraction) -> str:
    return str(Fraction(x))


def emit_matrix(fw: Framework, omega_star: int) -> str:
    """Canonical grid text: p's cells as rows, q's cells as columns, in stored order."""
    require_valid(fw)
    col_of = fw.partition_q.cell_of
    ncols = len(fw.partition_q)
    lines = [] if fw.opener == "p" else ["opener: q"]
    for row in fw.partition_p.cells:
        grid: list[list[str]] = [[] for _ in range(ncols)]
        for s in sorted(row):
            tag = ("*" if s == omega_star else "") + ("y" if s in fw.event else "n")
            grid[col_of[s]].append(f"{tag}[{_fmt(fw.mass[s])}]")
        lines.append(" | ".join(",".join(g) if g else "-" for g in grid))
    return "\n".join(lines) + "\n"


def emit_document(doc: MatrixDocument) -> str:
    """Canonical text of a parsed grid, zero-mass placeholders included."""
    lines = [] if doc.opener == "p" else ["opener: q"]
    for row in doc.rows:
        cells = []
        for cell in row:
            if not cell:
                cells.append("-")
            else:
                cells.append(",".join(
                    f"{'*' if e.starred else ''}{'y' if e.in_event else 'n'}[{_fmt(e.mass)}]" for e in cell))
        lines.append(" | ".join(cells))
    return "\n".join(lines) + "\n"


def framework_to_dict(fw: Framework, omega_star: int | None = None) -> dict:
    out = {
        "states": list(fw.labels),
        "masses": [_fmt(m) for m in fw.mass],
        "event": sorted(fw.event),
        "partition_p": [list(c) for c in fw.partition_p.cells],
        "partition_q": [list(c) for c in fw.partition_q.cells],
        "opener": fw.opener,
    }
    if omega_star is not None:
        out["omega_star"] = omega_star
    return out


def framework_from_dict(data: dict) -> tuple[Framework, int | None]:
    n = len(data["states"])
    fw = Framework(
        labels=tuple(data["states"]),
        mass=tuple(Fraction(m) for m in data["masses"]),
        event=frozenset(data["event"]),
        partition_p=Partition(tuple(tuple(c) for c in data["partition_p"]), n),
        partition_q=Partition(tuple(tuple(c) for c in data["partition_q"]), n),
        opener=data.get("opener", "p"),
    )
    return require_valid(fw), data.get("omega_star")


def export_json(fw: Framework, omega_star: int | None = None) -> str:
    return json.dumps(framework_to_dict(fw, omega_star), indent=2) + "\n"


_DECIMAL = re.compile(r"(\d*)\.(\d+)|(\d+)\.")


def parse_opinion(token: str) -> Fraction:
    """An exact rational in [0, 1]: ``3/4``, ``1`` or a decimal such as ``0.25``."""
    tok = token.strip()
    if re.fullmatch(r"\d+\s*/\s*\d+|\d+", tok):
        num, _, den = tok.partition("/")
        if den and int(den) == 0:
            raise RationalizationError(f"zero denominator in {token!r}")
        value = Fraction(int(num), int(den) if den else 1)
    elif _DECIMAL.fullmatch(tok):
        value = Fraction(tok)
    else:
        raise RationalizationError(f"not an exact rational: {token!r}")
    if not 0 <= value <= 1:
        raise RationalizationError(f"opinion {tok} is outside [0, 1]")
    return value


def parse_dialogue(text: str) -> Dialogue:
    """Whitespace- or comma-separated opinions; ``_`` marks a silent turn."""
    tokens = [t for t in re.split(r"[\s,]+", text.strip()) if t]
    if not tokens:
        raise RationalizationError("empty dialogue")
    tape = [SILENCE if t == "_" else parse_opinion(t) for t in tokens]
    return expand_silence(tape)


def format_dialogue(opinions) -> str:
    return " ".join(_fmt(b) for b in opinions)


_FIXTURES = {
    "example-5x5": """\
*y[3/4],n[1/4] | y[0] | n[2] | y[0] | n[0]
y[0] | y[1/4] | n(3/4) | y[0] | n[0]
n[2] | y[2/3] | n[0] | y[0] | n[0]
y[0] | y[0] | y[1] | y[0] | n[3]
n[0] | n[11/4] | n[1/4] | y[1] | n[0]
""",
    "didactic-5x5": """\
*y[3/4],n[1/4] | y[0] | n[0] | y[0] | n[0]
y[0] | y[3/4] | n(1/4) | y[0] | n[0]
n[2] | y[6] | n[0] | y[0] | n[0]
y[0] | y[0] | y[1/12] | y[0] | n[1/36]
n[0] | n[81/4] | n[0] | y[243/4] | n[0]
""",
    "example-stage-1": """\
*y[3/4],n[1/4]
""",
    "example-stage-2": """\
opener: q
*y[3/4],n[1/4]
y[0]
n[2]
""",
    "example-stage-3": """\
*y[3/4],n[1/4] | y[0] | n[2]
y[0] | y[1/4] | n(3/4)
n[2] | y[2/3] | n[0]
""",
}


def fixture_names() -> list[str]:
    return list(_FIXTURES)


def fixture_text(name: str) -> str:
    """Raw text of a fixture; files in ``$RATIONAL_DIALOGUES_FIXTURES`` take precedence."""
    override = os.environ.get(FIXTURE_DIR_ENV)
    if override:
        path = Path(override) / f"{name}.txt"
        if path.is_file():
            return path.read_text(encoding="utf-8")
    if name not in _FIXTURES:
        raise KeyError(f"unknown fixture {name!r}")
    return _FIXTURES[name]


def builtin_fixtures() -> dict[str, MatrixDocument]:
    return {name: parse_matrix(fixture_text(name)) for name in _FIXTURES}


def load_fixture(name: str) -> MatrixDocument:
    return parse_matrix(fixture_text(name))
