"""Plain-text layout of alignments and the matching parser.

Each alignment row becomes one line with its row number at both margins.
Between consecutive rows a connector line carries a '|' under every column
whose hits continue downward.  A '|' also passes through rows that have no
symbol in such a column.  Every column is as wide as its widest symbol.
"""

from __future__ import annotations

from dataclasses import dataclass

from .alignment import Alignment
from .errors import RenderError

PIPE = "|"


def _layout(a: Alignment):
    widths = [len(a.symbol(c)) for c in range(len(a.columns))]
    offsets = []
    x = 0
    for w in widths:
        offsets.append(x)
        x += w + 1
    return offsets, max(x - 1, 0)


def render_alignment_ascii(a: Alignment) -> str:
    if not a.is_legal():
        raise RenderError("cannot lay out an illegal alignment")
    for c in range(len(a.columns)):
        if a.symbol(c) == PIPE:
            raise RenderError("the symbol '|' cannot be laid out unambiguously")
    offsets, width = _layout(a)
    nrows = len(a.rows)
    label_w = len(str(nrows - 1))
    # rows spanned by each column's vertical line
    spans = []
    for cells in a.columns:
        rows = [r for r, _ in cells]
        spans.append((min(rows), max(rows)) if len(rows) > 1 else None)

    def line(chars, label=""):
        text = "".join(chars).rstrip()
        left = label.rjust(label_w) if label != "" else " " * label_w
        body = text.ljust(width)
        if label == "":
            return (left + " " + text).rstrip()
        return f"{left} {body} {label}"

    out = []
    for r in range(nrows):
        chars = [" "] * width
        for c, cells in enumerate(a.columns):
            pos = next((p for rr, p in cells if rr == r), None)
            x = offsets[c]
            if pos is not None:
                sym = a.rows[r][pos]
                chars[x : x + len(sym)] = sym
            elif spans[c] and spans[c][0] < r < spans[c][1]:
                chars[x] = PIPE
        out.append(line(chars, str(r)))
        if r < nrows - 1:
            conn = [" "] * width
            for c, span in enumerate(spans):
                if span and span[0] <= r < span[1]:
                    conn[offsets[c]] = PIPE
            out.append(line(conn))
    return "\n".join(out) + "\n"


@dataclass(frozen=True)
class ParsedAlignment:
    rows: tuple[tuple[str, ...], ...]
    # cells (row, position) per column, left to right
    columns: tuple[tuple[tuple[int, int], ...], ...]


def parse_alignment_ascii(text: str) -> ParsedAlignment:
    """Recover the row and column structure from a rendered block."""
    lines = text.rstrip("\n").split("\n")
    if len(lines) % 2 != 1:
        raise RenderError("a rendered alignment has an odd number of lines")
    label_w = len(str(len(lines) // 2))
    sym_lines = lines[0::2]
    conn_lines = lines[1::2]

    def body(s):
        return s[label_w + 1 :]

    def pipe_at(s, x):
        b = body(s)
        return x < len(b) and b[x] == PIPE

    tokens_by_row = []
    for r, raw in enumerate(sym_lines):
        label = raw[:label_w].strip()
        if label != str(r):
            raise RenderError(f"row {r}: bad left margin {label!r}")
        b = body(raw).rstrip()
        if not b.endswith(str(r)):
            raise RenderError(f"row {r}: bad right margin")
        b = b[: len(b) - len(str(r))]
        toks = []
        x = 0
        for part in b.split(" "):
            if part:
                toks.append((x, part))
            x += len(part) + 1
        kept = []
        for x, t in toks:
            through = (
                t == PIPE
                and 0 < r < len(sym_lines) - 1
                and pipe_at(conn_lines[r - 1], x)
                and pipe_at(conn_lines[r], x)
            )
            if not through:
                kept.append((x, t))
        tokens_by_row.append(kept)
    xs = sorted({x for toks in tokens_by_row for x, _ in toks})
    col_index = {x: i for i, x in enumerate(xs)}
    columns: list[list[tuple[int, int]]] = [[] for _ in xs]
    rows = []
    for r, toks in enumerate(tokens_by_row):
        rows.append(tuple(t for _, t in toks))
        for pos, (x, _) in enumerate(toks):
            columns[col_index[x]].append((r, pos))
    return ParsedAlignment(tuple(rows), tuple(tuple(c) for c in columns))
