"""Text formats for families, L-sets and matrices.

Family file::

    # optional comments
    n=8
    1 2
    1 2 3 4

Matrix file: first line ``rows cols``, then row-major integer or ``p/q`` entries.
"""
from __future__ import annotations

from fractions import Fraction
from pathlib import Path

from .core import Family, FamilyError, LSet, Subset


class ParseError(FamilyError):
    def __init__(self, msg: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line is not None else msg)


def parse_family(text: str) -> Family:
    n = None
    members = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if n is None:
            key, sep, val = line.replace(" ", "").partition("=")
            if key != "n" or not sep:
                raise ParseError(f"expected 'n=<int>', got {line!r}", lineno)
            try:
                n = int(val)
            except ValueError:
                raise ParseError(f"bad ground set size {val!r}", lineno) from None
            if n < 1:
                raise ParseError("ground set size must be positive", lineno)
            continue
        try:
            elems = [int(tok) for tok in line.split()]
        except ValueError:
            raise ParseError(f"non-integer element in {line!r}", lineno) from None
        if elems != sorted(set(elems)):
            raise ParseError("elements must be strictly ascending", lineno)
        try:
            members.append(Subset.from_elements(elems, n))
        except FamilyError as exc:
            raise ParseError(str(exc), lineno) from None
    if n is None:
        raise ParseError("missing 'n=<int>' header")
    try:
        return Family(n, members)
    except FamilyError as exc:
        raise ParseError(str(exc)) from None


def format_family(F: Family, comment: str | None = None) -> str:
    if any(s.mask == 0 for s in F.members):
        raise FamilyError("the empty set has no line in the family text format")
    lines = []
    if comment:
        lines.extend(f"# {c}" for c in comment.splitlines())
    lines.append(f"n={F.ground_n}")
    lines.extend(" ".join(map(str, s.elements())) for s in F.members)
    return "\n".join(lines) + "\n"


def read_family(path: str | Path) -> Family:
    return parse_family(Path(path).read_text())


def write_family(F: Family, path: str | Path, comment: str | None = None) -> None:
    Path(path).write_text(format_family(F, comment))


def parse_lset(text: str) -> LSet:
    return LSet.parse(text)


def format_lset(L: LSet) -> str:
    return str(L)


def parse_matrix(text: str) -> list[list[Fraction]]:
    tokens = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            tokens.extend((tok, lineno) for tok in line.split())
    if len(tokens) < 2:
        raise ParseError("missing 'rows cols' header")
    try:
        rows, cols = int(tokens[0][0]), int(tokens[1][0])
    except ValueError:
        raise ParseError("header must be two integers", tokens[0][1]) from None
    body = tokens[2:]
    if len(body) != rows * cols:
        raise ParseError(f"expected {rows * cols} entries, found {len(body)}")
    vals = []
    for tok, lineno in body:
        try:
            vals.append(Fraction(tok))
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"bad entry {tok!r}", lineno) from None
    return [vals[r * cols:(r + 1) * cols] for r in range(rows)]


def format_matrix(M) -> str:
    rows = len(M)
    cols = len(M[0]) if rows else 0
    out = [f"{rows} {cols}"]
    out.extend(" ".join(str(Fraction(x)) for x in row) for row in M)
    return "\n".join(out) + "\n"
