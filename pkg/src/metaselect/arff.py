"""Minimal ARFF reader/writer covering the subset used by ASlib scenarios.

Supported: ``@relation``, ``@attribute`` with numeric/real/integer, string and
nominal ``{...}`` types, dense ``@data`` rows, ``%`` comments and ``?`` for
missing values. Sparse rows, dates and relational attributes are rejected.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Sequence

from .errors import ArityMismatch, ArffError, BadNumeric, MalformedHeader


class _Missing:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "MISSING"

    def __reduce__(self):
        return (_Missing, ())


MISSING = _Missing()

NUMERIC = "numeric"
CATEGORICAL = "categorical"
TEXT = "text"

_NUMERIC_TYPES = {"numeric", "real", "integer"}


class BadCategory(ArffError):
    pass


@dataclass(frozen=True)
class Attribute:
    name: str
    kind: str
    levels: tuple[str, ...] = ()


@dataclass
class RelationTable:
    relation_name: str
    attributes: list[Attribute]
    rows: list[tuple] = field(default_factory=list)

    @property
    def names(self) -> list[str]:
        return [a.name for a in self.attributes]

    def column(self, name: str) -> list:
        lowered = [n.lower() for n in self.names]
        try:
            j = lowered.index(name.lower())
        except ValueError:
            raise KeyError(name) from None
        return [row[j] for row in self.rows]


def split_row(line: str, lineno: int | None = None) -> list[tuple[str, bool]]:
    """Split on commas outside quotes.

    Returns ``(token, was_quoted)`` pairs; an unquoted ``%`` ends the line.
    """
    tokens: list[tuple[str, bool]] = []
    buf: list[str] = []
    quoted = False
    quote = None
    i = 0
    n = len(line)
    while i < n:
        ch = line[i]
        if quote is not None:
            if ch == "\\" and i + 1 < n:
                buf.append(line[i + 1])
                i += 2
                continue
            if ch == quote:
                quote = None
            else:
                buf.append(ch)
        elif ch in "'\"":
            quote = ch
            quoted = True
            if not "".join(buf).strip():
                buf = []
        elif ch == ",":
            tokens.append(_finish(buf, quoted))
            buf, quoted = [], False
        elif ch == "%":
            break
        else:
            buf.append(ch)
        i += 1
    if quote is not None:
        raise ArffError("unterminated quote", lineno)
    tokens.append(_finish(buf, quoted))
    return tokens


def _finish(buf: list[str], quoted: bool) -> tuple[str, bool]:
    text = "".join(buf)
    return (text if quoted else text.strip(), quoted)


_ATTR_RE = re.compile(
    r"""^@attribute\s+(?:'((?:[^'\\]|\\.)*)'|"((?:[^"\\]|\\.)*)"|(\S+))\s+(.+?)\s*$""",
    re.IGNORECASE,
)


def _parse_attribute(line: str, lineno: int) -> Attribute:
    m = _ATTR_RE.match(line)
    if m is None:
        raise MalformedHeader(f"bad attribute declaration: {line!r}", lineno)
    name = next(g for g in m.groups()[:3] if g is not None)
    if m.group(3) is None:
        name = re.sub(r"\\(.)", r"\1", name)
    spec = m.group(4).strip()
    if spec.startswith("{"):
        if not spec.endswith("}"):
            raise MalformedHeader(f"unterminated nominal level list: {spec!r}", lineno)
        inner = spec[1:-1]
        levels = tuple(tok for tok, _ in split_row(inner, lineno) if tok != "")
        return Attribute(name, CATEGORICAL, levels)
    kind = spec.split()[0].lower()
    if kind in _NUMERIC_TYPES:
        return Attribute(name, NUMERIC)
    if kind == "string":
        return Attribute(name, TEXT)
    raise MalformedHeader(f"unsupported attribute type {spec!r}", lineno)


def _convert(token: str, quoted: bool, attr: Attribute, lineno: int):
    if token == "?" and not quoted:
        return MISSING
    if attr.kind == NUMERIC:
        try:
            return float(token)
        except ValueError:
            raise BadNumeric(
                f"non-numeric value {token!r} in numeric attribute {attr.name!r}", lineno
            ) from None
    if attr.kind == CATEGORICAL and token not in attr.levels:
        raise BadCategory(
            f"value {token!r} not a declared level of {attr.name!r}", lineno
        )
    return token


def parse_arff(text: str) -> RelationTable:
    """Parse the full content of an ARFF file."""
    relation = None
    attributes: list[Attribute] = []
    rows: list[tuple] = []
    in_data = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if not in_data:
            head = line.split(None, 1)[0].lower()
            if head == "@relation":
                parts = split_row(line[len("@relation"):].strip(), lineno)
                relation = parts[0][0] if parts else ""
            elif head == "@attribute":
                attributes.append(_parse_attribute(line, lineno))
            elif head == "@data":
                if not attributes:
                    raise MalformedHeader("@data before any @attribute", lineno)
                in_data = True
            else:
                raise MalformedHeader(f"unexpected header line: {line!r}", lineno)
            continue
        if line.startswith("{"):
            raise ArffError("sparse ARFF rows are not supported", lineno)
        tokens = split_row(line, lineno)
        if len(tokens) != len(attributes):
            raise ArityMismatch(
                f"row has {len(tokens)} cells, expected {len(attributes)}", lineno
            )
        rows.append(
            tuple(_convert(tok, q, a, lineno) for (tok, q), a in zip(tokens, attributes))
        )
    if not in_data:
        # Reported at the end of the file, where @data was still expected.
        raise MalformedHeader("missing @data section", max(1, len(text.splitlines())))
    return RelationTable(relation or "", attributes, rows)


_NEEDS_QUOTES = re.compile(r"[\s,'\"%{}?\\]")


def quote(token: str) -> str:
    if token == "" or _NEEDS_QUOTES.search(token):
        return "'" + token.replace("\\", "\\\\").replace("'", "\\'") + "'"
    return token


def _format_cell(value, attr: Attribute) -> str:
    if value is MISSING:
        return "?"
    if attr.kind == NUMERIC:
        value = float(value)
        if math.isnan(value):
            return "?"
        return repr(value)
    return quote(str(value))


def format_arff(table: RelationTable) -> str:
    lines = [f"@RELATION {quote(table.relation_name)}", ""]
    for attr in table.attributes:
        if attr.kind == NUMERIC:
            kind = "NUMERIC"
        elif attr.kind == TEXT:
            kind = "STRING"
        else:
            kind = "{" + ",".join(quote(lv) for lv in attr.levels) + "}"
        lines.append(f"@ATTRIBUTE {quote(attr.name)} {kind}")
    lines += ["", "@DATA"]
    for row in table.rows:
        if len(row) != len(table.attributes):
            raise ArityMismatch(f"row {row!r} does not match the attribute list")
        lines.append(",".join(_format_cell(v, a) for v, a in zip(row, table.attributes)))
    return "\n".join(lines) + "\n"


def numeric_attributes(names: Sequence[str]) -> list[Attribute]:
    return [Attribute(n, NUMERIC) for n in names]
