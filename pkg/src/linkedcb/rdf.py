"""RDF terms, triple sets and a deterministic N-Triples reader/writer.

There is deliberately no blank-node term: every subject is an :class:`Iri`,
so a :class:`TripleSet` can never serialize a ``_:`` line.
"""

from __future__ import annotations

import datetime as _dt
import gzip
import io
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Union

from .errors import (
    InvalidIriError,
    InvalidLiteralError,
    InvalidPermalinkError,
    InvalidTypeError,
    NTriplesSyntaxError,
)
from .namespaces import ENTITY_TYPES, XSD

XSD_STRING = XSD + "string"
XSD_DATE = XSD + "date"
XSD_GYEARMONTH = XSD + "gYearMonth"
XSD_GYEAR = XSD + "gYear"
XSD_BOOLEAN = XSD + "boolean"
XSD_DECIMAL = XSD + "decimal"
XSD_INTEGER = XSD + "integer"

_IRI_RE = re.compile(r'[A-Za-z][A-Za-z0-9+.\-]*:[^\x00-\x20<>"{}|^`\\\x7f]*\Z')
_LANG_RE = re.compile(r"[A-Za-z]{1,8}(-[A-Za-z0-9]{1,8})*\Z")
PERMALINK_RE = re.compile(r"[a-z0-9._-]+\Z")

_TZ = r"(Z|[+-](0\d|1[0-4]):[0-5]\d)?"
_XSD_LEXICAL = {
    XSD_DATE: re.compile(r"-?(\d{4,})-(\d\d)-(\d\d)" + _TZ + r"\Z"),
    XSD_GYEARMONTH: re.compile(r"-?\d{4,}-(0[1-9]|1[0-2])" + _TZ + r"\Z"),
    XSD_GYEAR: re.compile(r"-?\d{4,}" + _TZ + r"\Z"),
    XSD_BOOLEAN: re.compile(r"(true|false|1|0)\Z"),
    XSD_DECIMAL: re.compile(r"[+-]?(\d+(\.\d*)?|\.\d+)\Z"),
    XSD_INTEGER: re.compile(r"[+-]?\d+\Z"),
}


def _valid_lexical(lexical: str, datatype: str) -> bool:
    pattern = _XSD_LEXICAL.get(datatype)
    if pattern is None:
        return True
    m = pattern.match(lexical)
    if not m:
        return False
    if datatype == XSD_DATE:
        year, month, day = (int(g) for g in m.group(1, 2, 3))
        try:
            # year 0 and >9999 are legal xsd but outside datetime; check day range with a proxy year
            proxy = 2000 if year % 4 == 0 and (year % 100 != 0 or year % 400 == 0) else 2001
            _dt.date(proxy, month, day)
        except ValueError:
            return False
    return True


@dataclass(frozen=True, slots=True)
class Iri:
    value: str

    def __post_init__(self):
        if not isinstance(self.value, str) or not _IRI_RE.match(self.value):
            raise InvalidIriError(f"not an absolute IRI: {self.value!r}")

    def n3(self) -> str:
        return f"<{self.value}>"

    def __str__(self):
        return self.value


@dataclass(frozen=True, slots=True)
class Literal:
    lexical: str
    datatype: Optional[Iri] = None
    language: Optional[str] = None

    def __post_init__(self):
        if not isinstance(self.lexical, str):
            raise InvalidLiteralError(f"lexical form must be str, got {type(self.lexical).__name__}")
        if self.datatype is not None and self.language is not None:
            raise InvalidLiteralError("a literal cannot carry both datatype and language")
        if self.language is not None:
            if not _LANG_RE.match(self.language):
                raise InvalidLiteralError(f"bad language tag: {self.language!r}")
            object.__setattr__(self, "language", self.language.lower())
        if self.datatype is not None:
            if not isinstance(self.datatype, Iri):
                object.__setattr__(self, "datatype", Iri(self.datatype))
            if self.datatype.value == XSD_STRING:
                # RDF 1.1: simple literals are xsd:string
                object.__setattr__(self, "datatype", None)
            elif not _valid_lexical(self.lexical, self.datatype.value):
                raise InvalidLiteralError(
                    f"{self.lexical!r} is not in the lexical space of <{self.datatype.value}>"
                )

    def n3(self) -> str:
        out = f'"{escape_literal(self.lexical)}"'
        if self.datatype is not None:
            return f"{out}^^<{self.datatype.value}>"
        if self.language is not None:
            return f"{out}@{self.language}"
        return out

    def __str__(self):
        return self.lexical


Term = Union[Iri, Literal]


@dataclass(frozen=True, slots=True)
class Triple:
    subject: Iri
    predicate: Iri
    object: Term

    def __post_init__(self):
        if not isinstance(self.subject, Iri):
            raise TypeError("triple subject must be an Iri")
        if not isinstance(self.predicate, Iri):
            raise TypeError("triple predicate must be an Iri")
        if not isinstance(self.object, (Iri, Literal)):
            raise TypeError("triple object must be an Iri or Literal")

    def n3(self) -> str:
        return f"{self.subject.n3()} {self.predicate.n3()} {self.object.n3()} ."


class TripleSet:
    """Unordered set of triples with N-Triples output.

    Single-writer: build it up, then share it read-only.
    """

    __slots__ = ("_triples",)

    def __init__(self, triples: Iterable[Triple] = ()):
        self._triples = set()
        self.update(triples)

    def add(self, triple: Triple) -> None:
        if not isinstance(triple, Triple):
            raise TypeError(f"expected Triple, got {type(triple).__name__}")
        self._triples.add(triple)

    def update(self, triples: Iterable[Triple]) -> None:
        for t in triples:
            self.add(t)

    def __len__(self):
        return len(self._triples)

    def __iter__(self) -> Iterator[Triple]:
        return iter(self._triples)

    def __contains__(self, triple):
        return triple in self._triples

    def __eq__(self, other):
        if isinstance(other, TripleSet):
            return self._triples == other._triples
        return NotImplemented

    def __or__(self, other: "TripleSet") -> "TripleSet":
        out = TripleSet(self)
        out.update(other)
        return out

    def __repr__(self):
        return f"TripleSet({len(self)} triples)"

    def match(self, subject=None, predicate=None, obj=None) -> Iterator[Triple]:
        for t in self._triples:
            if subject is not None and t.subject != subject:
                continue
            if predicate is not None and t.predicate != predicate:
                continue
            if obj is not None and t.object != obj:
                continue
            yield t

    def lines(self) -> list[str]:
        # Sorting serialized lines equals sorting (s, p, o) serializations: a
        # term serialization can never be a proper prefix of another one
        # followed by a character sorting below the separating space.
        return sorted(t.n3() for t in self._triples)


def escape_literal(s: str) -> str:
    return (
        s.replace("\\", "\\\\")
        .replace('"', '\\"')
        .replace("\n", "\\n")
        .replace("\r", "\\r")
        .replace("\t", "\\t")
    )


_ESCAPE_RE = re.compile(r"\\(?:u([0-9A-Fa-f]{4})|U([0-9A-Fa-f]{8})|(.))", re.S)
_SIMPLE_ESCAPES = {"t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f", '"': '"', "'": "'", "\\": "\\"}


def unescape_literal(s: str) -> str:
    """Inverse of :func:`escape_literal`; also accepts ``\\uXXXX`` escapes."""

    def sub(m):
        if m.group(1) or m.group(2):
            return chr(int(m.group(1) or m.group(2), 16))
        c = m.group(3)
        if c not in _SIMPLE_ESCAPES:
            raise NTriplesSyntaxError(f"invalid escape \\{c}")
        return _SIMPLE_ESCAPES[c]

    return _ESCAPE_RE.sub(sub, s)


def serialize_ntriples(g: Iterable[Triple]) -> str:
    ts = g if isinstance(g, TripleSet) else TripleSet(g)
    return "".join(line + "\n" for line in ts.lines())


_UCHAR = r"\\u[0-9A-Fa-f]{4}|\\U[0-9A-Fa-f]{8}"
_IRIREF = r"<((?:[^\x00-\x20<>\"{}|^`\\]|" + _UCHAR + r")*)>"
_BNODE = r"_:[^\s]+"
_LITERAL = (
    r'"((?:[^"\\\n\r]|\\[tbnrf"\'\\]|' + _UCHAR + r')*)"'
    r"(?:\^\^" + _IRIREF + r"|@([A-Za-z]+(?:-[A-Za-z0-9]+)*))?"
)
_LINE_RE = re.compile(
    r"[ \t]*(?:" + _IRIREF + "|(" + _BNODE + r"))[ \t]*"
    + _IRIREF + r"[ \t]*"
    r"(?:" + _IRIREF + "|(" + _BNODE + ")|" + _LITERAL + r")"
    r"[ \t]*\.[ \t]*(?:#.*)?\Z"
)
_BLANK_OR_COMMENT = re.compile(r"[ \t]*(#.*)?\Z")


def parse_ntriples_line(line: str, line_no: Optional[int] = None) -> Optional[Triple]:
    """Parse one line; returns None for blank/comment lines."""
    line = line.rstrip("\r\n")
    if _BLANK_OR_COMMENT.match(line):
        return None
    m = _LINE_RE.match(line)
    if not m:
        raise NTriplesSyntaxError("malformed N-Triples line", line_no)
    s_iri, s_bnode, p_iri, o_iri, o_bnode, lex, dt, lang = m.groups()
    if s_bnode or o_bnode:
        raise NTriplesSyntaxError("blank nodes are not supported", line_no)
    try:
        subject = Iri(unescape_literal(s_iri))
        predicate = Iri(unescape_literal(p_iri))
        if o_iri is not None:
            obj = Iri(unescape_literal(o_iri))
        else:
            obj = Literal(
                unescape_literal(lex),
                datatype=Iri(unescape_literal(dt)) if dt is not None else None,
                language=lang,
            )
    except (InvalidIriError, InvalidLiteralError) as exc:
        raise NTriplesSyntaxError(str(exc), line_no) from exc
    return Triple(subject, predicate, obj)


def iter_ntriples(lines: Iterable[str], strict: bool = True, skipped: Optional[list] = None) -> Iterator[Triple]:
    """Yield triples from N-Triples lines.

    With ``strict=False`` unparseable lines (including blank-node lines) are
    dropped; their line numbers are appended to ``skipped`` when given.
    """
    for no, line in enumerate(lines, 1):
        try:
            t = parse_ntriples_line(line, no)
        except NTriplesSyntaxError:
            if strict:
                raise
            if skipped is not None:
                skipped.append(no)
            continue
        if t is not None:
            yield t


def parse_ntriples(text: str, strict: bool = True) -> TripleSet:
    return TripleSet(iter_ntriples(io.StringIO(text), strict=strict))


def open_text(path, mode: str = "r"):
    """Open a UTF-8 text file, transparently gzipped when the name ends in .gz."""
    path = str(path)
    if path.endswith(".gz"):
        if "w" in mode:
            raw = open(path, "wb")
            # fixed mtime and no embedded filename keep gzipped dumps byte-reproducible
            gz = gzip.GzipFile(filename="", mode="wb", fileobj=raw, mtime=0)
            return _closing(io.TextIOWrapper(gz, encoding="utf-8", newline="\n"), raw)
        return io.TextIOWrapper(gzip.open(path, "rb"), encoding="utf-8", newline="\n")
    return open(path, mode, encoding="utf-8", newline="\n")


def _closing(text, raw):
    class Wrapper:
        def __init__(self):
            self._text, self._raw = text, raw

        def write(self, s):
            return self._text.write(s)

        def close(self):
            self._text.close()
            self._raw.close()

        def __enter__(self):
            return self

        def __exit__(self, *exc):
            self.close()

    return Wrapper()


def read_ntriples_file(path, strict: bool = True) -> TripleSet:
    with open_text(path) as fh:
        return TripleSet(iter_ntriples(fh, strict=strict))


def write_ntriples_file(path, g: Iterable[Triple]) -> None:
    with open_text(path, "w") as fh:
        fh.write(serialize_ntriples(g))


def mint_entity_iri(base, entity_type: str, permalink: str) -> Iri:
    if entity_type not in ENTITY_TYPES:
        raise InvalidTypeError(f"unknown entity type: {entity_type!r}")
    if not isinstance(permalink, str) or not PERMALINK_RE.match(permalink):
        raise InvalidPermalinkError(f"invalid permalink: {permalink!r}")
    base = base.value if isinstance(base, Iri) else str(base)
    return Iri(f"{base.rstrip('/')}/api/{entity_type}/{permalink}")
