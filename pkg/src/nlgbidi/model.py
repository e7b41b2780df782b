"""Canonical data model: terms, triples, triple sets and corpus records.

Every term keeps the text exactly as read from the corpus next to a
canonical form used for all comparisons.  The canonical form is lowercase
printable ASCII with underscores turned into spaces, camelCase boundaries
split, and whitespace trimmed and collapsed.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import EmptyTerm, MalformedTriple, NlgBidiError

SPLITS = ("train", "validation", "test")
SOURCES = ("webnlg", "wikibio-synthetic")

_WS = re.compile(r"\s+")
_NON_PRINTABLE = re.compile(r"[^\x20-\x7e]")


def _ascii_fold(text: str) -> str:
    decomposed = unicodedata.normalize("NFKD", text)
    stripped = "".join(c for c in decomposed if not unicodedata.combining(c))
    return stripped.encode("ascii", "ignore").decode("ascii")


def _split_camel(text: str) -> str:
    out = []
    prev = ""
    for ch in text:
        if prev.islower() and ch.isupper():
            out.append(" ")
        out.append(ch)
        prev = ch
    return "".join(out)


def fold_text(text: str, lowercase: bool = True) -> str:
    """ASCII-fold free text, collapse whitespace and optionally lowercase.

    Used for reference sentences and hypotheses; unlike term
    canonicalization it leaves underscores and camelCase untouched.
    """
    if lowercase:
        text = text.casefold()
    text = _WS.sub(" ", _ascii_fold(text))
    return _NON_PRINTABLE.sub("", text).strip()


def canonical_form(raw: str) -> str:
    text = _split_camel(raw.replace("_", " "))
    text = _ascii_fold(text.casefold()).lower()
    # ";" terminates a triple in the flat format, so it cannot survive inside a term.
    text = _WS.sub(" ", text.replace("_", " ").replace(";", ","))
    text = _NON_PRINTABLE.sub("", text)
    return _WS.sub(" ", text).strip()


@dataclass(frozen=True)
class Term:
    canonical: str
    raw: str = field(default="", compare=False)

    def __str__(self) -> str:
        return self.canonical


def canonicalize_term(raw: str) -> Term:
    canonical = canonical_form(raw)
    if not canonical:
        raise EmptyTerm(raw)
    return Term(canonical=canonical, raw=raw)


@dataclass(frozen=True)
class Triple:
    subject: Term
    relation: Term
    object: Term

    def __post_init__(self):
        for term in self.terms:
            if "|" in term.canonical:
                raise MalformedTriple(self.raw_text(), 0)

    @classmethod
    def of(cls, subject: str, relation: str, object: str) -> Triple:
        return cls(canonicalize_term(subject), canonicalize_term(relation), canonicalize_term(object))

    @property
    def terms(self) -> tuple[Term, Term, Term]:
        return (self.subject, self.relation, self.object)

    @property
    def key(self) -> str:
        """Canonical single-string form, also the serialized triple minus its terminator."""
        return " | ".join(t.canonical for t in self.terms)

    def raw_text(self) -> str:
        return " | ".join(t.raw or t.canonical for t in self.terms)

    def __str__(self) -> str:
        return self.key


def triples_equal(a: Triple, b: Triple) -> bool:
    return a.terms == b.terms


class TripleSet:
    """Ordered triples with set semantics for equality and hashing."""

    __slots__ = ("triples", "_keys")

    def __init__(self, triples: Iterable[Triple] = ()):
        self.triples: tuple[Triple, ...] = tuple(triples)
        self._keys = frozenset(t.key for t in self.triples)

    @classmethod
    def from_raw(cls, rows: Iterable[Sequence[str]]) -> TripleSet:
        triples = []
        for index, row in enumerate(rows):
            if len(row) != 3:
                raise MalformedTriple(" | ".join(map(str, row)), index)
            triples.append(Triple.of(*row))
        return cls(triples)

    def keys(self) -> frozenset[str]:
        return self._keys

    def unique(self) -> tuple[Triple, ...]:
        """Distinct triples in first-occurrence order."""
        seen: set[str] = set()
        out = []
        for t in self.triples:
            if t.key not in seen:
                seen.add(t.key)
                out.append(t)
        return tuple(out)

    def __iter__(self):
        return iter(self.triples)

    def __len__(self) -> int:
        return len(self.triples)

    def __bool__(self) -> bool:
        return bool(self.triples)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TripleSet):
            return NotImplemented
        return self._keys == other._keys

    def __hash__(self) -> int:
        return hash(self._keys)

    def __repr__(self) -> str:
        return f"TripleSet({[t.key for t in self.triples]!r})"


@dataclass(frozen=True)
class Record:
    id: int
    triples: TripleSet
    references: tuple[str, ...]
    split: str = "train"
    source: str = "webnlg"

    def __post_init__(self):
        if not isinstance(self.id, int) or isinstance(self.id, bool) or self.id < 0:
            raise NlgBidiError(f"record id must be a non-negative integer, got {self.id!r}")
        if not self.references:
            raise NlgBidiError(f"record {self.id} has no references")
        if self.split not in SPLITS:
            raise NlgBidiError(f"record {self.id}: unknown split {self.split!r}")
        if self.source not in SOURCES:
            raise NlgBidiError(f"record {self.id}: unknown source {self.source!r}")

    def to_json(self, canonical: bool = False) -> dict:
        if canonical:
            triples = [[t.canonical for t in tr.terms] for tr in self.triples]
            references = [fold_text(r, lowercase=False) for r in self.references]
        else:
            triples = [[t.raw or t.canonical for t in tr.terms] for tr in self.triples]
            references = list(self.references)
        return {
            "id": self.id,
            "triples": triples,
            "references": references,
            "split": self.split,
            "source": self.source,
        }
