"""Lossless compression of triple sets by binding repeated terms to variables.

A compressed document looks like::

    let A = "spirit of future yet to come";
    $A | appears in | a christmas carol ; $A | is a | ghost ;

Binding lines come first, one per line, followed by the body.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass

from .errors import DuplicateBinding, EmptyTripleSet, NlgBidiError, UnboundVariable
from .model import TripleSet
from .serde import parse_triples, serialize_triples

_BINDING = re.compile(r'^\s*let\s+([A-Z]+)\s*=\s*"([^"]*)"\s*;\s*$')
# Canonical terms are lowercase, so an uppercase run after "$" is always a variable.
_VAR_REF = re.compile(r"\$([A-Z]+)(?![A-Za-z0-9])")


@dataclass(frozen=True)
class Binding:
    var_name: str
    value: str

    def render(self) -> str:
        return f'let {self.var_name} = "{self.value}";'


@dataclass(frozen=True)
class CompressedDoc:
    bindings: tuple[Binding, ...]
    body: str

    def render(self) -> str:
        return "\n".join([b.render() for b in self.bindings] + [self.body])

    @classmethod
    def parse(cls, text: str) -> CompressedDoc:
        bindings = []
        body_lines = []
        for line in text.splitlines():
            m = _BINDING.match(line)
            if m and not body_lines:
                bindings.append(Binding(m.group(1), m.group(2)))
            elif line.strip():
                body_lines.append(line.strip())
        return cls(tuple(bindings), "\n".join(body_lines))


@dataclass(frozen=True)
class SavingsStats:
    serialized_chars: int
    compressed_chars: int
    serialized_tokens: int
    compressed_tokens: int
    bindings: int

    @property
    def percent_saved(self) -> float:
        return 100.0 * (self.serialized_chars - self.compressed_chars) / self.serialized_chars


def var_name(index: int) -> str:
    """A, B, ..., Z, AA, AB, ... (bijective base 26)."""
    name = ""
    index += 1
    while index:
        index, rem = divmod(index - 1, 26)
        name = chr(ord("A") + rem) + name
    return name


def is_profitable(occurrences: int, length: int, name_length: int = 1) -> bool:
    # Each use saves len - (1 + |name|) chars; the binding line costs len + 11 + |name|
    # including its newline. With single-letter names: k(len-2) > len + 12.
    return occurrences * (length - 1 - name_length) > length + 11 + name_length


def compress(ts: TripleSet, min_occurrences: int = 2) -> CompressedDoc:
    if not ts:
        raise EmptyTripleSet("cannot compress an empty triple set")
    counts: Counter[str] = Counter()
    order: list[str] = []
    for triple in ts:
        for term in triple.terms:
            if term.canonical not in counts:
                order.append(term.canonical)
            counts[term.canonical] += 1

    bound: dict[str, str] = {}
    for value in order:
        k = counts[value]
        if k < min_occurrences or '"' in value:
            continue
        name = var_name(len(bound))
        if is_profitable(k, len(value), len(name)):
            bound[value] = name

    body = " ".join(
        " | ".join(f"${bound[t.canonical]}" if t.canonical in bound else t.canonical for t in triple.terms) + " ;"
        for triple in ts
    )
    return CompressedDoc(tuple(Binding(n, v) for v, n in bound.items()), body)


def expand(doc: CompressedDoc) -> str:
    """Substitute every variable reference in the body, returning flat text."""
    table: dict[str, str] = {}
    for b in doc.bindings:
        if b.var_name in table:
            raise DuplicateBinding(b.var_name)
        if not b.value:
            raise NlgBidiError(f"binding {b.var_name} has an empty value")
        table[b.var_name] = b.value

    def sub(m: re.Match) -> str:
        try:
            return table[m.group(1)]
        except KeyError:
            raise UnboundVariable(m.group(1)) from None

    return _VAR_REF.sub(sub, doc.body)


def decompress(doc: CompressedDoc) -> TripleSet:
    return parse_triples(expand(doc))


def savings_report(ts: TripleSet) -> SavingsStats:
    flat = serialize_triples(ts)
    doc = compress(ts)
    packed = doc.render()
    return SavingsStats(
        serialized_chars=len(flat),
        compressed_chars=len(packed),
        serialized_tokens=len(flat.split()),
        compressed_tokens=len(packed.split()),
        bindings=len(doc.bindings),
    )
