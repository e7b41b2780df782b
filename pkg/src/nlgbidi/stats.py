"""Descriptive corpus statistics shaped like the usual corpus tables."""

from __future__ import annotations

import csv
import io
import decimal
import math
from collections import Counter
from dataclasses import astuple, dataclass, fields
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import EmptyCorpus
from .model import Record

FIELDS = ("reference_text", "serialized_rdf")


@dataclass(frozen=True)
class LengthStats:
    mean: float
    std: float
    min: float
    p25: float
    p50: float
    p75: float
    max: float


@dataclass(frozen=True)
class RelationFrequency:
    relation: str
    count: int


@dataclass(frozen=True)
class ShapeStats:
    refs_per_record_mean: float
    triples_per_set_mean: float
    triples_per_set_std: float


def percentile(ordered: Sequence[float], q: float) -> float:
    """Linear interpolation between closest ranks (numpy's default method), rounded once."""
    pos = (len(ordered) - 1) * Fraction(q)
    lo = math.floor(pos)
    hi = min(lo + 1, len(ordered) - 1)
    a, b = Fraction(ordered[lo]), Fraction(ordered[hi])
    return float(a + (b - a) * (pos - lo))


def _sqrt(value: Fraction) -> float:
    with decimal.localcontext() as ctx:
        ctx.prec = 50
        return float((decimal.Decimal(value.numerator) / decimal.Decimal(value.denominator)).sqrt())


def describe(values: Iterable[float], sample_std: bool = False) -> LengthStats:
    """Summary statistics computed in exact arithmetic and rounded to float at the end."""
    ordered = sorted(Fraction(v) for v in values)
    if not ordered:
        raise EmptyCorpus("no values to describe")
    n = len(ordered)
    mean = sum(ordered, Fraction(0)) / n
    ddof = 1 if sample_std and n > 1 else 0
    variance = sum(((x - mean) ** 2 for x in ordered), Fraction(0)) / (n - ddof)
    return LengthStats(
        float(mean), _sqrt(variance), float(ordered[0]),
        percentile(ordered, 0.25), percentile(ordered, 0.5), percentile(ordered, 0.75),
        float(ordered[-1]),
    )


def raw_reference_text(record: Record) -> str:
    return " ".join(record.references)


def raw_serialized_rdf(record: Record) -> str:
    return " ".join(f"{t.raw_text()} ;" for t in record.triples)


def field_lengths(corpus: Iterable[Record], field: str, unit: str = "record") -> list[int]:
    """Raw character lengths of one text field.

    ``unit="record"`` measures a record's references joined by single spaces;
    ``unit="reference"`` measures each reference on its own.
    """
    if field not in FIELDS:
        raise ValueError(f"field must be one of {FIELDS}")
    if unit not in ("record", "reference"):
        raise ValueError("unit must be 'record' or 'reference'")
    lengths = []
    for r in corpus:
        if field == "serialized_rdf":
            lengths.append(len(raw_serialized_rdf(r)))
        elif unit == "reference":
            lengths.extend(len(ref) for ref in r.references)
        else:
            lengths.append(len(raw_reference_text(r)))
    return lengths


def length_stats(corpus: Iterable[Record], field: str, unit: str = "record", sample_std: bool = False) -> LengthStats:
    lengths = field_lengths(corpus, field, unit)
    if not lengths:
        raise EmptyCorpus("corpus is empty")
    return describe(lengths, sample_std)


def relation_frequency(corpus: Iterable[Record]) -> list[RelationFrequency]:
    counts = Counter(t.relation.canonical for r in corpus for t in r.triples)
    if not counts:
        raise EmptyCorpus("corpus is empty")
    return [RelationFrequency(rel, c) for rel, c in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))]


def record_shape_stats(corpus: Iterable[Record], sample_std: bool = False) -> ShapeStats:
    records = list(corpus)
    if not records:
        raise EmptyCorpus("corpus is empty")
    refs = describe([len(r.references) for r in records])
    triples = describe([len(r.triples) for r in records], sample_std)
    return ShapeStats(refs.mean, triples.mean, triples.std)


# -- rendering ------------------------------------------------------------------


def stats_table(columns: dict[str, LengthStats]) -> list[list[str]]:
    names = [f.name for f in fields(LengthStats)]
    labels = {"p25": "25%", "p50": "50%", "p75": "75%"}
    rows = [[""] + list(columns)]
    for i, name in enumerate(names):
        rows.append([labels.get(name, name)] + [f"{astuple(s)[i]:.2f}" for s in columns.values()])
    return rows


def render_csv(rows: list[list]) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def render_text(rows: list[list[str]]) -> str:
    widths = [max(len(str(row[i])) for row in rows) for i in range(len(rows[0]))]
    lines = []
    for row in rows:
        cells = [str(row[0]).ljust(widths[0])] + [str(c).rjust(w) for c, w in zip(row[1:], widths[1:])]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines) + "\n"


def relation_rows(freqs: Sequence[RelationFrequency]) -> list[list]:
    return [["relation", "count"]] + [[f.relation, f.count] for f in freqs]
