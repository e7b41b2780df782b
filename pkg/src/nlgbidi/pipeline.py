"""Training-stream construction, synthetic annotation ingestion and corpus loading."""

from __future__ import annotations

import enum
import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import (
    BothEmpty,
    EmptyBase,
    EmptyOutput,
    IoFailure,
    MalformedTriple,
    NlgBidiError,
    SchemaViolation,
    SplitCountMismatch,
)
from .model import SOURCES, SPLITS, Record, TripleSet
from .serde import TaskExample, parse_triples

MASK64 = (1 << 64) - 1


class Lcg64:
    """64-bit linear congruential generator (Knuth's MMIX constants).

    state <- state * 6364136223846793005 + 1442695040888963407 (mod 2**64);
    each draw returns the high 32 bits of the new state.  Fixed so that a
    seed reproduces the same stream in any language.
    """

    MULTIPLIER = 6364136223846793005
    INCREMENT = 1442695040888963407

    def __init__(self, seed: int):
        if not 0 <= seed <= MASK64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        self.state = seed

    def next_u32(self) -> int:
        self.state = (self.state * self.MULTIPLIER + self.INCREMENT) & MASK64
        return self.state >> 32

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound) by rejection sampling."""
        if not 0 < bound <= 1 << 32:
            raise ValueError("bound out of range")
        limit = (1 << 32) - (1 << 32) % bound
        while True:
            x = self.next_u32()
            if x < limit:
                return x % bound


def interleave(d2s_examples: Sequence[TaskExample], s2d_examples: Sequence[TaskExample]) -> list[TaskExample]:
    """ABAB... starting with d2s; the longer stream's remainder goes last."""
    if not d2s_examples and not s2d_examples:
        raise BothEmpty("both task streams are empty")
    out = []
    shared = min(len(d2s_examples), len(s2d_examples))
    for a, b in zip(d2s_examples[:shared], s2d_examples[:shared]):
        out.append(a)
        out.append(b)
    out.extend(d2s_examples[shared:])
    out.extend(s2d_examples[shared:])
    return out


def synthetic_positions(n_base: int, n_synthetic: int, seed: int) -> list[int]:
    """Sorted output slots for synthetic items, sampled without replacement.

    Partial Fisher-Yates over [0, n_base + n_synthetic): step i swaps slot i
    with slot i + below(total - i).
    """
    total = n_base + n_synthetic
    rng = Lcg64(seed)
    slots = list(range(total))
    for i in range(n_synthetic):
        j = i + rng.below(total - i)
        slots[i], slots[j] = slots[j], slots[i]
    return sorted(slots[:n_synthetic])


def inject_synthetic(base: Sequence, synthetic: Sequence, seed: int) -> list:
    if not base:
        raise EmptyBase("base stream is empty")
    positions = set(synthetic_positions(len(base), len(synthetic), seed))
    b = iter(base)
    s = iter(synthetic)
    return [next(s) if i in positions else next(b) for i in range(len(base) + len(synthetic))]


# -- synthetic annotations ------------------------------------------------------


class Rejection(enum.Enum):
    MALFORMED_EXPRESSION = "MalformedExpression"
    CONTENT_FILTERED = "ContentFiltered"
    EMPTY_ANNOTATION = "EmptyAnnotation"


@dataclass(frozen=True)
class IngestionReport:
    requested: int
    content_filtered: int
    malformed: int
    accepted: int
    empty: int = 0

    def to_json(self) -> dict:
        return dict(self.__dict__)

    def summary(self) -> str:
        return " ".join(f"{k}={v}" for k, v in self.to_json().items())


def validate_synthetic(
    raw_annotation: str | None,
    sentence: str = "",
    blocked: bool = False,
    record_id: int = 0,
) -> Record | Rejection:
    if blocked:
        return Rejection.CONTENT_FILTERED
    if raw_annotation is None or not raw_annotation.strip() or not sentence.strip():
        return Rejection.EMPTY_ANNOTATION
    try:
        triples = parse_triples(raw_annotation)
    except EmptyOutput:
        return Rejection.EMPTY_ANNOTATION
    except NlgBidiError:
        return Rejection.MALFORMED_EXPRESSION
    return Record(record_id, triples, (sentence,), "train", "wikibio-synthetic")


def ingest_synthetic(envelopes: Iterable[dict], first_id: int = 0) -> tuple[list[Record], list[tuple[int, Rejection]], IngestionReport]:
    """Validate ingestion envelopes ``{"sentence", "annotation", "blocked"}``.

    Returns accepted records, (position, reason) for each rejection, and the
    counts.  Empty annotations count toward ``malformed`` in the report so
    that accepted = requested - content_filtered - malformed holds.
    """
    accepted: list[Record] = []
    rejected: list[tuple[int, Rejection]] = []
    for position, env in enumerate(envelopes):
        result = validate_synthetic(
            env.get("annotation"),
            env.get("sentence") or "",
            bool(env.get("blocked", False)),
            first_id + len(accepted),
        )
        if isinstance(result, Rejection):
            rejected.append((position, result))
        else:
            accepted.append(result)
    reasons = Counter(r for _, r in rejected)
    empty = reasons[Rejection.EMPTY_ANNOTATION]
    report = IngestionReport(
        requested=len(accepted) + len(rejected),
        content_filtered=reasons[Rejection.CONTENT_FILTERED],
        malformed=reasons[Rejection.MALFORMED_EXPRESSION] + empty,
        accepted=len(accepted),
        empty=empty,
    )
    return accepted, rejected, report


# -- corpus loading ---------------------------------------------------------------


@dataclass(frozen=True)
class Corpus:
    records: tuple[Record, ...]
    path: str | None = None
    by_id: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if not self.by_id:
            object.__setattr__(self, "by_id", {r.id: r for r in self.records})

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def split(self, name: str) -> Corpus:
        return Corpus(tuple(r for r in self.records if r.split == name), self.path)

    def split_counts(self) -> dict[str, int]:
        counts = Counter(r.split for r in self.records)
        return {s: counts.get(s, 0) for s in SPLITS}


def record_from_json(obj: dict, line: int = 0) -> Record:
    """Build a Record from one corpus JSON object, raising SchemaViolation with the line."""
    if not isinstance(obj, dict):
        raise SchemaViolation(line, "<record>", "is not a JSON object")
    for name in ("id", "triples", "references"):
        if name not in obj:
            raise SchemaViolation(line, name, "is missing")
    rid = obj["id"]
    if not isinstance(rid, int) or isinstance(rid, bool) or rid < 0:
        raise SchemaViolation(line, "id", "must be a non-negative integer")
    rows = obj["triples"]
    if not isinstance(rows, list) or not rows:
        raise SchemaViolation(line, "triples", "must be a non-empty list")
    for i, row in enumerate(rows):
        if not isinstance(row, list) or not all(isinstance(x, str) for x in row):
            raise SchemaViolation(line, "triples", f"item {i} must be a list of strings")
        if len(row) != 3:
            raise MalformedTriple(" | ".join(row), i, line)
    refs = obj["references"]
    if not isinstance(refs, list) or not refs or not all(isinstance(x, str) for x in refs):
        raise SchemaViolation(line, "references", "must be a non-empty list of strings")
    split = obj.get("split", "train")
    if split not in SPLITS:
        raise SchemaViolation(line, "split", f"must be one of {SPLITS}")
    source = obj.get("source", "webnlg")
    if source not in SOURCES:
        raise SchemaViolation(line, "source", f"must be one of {SOURCES}")
    try:
        triples = TripleSet.from_raw(rows)
        return Record(rid, triples, tuple(refs), split, source)
    except MalformedTriple as exc:
        raise MalformedTriple(exc.segment, exc.index, line) from None
    except NlgBidiError as exc:
        raise SchemaViolation(line, "triples", str(exc)) from None


def read_jsonl(path: str | Path) -> Iterable[tuple[int, dict]]:
    """Yield (1-based line number, object) pairs, skipping blank lines."""
    try:
        handle = open(path, encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot open {path}: {exc}") from exc
    with handle:
        try:
            for number, line in enumerate(handle, 1):
                if not line.strip():
                    continue
                try:
                    yield number, json.loads(line)
                except json.JSONDecodeError as exc:
                    raise SchemaViolation(number, "<line>", f"is not valid JSON: {exc.msg}") from None
        except UnicodeDecodeError as exc:
            raise IoFailure(f"{path} is not UTF-8: {exc}") from exc


def load_corpus(path: str | Path, expected_counts: tuple[int, int, int] | None = None) -> Corpus:
    records = tuple(record_from_json(obj, number) for number, obj in read_jsonl(path))
    corpus = Corpus(records, str(path))
    if expected_counts is not None:
        expected = dict(zip(SPLITS, expected_counts))
        actual = corpus.split_counts()
        if actual != expected:
            raise SplitCountMismatch(expected, actual)
    return corpus


def write_jsonl(path, objects: Iterable[dict]) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as out:
        for obj in objects:
            out.write(json.dumps(obj, ensure_ascii=False) + "\n")
            count += 1
    return count
