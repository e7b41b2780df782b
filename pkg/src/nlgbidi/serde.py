"""Flat text linearization of triple sets and task example construction.

Grammar emitted: ``(term " | " term " | " term " ;")+`` joined by single
spaces.  Parsing accepts arbitrary spacing, a missing final terminator, and
an optional leading control prefix.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass

from .errors import (
    EmptyOutput,
    EmptyTerm,
    EmptyTripleSet,
    MalformedTriple,
    ReferenceIndexOutOfRange,
)
from .model import Record, Triple, TripleSet, canonicalize_term, fold_text


class TaskTag(enum.Enum):
    D2S = "d2s"
    S2D = "s2d"

    @property
    def kind(self) -> str:
        return self.value

    @property
    def prefix(self) -> str:
        return "d2t 0:" if self is TaskTag.D2S else "t2d 1:"

    @classmethod
    def parse(cls, value: str | TaskTag) -> TaskTag:
        if isinstance(value, TaskTag):
            return value
        return cls(value.lower())


PREFIXES = tuple(tag.prefix for tag in TaskTag)


@dataclass(frozen=True)
class TaskExample:
    task: TaskTag
    input: str
    target: str
    record_id: int

    def to_json(self) -> dict:
        return {"task": self.task.value, "input": self.input, "target": self.target, "record_id": self.record_id}

    @classmethod
    def from_json(cls, obj: dict) -> TaskExample:
        return cls(TaskTag.parse(obj["task"]), obj["input"], obj["target"], int(obj["record_id"]))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), ensure_ascii=False)


def serialize_triples(ts: TripleSet) -> str:
    if not ts:
        raise EmptyTripleSet("cannot serialize an empty triple set")
    return " ".join(f"{t.key} ;" for t in ts)


def strip_prefix(text: str) -> str:
    """Drop a leading control prefix.

    A subject that itself begins with a prefix string is indistinguishable
    from a prefixed input and loses it; the flat format has no escaping.
    """
    stripped = text.lstrip()
    for prefix in PREFIXES:
        if stripped.startswith(prefix):
            return stripped[len(prefix):].lstrip()
    return text


def parse_triples(flat: str) -> TripleSet:
    """Recover a triple set from model output.

    Raises MalformedTriple for the first segment without exactly three
    non-empty terms, EmptyOutput when nothing but separators is present.
    """
    segments = strip_prefix(flat).split(";")
    triples = []
    for index, segment in enumerate(segments):
        if not segment.strip():
            continue
        parts = segment.split("|")
        if len(parts) != 3:
            raise MalformedTriple(segment.strip(), index)
        try:
            terms = [canonicalize_term(p.strip()) for p in parts]
        except EmptyTerm:
            raise MalformedTriple(segment.strip(), index) from None
        triples.append(Triple(*terms))
    if not triples:
        raise EmptyOutput(f"no triple recovered from {flat!r}")
    return TripleSet(triples)


def normalize_reference(text: str) -> str:
    return fold_text(text, lowercase=True)


def make_task_example(r: Record, t: TaskTag | str, ref_index: int, with_prefix: bool) -> TaskExample:
    task = TaskTag.parse(t)
    if not 0 <= ref_index < len(r.references):
        raise ReferenceIndexOutOfRange(
            f"record {r.id} has {len(r.references)} references, index {ref_index} requested"
        )
    data = serialize_triples(r.triples)
    sentence = normalize_reference(r.references[ref_index])
    source, target = (data, sentence) if task is TaskTag.D2S else (sentence, data)
    if with_prefix:
        source = f"{task.prefix} {source}"
    return TaskExample(task, source, target, r.id)


def task_examples(records, task: TaskTag | str, with_prefix: bool) -> list[TaskExample]:
    """One example per (record, reference) pair, in corpus order."""
    return [
        make_task_example(r, task, i, with_prefix)
        for r in records
        for i in range(len(r.references))
    ]
