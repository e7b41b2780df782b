"""Degenerate-generation detection and false-penalty classification."""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

from .config import Config
from .errors import EmptyInput
from .metrics import levenshtein
from .model import Triple, TripleSet


@dataclass(frozen=True)
class RepetitionFlag:
    flagged: bool
    period: int
    repeats: int
    start_index: int
    hit_length_cap: bool = False
    truncated_tail: bool = False


def _trailing_run(tokens: Sequence[str], p: int) -> tuple[int, int]:
    """(copies, start) of the period-p block that ends the sequence."""
    n = len(tokens)
    start = n - p
    copies = 1
    while start - p >= 0 and tokens[start - p:start] == tokens[start:start + p]:
        copies += 1
        start -= p
    return copies, start


def detect_repetition(
    tokens: Sequence[str],
    min_period: int = 1,
    max_period: int = 10,
    min_repeats: int = 3,
    hit_length_cap: bool = False,
    allow_truncated_tail: bool = True,
) -> RepetitionFlag:
    """Find the trailing token cycle with the most consecutive copies.

    Ties go to the smallest period.  Generation cut off by a length limit
    often ends mid-token ("... Bucuresti Bucuresti Bucu"); with
    ``allow_truncated_tail`` a final token that is a strict prefix of the
    token the cycle would produce next is ignored.
    """
    tokens = list(tokens)
    if not tokens:
        raise EmptyInput("no tokens to scan")
    n = len(tokens)
    best = (0, min_period, max(n - min_period, 0), False)  # copies, period, start, truncated
    for p in range(min_period, min(max_period, n) + 1):
        copies, start = _trailing_run(tokens, p)
        truncated = False
        if allow_truncated_tail and n - 1 >= p:
            last, expected = tokens[-1], tokens[-1 - p]
            if last and last != expected and expected.startswith(last):
                alt_copies, alt_start = _trailing_run(tokens[:-1], p)
                if alt_copies > copies:
                    copies, start, truncated = alt_copies, alt_start, True
        if copies > best[0]:
            best = (copies, p, start, truncated)
    copies, period, start, truncated = best
    copies = max(copies, 1)
    flagged = copies >= min_repeats
    return RepetitionFlag(flagged, period, copies, start, hit_length_cap, truncated and flagged)


# -- numbers and units ------------------------------------------------------------

class Quantity(NamedTuple):
    value: Fraction
    unit: str | None


_NUMBER = re.compile(r"^([+-]?(?:\d{1,3}(?:,\d{3})+|\d+)(?:\.\d*)?|[+-]?\.\d+)\s*(.*?)\.?$")


def parse_number_with_unit(term: str, config: Config | None = None) -> Quantity | None:
    """Parse "30.0 g", "896.0", "1,200 metres" into an exact value and canonical unit.

    Returns None for anything that does not start with a numeric literal or
    whose trailing text is more than a single unknown word.
    """
    text = re.sub(r"\s+", " ", term.casefold()).strip()
    m = _NUMBER.match(text)
    if not m:
        return None
    value = Fraction(m.group(1).replace(",", ""))
    unit_text = m.group(2).strip()
    if not unit_text:
        return Quantity(value, None)
    table = (config or Config()).unit_table()
    if unit_text in table:
        return Quantity(value, table[unit_text])
    if re.fullmatch(r"[a-z]+", unit_text):
        return Quantity(value, unit_text)
    return None


# -- false-penalty taxonomy -----------------------------------------------------------

KINDS = ("swapped_arguments", "numeric_format", "unit_reformulation", "relation_near_miss", "unmatched")


@dataclass(frozen=True)
class DiagnosticLabel:
    kind: str
    pred: Triple
    gold: Triple | None = None

    def to_json(self) -> dict:
        return {"kind": self.kind, "pred": self.pred.key, "gold": self.gold.key if self.gold else None}


def _swapped(p: Triple, g: Triple, config: Config) -> bool:
    return p.subject == g.object and p.object == g.subject and p.relation == g.relation


def _same_head(p: Triple, g: Triple) -> bool:
    return p.subject == g.subject and p.relation == g.relation


def _numeric_format(p: Triple, g: Triple, config: Config) -> bool:
    if not _same_head(p, g):
        return False
    a = parse_number_with_unit(p.object.canonical, config)
    b = parse_number_with_unit(g.object.canonical, config)
    return a is not None and b is not None and a.unit is None and b.unit is None and a.value == b.value


def _unit_reformulation(p: Triple, g: Triple, config: Config) -> bool:
    if not _same_head(p, g):
        return False
    a = parse_number_with_unit(p.object.canonical, config)
    b = parse_number_with_unit(g.object.canonical, config)
    return a is not None and b is not None and a.unit is not None and a == b


def _relation_near_miss(p: Triple, g: Triple, config: Config) -> bool:
    if p.subject != g.subject or p.object != g.object or p.relation == g.relation:
        return False
    a = set(p.relation.canonical.split())
    b = set(g.relation.canonical.split())
    return a <= b or b <= a or levenshtein(p.relation.canonical, g.relation.canonical) <= 4


_RULES = (
    ("swapped_arguments", _swapped),
    ("numeric_format", _numeric_format),
    ("unit_reformulation", _unit_reformulation),
    ("relation_near_miss", _relation_near_miss),
)


def classify_mismatches(pred: TripleSet, gold: TripleSet, config: Config | None = None) -> list[DiagnosticLabel]:
    """Label each predicted triple that has no exact gold match.

    Rules are tried in priority order against every unmatched gold triple;
    the first rule that fires for any gold triple wins.
    """
    config = config or Config()
    gold_keys = gold.keys()
    pred_keys = pred.keys()
    unmatched_gold = [g for g in gold.unique() if g.key not in pred_keys]
    labels = []
    for p in pred.unique():
        if p.key in gold_keys:
            continue
        label = DiagnosticLabel("unmatched", p, None)
        for kind, rule in _RULES:
            hit = next((g for g in unmatched_gold if rule(p, g, config)), None)
            if hit is not None:
                label = DiagnosticLabel(kind, p, hit)
                break
        labels.append(label)
    return labels
