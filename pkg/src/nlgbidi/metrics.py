"""Scoring: open-vocabulary set F1, aligned edit distance, BLEU-4 and Rouge-L."""

from __future__ import annotations

import math
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import BothEmpty, EmptyGold, EmptyInput, MixedReportKinds
from .model import TripleSet, fold_text
from .serde import serialize_triples

_WS = re.compile(r"\s+")


# -- set F1 -------------------------------------------------------------------


@dataclass(frozen=True)
class F1Breakdown:
    tp: int
    fp: int
    fn: int
    precision: Fraction
    recall: Fraction
    f1: Fraction


def _ratio(num: int, den: int) -> Fraction:
    # Zero denominator means zero, not an epsilon-smoothed quotient.
    return Fraction(num, den) if den else Fraction(0)


def harmonic_mean(a: Fraction, b: Fraction) -> Fraction:
    if a == 0 or b == 0:
        return Fraction(0)
    return 2 * a * b / (a + b)


def _match_key(item: str) -> str:
    return _WS.sub(" ", item.casefold()).strip()


def f_measure(pred: Iterable[str], gold: Iterable[str]) -> F1Breakdown:
    """Set F1 over strings compared case- and whitespace-insensitively."""
    p = {_match_key(x) for x in pred}
    g = {_match_key(x) for x in gold}
    tp = len(p & g)
    fp = len(p - g)
    fn = len(g - p)
    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, tp + fn)
    return F1Breakdown(tp, fp, fn, precision, recall, harmonic_mean(precision, recall))


def set_f1(pred: TripleSet, gold: TripleSet) -> F1Breakdown:
    if not gold:
        raise EmptyGold("gold triple set is empty")
    return f_measure(pred.keys(), gold.keys())


# -- edit distance ------------------------------------------------------------


def levenshtein(a: str, b: str) -> int:
    if a == b:
        return 0
    # Shared prefix and suffix never contribute to the distance.
    start = 0
    limit = min(len(a), len(b))
    while start < limit and a[start] == b[start]:
        start += 1
    end = 0
    while end < limit - start and a[-1 - end] == b[-1 - end]:
        end += 1
    a = a[start:len(a) - end]
    b = b[start:len(b) - end]
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        current = [i]
        left = i
        for j, cb in enumerate(b):
            diag = previous[j] + (ca != cb)
            up = previous[j + 1] + 1
            left = min(diag, up, left + 1)
            current.append(left)
        previous = current
    return previous[-1]


@dataclass(frozen=True)
class EditReport:
    """Alignment of predicted to gold triples.

    ``per_triple_distances`` rows are (pred index, gold index, distance);
    an index is None for a triple left unmatched, whose distance is its full
    serialized length.  ``mean_per_record`` is ``total`` divided by the
    number of alignment rows.  ``whole_string`` is the plain edit distance
    between the two serialized sets, reported alongside for comparison.
    """

    per_triple_distances: tuple[tuple[int | None, int | None, int], ...]
    total: int
    mean_per_record: float
    whole_string: int


def _serialized(triple) -> str:
    return f"{triple.key} ;"


def align_and_edit(pred: TripleSet, gold: TripleSet) -> EditReport:
    if not pred and not gold:
        raise BothEmpty("pred and gold are both empty")
    p = [_serialized(t) for t in pred.unique()]
    g = [_serialized(t) for t in gold.unique()]
    n, m = len(p), len(g)
    size = n + m
    # Square matrix: real rows/cols then dummies. Dummy pairings charge the full length.
    cost = np.zeros((size, size), dtype=np.int64)
    for i in range(n):
        for j in range(m):
            cost[i, j] = levenshtein(p[i], g[j])
        cost[i, m:] = len(p[i])
    for j in range(m):
        cost[n:, j] = len(g[j])
    rows, cols = linear_sum_assignment(cost)

    pairs = []
    for i, j in zip(rows, cols):
        i, j = int(i), int(j)
        if i < n and j < m:
            pairs.append((i, j, int(cost[i, j])))
        elif i < n:
            pairs.append((i, None, len(p[i])))
        elif j < m:
            pairs.append((None, j, len(g[j])))
    pairs.sort(key=lambda r: (r[0] is None, r[0] if r[0] is not None else 0, r[1] if r[1] is not None else -1))
    total = sum(d for _, _, d in pairs)
    whole = levenshtein(
        serialize_triples(pred) if pred else "",
        serialize_triples(gold) if gold else "",
    )
    return EditReport(tuple(pairs), total, total / len(pairs), whole)


# -- BLEU / Rouge-L -------------------------------------------------------------


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch)[0] in "PS"


def tokenize(text: str, ascii_fold: bool = True) -> list[str]:
    """Lowercase, split punctuation and symbols into their own tokens, split on whitespace."""
    text = fold_text(text) if ascii_fold else text.casefold()
    return "".join(f" {c} " if _is_punct(c) else c for c in text).split()


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu4(hypothesis: str, references: Sequence[str], ascii_fold: bool = True) -> float:
    """Sentence BLEU-4 with exponential-decay smoothing for zero-match orders.

    Orders with no hypothesis n-grams are left out of the geometric mean.
    A hypothesis sharing no n-gram at all with the references scores 0.
    """
    if not references:
        raise ValueError("references must be non-empty")
    hyp = tokenize(hypothesis, ascii_fold)
    if not hyp:
        return 0.0
    refs = [tokenize(r, ascii_fold) for r in references]

    log_sum = 0.0
    orders = 0
    k = 0
    any_match = False
    for n in range(1, 5):
        hyp_counts = _ngrams(hyp, n)
        total = sum(hyp_counts.values())
        if total == 0:
            break
        max_ref: Counter = Counter()
        for ref in refs:
            max_ref |= _ngrams(ref, n)
        matches = sum(min(c, max_ref[g]) for g, c in hyp_counts.items())
        any_match = any_match or matches > 0
        if matches == 0:
            k += 1
            precision = 1.0 / (2 ** k * total)
        else:
            precision = matches / total
        log_sum += math.log(precision)
        orders += 1

    if not any_match:
        return 0.0
    c = len(hyp)
    r = min((len(ref) for ref in refs), key=lambda length: (abs(length - c), length))
    bp = 1.0 if c > r else math.exp(1 - r / c)
    return bp * math.exp(log_sum / orders)


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if len(a) < len(b):
        a, b = b, a
    previous = [0] * (len(b) + 1)
    for x in a:
        current = [0]
        for j, y in enumerate(b, 1):
            current.append(previous[j - 1] + 1 if x == y else max(previous[j], current[j - 1]))
        previous = current
    return previous[-1]


def rouge_l(hypothesis: str, references: Sequence[str], ascii_fold: bool = True) -> float:
    if not references:
        raise ValueError("references must be non-empty")
    hyp = tokenize(hypothesis, ascii_fold)
    if not hyp:
        return 0.0
    best = Fraction(0)
    for reference in references:
        ref = tokenize(reference, ascii_fold)
        lcs = lcs_length(hyp, ref)
        score = harmonic_mean(_ratio(lcs, len(hyp)), _ratio(lcs, len(ref)))
        best = max(best, score)
    return float(best)


@dataclass(frozen=True)
class GenScore:
    bleu4: float
    rouge_l: float


def score_generation(hypothesis: str, references: Sequence[str], ascii_fold: bool = True) -> GenScore:
    return GenScore(bleu4(hypothesis, references, ascii_fold), rouge_l(hypothesis, references, ascii_fold))


# -- aggregation ----------------------------------------------------------------


@dataclass(frozen=True)
class MetricSummary:
    kind: str
    count: int
    mean_f1: Fraction | None = None
    zero_f1_count: int | None = None
    mean_edit: float | None = None
    mean_edit_total: float | None = None
    mean_bleu4: float | None = None
    mean_rouge_l: float | None = None

    def to_json(self) -> dict:
        out = {}
        for name, value in self.__dict__.items():
            if value is None:
                continue
            out[name] = float(value) if isinstance(value, Fraction) else value
        return out


_KINDS = {F1Breakdown: "f1", EditReport: "edit", GenScore: "generation"}


def aggregate_scores(per_record: Sequence[F1Breakdown | EditReport | GenScore]) -> MetricSummary:
    if not per_record:
        raise EmptyInput("nothing to aggregate")
    kinds = {type(r) for r in per_record}
    if len(kinds) != 1 or next(iter(kinds)) not in _KINDS:
        raise MixedReportKinds(f"reports of several kinds: {sorted(k.__name__ for k in kinds)}")
    kind = _KINDS[kinds.pop()]
    n = len(per_record)
    if kind == "f1":
        return MetricSummary(
            kind, n,
            mean_f1=sum((r.f1 for r in per_record), Fraction(0)) / n,
            zero_f1_count=sum(1 for r in per_record if r.f1 == 0),
        )
    if kind == "edit":
        return MetricSummary(
            kind, n,
            mean_edit=math.fsum(r.mean_per_record for r in per_record) / n,
            mean_edit_total=math.fsum(r.total for r in per_record) / n,
        )
    return MetricSummary(
        kind, n,
        mean_bleu4=math.fsum(r.bleu4 for r in per_record) / n,
        mean_rouge_l=math.fsum(r.rouge_l for r in per_record) / n,
    )
