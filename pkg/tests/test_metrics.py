import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from nlgbidi.errors import BothEmpty, EmptyGold, EmptyInput, MixedReportKinds
from nlgbidi.metrics import (
    EditReport,
    F1Breakdown,
    GenScore,
    aggregate_scores,
    align_and_edit,
    bleu4,
    f_measure,
    lcs_length,
    levenshtein,
    rouge_l,
    set_f1,
    tokenize,
)
from nlgbidi.model import TripleSet

from oracles import brute_force_alignment, levenshtein_recursive, set_f1_brute


def ts(*rows):
    return TripleSet.from_raw(rows)


# -- set F1 ---------------------------------------------------------------------

def test_basic_f1_cases():
    assert f_measure(set("a"), set("a")).f1 == 1
    assert f_measure(set("ab"), set("a")).f1 == Fraction(2, 3)
    assert f_measure(set(), set("a")).f1 == 0


def test_set_f1_breakdown():
    r = set_f1(ts(["a", "b", "c"], ["d", "e", "f"]), ts(["A", "B", "C"], ["x", "y", "z"]))
    assert (r.tp, r.fp, r.fn) == (1, 1, 1)
    assert r.precision == r.recall == r.f1 == Fraction(1, 2)


def test_set_f1_whitespace_and_case():
    assert set_f1(ts(["United_States", "leader", "Barack  Obama"]),
                  ts(["united states", "LEADER", "barack obama"])).f1 == 1


def test_empty_gold():
    with pytest.raises(EmptyGold):
        set_f1(ts(["a", "b", "c"]), TripleSet())


def test_empty_pred_scores_zero():
    r = set_f1(TripleSet(), ts(["a", "b", "c"]))
    assert r.f1 == 0 and r.fn == 1 and r.precision == 0


symbols = st.sampled_from([f"s{i}" for i in range(20)])
triple_rows = st.lists(st.tuples(symbols, symbols, symbols), min_size=1, max_size=8)


@given(triple_rows, triple_rows)
def test_f1_symmetry_and_oracle(p_rows, g_rows):
    p, g = ts(*p_rows), ts(*g_rows)
    a, b = set_f1(p, g), set_f1(g, p)
    assert a.f1 == b.f1
    assert (a.fp, a.fn) == (b.fn, b.fp)
    tp, fp, fn, f1 = set_f1_brute([" | ".join(r) for r in p_rows], [" | ".join(r) for r in g_rows])
    assert (a.tp, a.fp, a.fn) == (tp, fp, fn)
    assert float(a.f1) == pytest.approx(f1, abs=1e-12)
    assert set_f1(p, p).f1 == 1


@given(triple_rows, triple_rows)
def test_adding_missing_gold_triple_never_lowers_tp(p_rows, g_rows):
    p, g = ts(*p_rows), ts(*g_rows)
    before = set_f1(p, g)
    missing = [t for t in g if t.key not in p.keys()]
    if missing:
        after = set_f1(TripleSet(p.triples + (missing[0],)), g)
        assert after.tp == before.tp + 1


# -- Levenshtein ------------------------------------------------------------------

@pytest.mark.parametrize("a, b, d", [("", "abc", 3), ("kitten", "sitting", 3), ("896", "896.0", 2), ("abc", "abc", 0)])
def test_levenshtein_examples(a, b, d):
    assert levenshtein(a, b) == d == levenshtein_recursive(a, b)


short = st.text(alphabet="abcx ", max_size=8)


@given(short, short, short)
def test_levenshtein_metric_axioms(a, b, c):
    ab = levenshtein(a, b)
    assert ab == levenshtein_recursive(a, b)
    assert ab >= 0
    assert (ab == 0) == (a == b)
    assert ab == levenshtein(b, a)
    assert levenshtein(a, c) <= ab + levenshtein(b, c)


# -- alignment ----------------------------------------------------------------------

def test_align_identity():
    g = ts(["a", "b", "c"], ["d", "e", "f"])
    assert align_and_edit(g, g).total == 0


def test_align_leader_name():
    report = align_and_edit(ts(["atlanta", "leader name", "kasim reed"]), ts(["atlanta", "leader", "kasim reed"]))
    assert report.total == 5
    assert report.per_triple_distances == ((0, 0, 5),)


def test_align_all_deletion():
    report = align_and_edit(TripleSet(), ts(["a", "b", "c"]))
    assert report.total == len("a | b | c ;")
    assert report.per_triple_distances == ((None, 0, 11),)


def test_align_both_empty():
    with pytest.raises(BothEmpty):
        align_and_edit(TripleSet(), TripleSet())


def test_align_unmatched_rows_and_mean():
    report = align_and_edit(ts(["a", "b", "c"], ["zzzzzz", "q", "r"]), ts(["a", "b", "d"]))
    assert report.total == 1 + len("zzzzzz | q | r ;")
    assert sorted(report.per_triple_distances, key=str) == sorted(
        [(0, 0, 1), (1, None, len("zzzzzz | q | r ;"))], key=str)
    assert report.mean_per_record == report.total / 2


terms = st.sampled_from(["a", "ab", "abc", "b", "ba", "leader", "leader name", "x"])
small_rows = st.lists(st.tuples(terms, terms, terms), min_size=0, max_size=4)


@given(small_rows, small_rows, st.randoms())
def test_align_matches_brute_force_and_is_permutation_invariant(p_rows, g_rows, rnd):
    if not p_rows and not g_rows:
        return
    p, g = ts(*p_rows), ts(*g_rows)
    report = align_and_edit(p, g)
    expected = brute_force_alignment([f"{t.key} ;" for t in p.unique()], [f"{t.key} ;" for t in g.unique()])
    assert report.total == expected
    assert report.total == sum(d for _, _, d in report.per_triple_distances)
    rnd.shuffle(p_rows)
    rnd.shuffle(g_rows)
    assert align_and_edit(ts(*p_rows), ts(*g_rows)).total == report.total


# -- BLEU / Rouge-L -------------------------------------------------------------------

def test_tokenize():
    assert tokenize("In Mexico, the language is Spanish.") == ["in", "mexico", ",", "the", "language", "is", "spanish", "."]
    assert tokenize("Bucureşti") == ["bucuresti"]


def test_bleu_identical():
    ref = "Shumai is a variation of the dish Siomay."
    assert bleu4(ref, [ref, "something else entirely here"]) == pytest.approx(1.0, abs=1e-12)


def test_bleu_brevity_case():
    assert bleu4("a b c d", ["a b c d e"]) == pytest.approx(math.exp(1 - 5 / 4), abs=1e-9)


def test_bleu_smoothing_no_fourgram_overlap():
    hyp = "the cat sat on mat"
    ref = ["the cat sat under the mat"]
    # matched: 1-grams 4/5, 2-grams 2/4, 3-grams 1/3, 4-grams 0/2 -> smoothed 1/(2*2)
    expected_bp = math.exp(1 - 6 / 5)
    expected = expected_bp * math.exp((math.log(4 / 5) + math.log(2 / 4) + math.log(1 / 3) + math.log(1 / 4)) / 4)
    assert bleu4(hyp, ref) == pytest.approx(expected, abs=1e-12)
    trigram_only = expected_bp * math.exp((math.log(4 / 5) + math.log(2 / 4) + math.log(1 / 3)) / 3)
    assert 0 < bleu4(hyp, ref) < trigram_only


def test_bleu_clipping_multi_reference():
    # "the" x4 clipped by the max count over references (2)
    hyp = "the the the the"
    refs = ["the cat the dog", "a the"]
    p1 = 2 / 4
    expected = math.exp((math.log(p1) + math.log(1 / (2 * 3)) + math.log(1 / (4 * 2)) + math.log(1 / (8 * 1))) / 4)
    assert bleu4(hyp, refs) == pytest.approx(expected, abs=1e-12)


def test_bleu_closest_reference_tie_prefers_shorter():
    # c=4; lengths 3 and 5 are equally close. "x x x" adds no matches, so only BP can differ.
    assert bleu4("a b c d", ["x x x", "a b c d e"]) == pytest.approx(1.0, abs=1e-12)
    assert bleu4("a b c d", ["a b c d e"]) == pytest.approx(math.exp(1 - 5 / 4), abs=1e-12)


def test_bleu_empty_and_no_overlap():
    assert bleu4("", ["a b"]) == 0.0
    assert bleu4("x y z", ["a b c"]) == 0.0
    with pytest.raises(ValueError):
        bleu4("a", [])


def test_rouge_examples():
    assert rouge_l("a b c", ["a b c"]) == 1.0
    assert rouge_l("a c", ["a b c"]) == pytest.approx(0.8, abs=1e-12)
    assert rouge_l("x y", ["a b"]) == 0.0
    assert rouge_l("", ["a"]) == 0.0


def test_lcs():
    assert lcs_length(list("abcbdab"), list("bdcaba")) == 4


sentences = st.lists(st.sampled_from(["The", "cat", "SAT", "on", "mat", ".", ","]), min_size=1, max_size=10).map(" ".join)


@given(sentences, st.lists(sentences, min_size=1, max_size=3))
def test_case_invariance_and_rouge_max(hyp, refs):
    assert bleu4(hyp, refs) == bleu4(hyp.upper(), [r.lower() for r in refs])
    assert rouge_l(hyp, refs) == rouge_l(hyp.swapcase(), [r.upper() for r in refs])
    assert rouge_l(hyp, refs) == max(rouge_l(hyp, [r]) for r in refs)
    assert 0 <= bleu4(hyp, refs) <= 1 + 1e-12
    assert 0 <= rouge_l(hyp, refs) <= 1


def test_bleu_against_sacrebleu():
    sacrebleu = pytest.importorskip("sacrebleu")
    rng = random.Random(7)
    vocab = "the a cat dog sat on mat , . is was in of spain mexico language".split()
    for _ in range(50):
        hyp = " ".join(rng.choice(vocab) for _ in range(rng.randint(1, 14)))
        refs = [" ".join(rng.choice(vocab) for _ in range(rng.randint(1, 14))) for _ in range(rng.randint(1, 3))]
        theirs = sacrebleu.sentence_bleu(
            " ".join(tokenize(hyp)), [" ".join(tokenize(r)) for r in refs],
            smooth_method="exp", tokenize="none", use_effective_order=True,
        ).score / 100
        assert bleu4(hyp, refs) == pytest.approx(theirs, abs=1e-4)


# -- aggregation -----------------------------------------------------------------------

def _f1(value):
    return F1Breakdown(0, 0, 0, Fraction(0), Fraction(0), Fraction(value))


def test_aggregate_f1():
    assert aggregate_scores([_f1(1), _f1(0)]).mean_f1 == Fraction(1, 2)
    summary = aggregate_scores([_f1(1), _f1(Fraction(2, 3)), _f1(0)])
    assert summary.mean_f1 == Fraction(5, 9)
    assert summary.zero_f1_count == 1
    assert aggregate_scores([_f1(Fraction(2, 3))]).mean_f1 == Fraction(2, 3)


def test_aggregate_other_kinds():
    gen = aggregate_scores([GenScore(0.5, 1.0), GenScore(0.25, 0.5)])
    assert (gen.mean_bleu4, gen.mean_rouge_l) == (0.375, 0.75)
    edit = aggregate_scores([EditReport((), 4, 2.0, 4), EditReport((), 0, 0.0, 0)])
    assert (edit.mean_edit, edit.mean_edit_total) == (1.0, 2.0)


def test_aggregate_errors():
    with pytest.raises(EmptyInput):
        aggregate_scores([])
    with pytest.raises(MixedReportKinds):
        aggregate_scores([_f1(1), GenScore(0.1, 0.1)])
