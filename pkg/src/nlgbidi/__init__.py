"""Corpus engineering and evaluation for bidirectional data-to-text corpora."""

from .compress import CompressedDoc, compress, decompress, savings_report
from .diagnostics import classify_mismatches, detect_repetition, parse_number_with_unit
from .metrics import align_and_edit, aggregate_scores, bleu4, f_measure, levenshtein, rouge_l, set_f1
from .model import Record, Term, Triple, TripleSet, canonicalize_term, triples_equal
from .pipeline import inject_synthetic, interleave, load_corpus, validate_synthetic
from .serde import TaskExample, TaskTag, make_task_example, parse_triples, serialize_triples
from .stats import length_stats, record_shape_stats, relation_frequency

__version__ = "0.1.0"
