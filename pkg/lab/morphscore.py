"""
MorphScore: alignment of tokenizer boundaries with gold morpheme boundaries.

A boundary is the length of a non-final segment prefix, counted in code
points (default) or extended grapheme clusters. Words emitted as a single
token, words with no gold boundary, and words whose tokens contain the
unknown token or do not spell the word are excluded from scoring.
"""
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import accumulate
from pathlib import Path

import regex

from .corpus import normalize, read_lines
from .exceptions import GoldFormatError, ScoringError
from .tokenize import encode

logger = logging.getLogger(__name__)

CATEGORIES = ('derivational', 'inflectional', 'unspecified')
UNITS = ('codepoint', 'grapheme')

_GRAPHEME = regex.compile(r'\X')


def _offsets(pieces):
    """Cumulative lengths of all non-final pieces."""
    return frozenset(accumulate(len(p) for p in pieces[:-1]))


def _to_graphemes(word, positions):
    ends = list(accumulate(len(g) for g in _GRAPHEME.findall(word)))
    # a code-point boundary inside a cluster maps to the cluster's start
    mapped = set()
    for position in positions:
        index = sum(1 for end in ends if end <= position)
        if 0 < index < len(ends):
            mapped.add(index)
    return frozenset(mapped)


def boundaries_of(word, pieces, unit='codepoint'):
    """Boundary set of a split, or None when the pieces do not spell the word."""
    if unit not in UNITS:
        raise ScoringError(f"unknown boundary unit '{unit}'")
    pieces = list(pieces)
    if ''.join(pieces) != word:
        return None
    positions = _offsets(pieces)
    if unit == 'grapheme':
        return _to_graphemes(word, positions)
    return positions


@dataclass(frozen=True)
class GoldEntry:
    word: str
    segments: tuple
    category: str = 'unspecified'

    def __post_init__(self):
        if self.category not in CATEGORIES:
            raise ScoringError(f"unknown category '{self.category}'")
        if not self.segments or any(not s for s in self.segments):
            raise ScoringError(f"gold entry '{self.word}' has an empty segment")
        if ''.join(self.segments) != self.word:
            raise ScoringError(f"segments {list(self.segments)} do not spell '{self.word}'")

    @property
    def boundaries(self):
        return _offsets(self.segments)

    def boundaries_in(self, unit):
        return boundaries_of(self.word, self.segments, unit)


@dataclass(frozen=True)
class RejectedEntry:
    word: str
    segments: tuple
    reason: str
    line_number: int | None = None

    def as_dict(self):
        data = {'word': self.word, 'segments': list(self.segments), 'reason': self.reason}
        if self.line_number is not None:
            data['line'] = self.line_number
        return data


@dataclass(frozen=True)
class GoldSet:
    entries: tuple
    rejected: tuple = ()
    path: str | None = None

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


def _check(word, segments):
    if not segments or any(not s for s in segments):
        return "empty segment"
    if ''.join(segments) != word:
        return "segments do not concatenate to the word"
    return None


def filter_goldset(raw):
    """
    Split raw `(word, segments[, category])` records into kept GoldEntry
    objects and RejectedEntry records with a reason.
    """
    kept = []
    dropped = []
    for record in raw:
        word, segments, *rest = record
        segments = tuple(segments)
        reason = _check(word, segments)
        if reason:
            dropped.append(RejectedEntry(word=word, segments=segments, reason=reason))
            continue
        kept.append(GoldEntry(word=word, segments=segments, category=rest[0] if rest else 'unspecified'))
    return kept, dropped


def load_goldset(path, normalization='NFC'):
    """Read `word<TAB>seg1 seg2 ...[<TAB>category]`; concatenation mismatches are rejected, not fatal."""
    entries = []
    rejected = []
    for line_number, line in enumerate(read_lines(path), start=1):
        if not line.strip():
            continue
        fields = line.split('\t')
        if len(fields) < 2:
            raise GoldFormatError(path, line_number, "missing tab between word and segments")
        if len(fields) > 3:
            raise GoldFormatError(path, line_number, f"expected at most 3 columns, got {len(fields)}")
        word = normalize(fields[0].strip(), normalization)
        if not word or any(ch.isspace() for ch in word):
            raise GoldFormatError(path, line_number, "empty or whitespace-containing word")
        segments = tuple(normalize(s, normalization) for s in fields[1].split())
        if not segments:
            raise GoldFormatError(path, line_number, "empty segment list")
        category = fields[2].strip() if len(fields) == 3 and fields[2].strip() else 'unspecified'
        if category not in CATEGORIES:
            raise GoldFormatError(path, line_number, f"unknown category '{category}'")
        reason = _check(word, segments)
        if reason:
            rejected.append(RejectedEntry(word=word, segments=segments, reason=reason, line_number=line_number))
            continue
        entries.append(GoldEntry(word=word, segments=segments, category=category))
    if rejected:
        logger.warning("%s: rejected %d entries (first at line %d)", path, len(rejected), rejected[0].line_number)
    logger.info("Loaded gold set %s: %d entries", path, len(entries))
    return GoldSet(entries=tuple(entries), rejected=tuple(rejected), path=str(path))


def write_goldset(entries, path):
    lines = [f"{e.word}\t{' '.join(e.segments)}\t{e.category}" for e in entries]
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(''.join(line + '\n' for line in lines), encoding='utf-8')


# ---------------------------------------------------------------------------
# Scoring
# ---------------------------------------------------------------------------

def _harmonic(a, b):
    return 2 * a * b / (a + b) if a + b > 0 else 0.0


@dataclass(frozen=True)
class MorphWordScore:
    word: str
    gold: frozenset
    pred: frozenset
    recall: float
    precision: float
    f1: float

    @property
    def hits(self):
        return len(self.gold & self.pred)

    def as_dict(self):
        return {
            'word': self.word,
            'gold': sorted(self.gold),
            'pred': sorted(self.pred),
            'recall': self.recall,
            'precision': self.precision,
            'f1': self.f1,
        }


def score_word(gold, pred, word=''):
    gold = frozenset(gold)
    pred = frozenset(pred)
    if not gold or not pred:
        raise ScoringError("score_word needs non-empty gold and predicted boundary sets")
    hits = len(gold & pred)
    recall = hits / len(gold)
    precision = hits / len(pred)
    return MorphWordScore(word=word, gold=gold, pred=pred, recall=recall,
                          precision=precision, f1=_harmonic(recall, precision))


@dataclass(frozen=True)
class MorphReport:
    scores: tuple
    excluded_single_token: int = 0
    excluded_no_gold_boundary: int = 0
    excluded_unk_or_mismatch: int = 0
    unit: str = 'codepoint'
    gold_path: str | None = None

    @property
    def evaluated(self):
        return len(self.scores)

    @property
    def total(self):
        return (self.evaluated + self.excluded_single_token
                + self.excluded_no_gold_boundary + self.excluded_unk_or_mismatch)

    def _mean(self, attribute):
        if not self.scores:
            return None
        return math.fsum(getattr(s, attribute) for s in self.scores) / len(self.scores)

    @property
    def macro_recall(self):
        return self._mean('recall')

    @property
    def macro_precision(self):
        return self._mean('precision')

    @property
    def macro_f1(self):
        return self._mean('f1')

    @property
    def table_f1(self):
        """Harmonic mean of macro recall and macro precision."""
        if not self.scores:
            return None
        return _harmonic(self.macro_recall, self.macro_precision)

    @property
    def micro_recall(self):
        gold = sum(len(s.gold) for s in self.scores)
        return sum(s.hits for s in self.scores) / gold if gold else None

    @property
    def micro_precision(self):
        pred = sum(len(s.pred) for s in self.scores)
        return sum(s.hits for s in self.scores) / pred if pred else None

    @property
    def micro_f1(self):
        if not self.scores:
            return None
        return _harmonic(self.micro_recall, self.micro_precision)

    def as_dict(self):
        return {
            'gold': self.gold_path,
            'unit': self.unit,
            'macro': {'recall': self.macro_recall, 'precision': self.macro_precision, 'f1': self.macro_f1},
            'micro': {'recall': self.micro_recall, 'precision': self.micro_precision, 'f1': self.micro_f1},
            'table_f1': self.table_f1,
            'exclusions': {
                'single_token': self.excluded_single_token,
                'no_gold_boundary': self.excluded_no_gold_boundary,
                'unk_or_mismatch': self.excluded_unk_or_mismatch,
            },
            'evaluated': self.evaluated,
            'entries': self.total,
        }


def _judge(entry, model, unit):
    """Score one entry, or name the exclusion that applies."""
    encoding = encode(model, entry.word)
    if len(encoding.ids) == 1:
        return 'single_token'
    gold = entry.boundaries_in(unit)
    if not gold:
        return 'no_gold_boundary'
    if model.unk_id in encoding.ids:
        return 'unk_or_mismatch'
    pieces = [model.marker.strip(model.token(i)) for i in encoding.ids]
    pred = boundaries_of(entry.word, pieces, unit)
    if not pred:
        return 'unk_or_mismatch'
    return score_word(gold, pred, word=entry.word)


def evaluate(goldset, model, unit='codepoint', workers=1):
    """Score every gold word tokenized in isolation; the result is independent of `workers`."""
    if unit not in UNITS:
        raise ScoringError(f"unknown boundary unit '{unit}'")
    entries = list(goldset)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(lambda e: _judge(e, model, unit), entries))
    else:
        outcomes = [_judge(e, model, unit) for e in entries]
    excluded = {'single_token': 0, 'no_gold_boundary': 0, 'unk_or_mismatch': 0}
    scores = []
    for outcome in outcomes:
        if isinstance(outcome, str):
            excluded[outcome] += 1
        else:
            scores.append(outcome)
    report = MorphReport(
        scores=tuple(scores),
        excluded_single_token=excluded['single_token'],
        excluded_no_gold_boundary=excluded['no_gold_boundary'],
        excluded_unk_or_mismatch=excluded['unk_or_mismatch'],
        unit=unit,
        gold_path=getattr(goldset, 'path', None),
    )
    logger.info("MorphScore: %d of %d words evaluated, macro R=%s P=%s",
                report.evaluated, report.total, report.macro_recall, report.macro_precision)
    return report


def write_report(report, path, per_word=None):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(report.as_dict(), ensure_ascii=False, indent=1, sort_keys=True) + '\n', encoding='utf-8')
    if per_word:
        with Path(per_word).open('w', encoding='utf-8', newline='\n') as handle:
            for score in report.scores:
                handle.write(json.dumps(score.as_dict(), ensure_ascii=False, sort_keys=True) + '\n')
