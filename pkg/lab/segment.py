"""
Morphological pre-segmentation.

Two kinds of segmenter share one interface (`segment(word) -> list[str]`):

* SegmentationLexicon: a word → segments map read from analyzer or
  Morfessor output (`word<TAB>seg1 seg2 ...`).
* MdlModel: a baseline minimum-description-length segmenter trained by
  exhaustive search on small word tables and by per-word local search
  otherwise, segmenting by Viterbi search.

Cost of an MDL analysis, in nats:

    corpus  = -sum over morph tokens of ln(count / total)
    lexicon = -sum over morph types of sum over (chars + terminator) of ln q(ch)

where q is the character unigram distribution over the lexicon, the
terminator symbol acting as the length prior.
"""
import itertools
import json
import logging
import math
import random
import threading
from collections import Counter
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .corpus import Corpus, normalize, read_lines, write_lines
from .exceptions import LexiconFormatError, ModelFormatError, SegmenterError

logger = logging.getLogger(__name__)

SOURCE_TAGS = ('external-analyzer', 'external-morfessor', 'mdl-trained')
MARKER_POSITIONS = ('suffix', 'prefix')
MDL_FORMAT_VERSION = 1

# Morfessor baseline's penalty for a character outside the morph lexicon
UNKNOWN_CHARACTER_COST = 9999.9

_TERMINATOR = ''
_TIE_TOLERANCE = 1e-9

# words up to this length are re-analysed against all their segmentations
ENUMERATED_LENGTH = 8


@dataclass(frozen=True)
class MarkerPolicy:
    """Where the intra-word joiner goes when segments are written as text."""
    marker: str = '@@'
    position: str = 'suffix'

    def __post_init__(self):
        if not self.marker or any(ch.isspace() for ch in self.marker):
            raise SegmenterError(f"marker must be a non-empty string without whitespace, got {self.marker!r}")
        if self.position not in MARKER_POSITIONS:
            raise SegmenterError(f"marker position must be one of {', '.join(MARKER_POSITIONS)}")

    def render(self, segments):
        segments = list(segments)
        if len(segments) < 2:
            return segments
        if self.position == 'suffix':
            return [s + self.marker for s in segments[:-1]] + segments[-1:]
        return segments[:1] + [self.marker + s for s in segments[1:]]

    def check(self, word):
        """Words must not contain the marker, or stripping cannot recover them."""
        if self.marker in word:
            raise SegmenterError(f"word {word!r} contains the marker {self.marker!r}; pick a marker absent from the corpus")

    def strip(self, piece):
        if self.position == 'suffix' and piece.endswith(self.marker):
            return piece[:-len(self.marker)]
        if self.position == 'prefix' and piece.startswith(self.marker):
            return piece[len(self.marker):]
        return piece

    def is_continued(self, piece):
        """True if the next piece belongs to the same word."""
        return self.position == 'suffix' and piece.endswith(self.marker)

    def continues(self, piece):
        """True if the piece belongs to the previous piece's word."""
        return self.position == 'prefix' and piece.startswith(self.marker)

    def as_dict(self):
        return {'marker': self.marker, 'position': self.position}


def strip_markers(line, policy):
    """Rejoin a marker-segmented line into its original words."""
    words = []
    pending = ''
    for piece in line.split():
        if policy.continues(piece) and words and not pending:
            words[-1] += policy.strip(piece)
        elif policy.is_continued(piece):
            pending += policy.strip(piece)
        else:
            words.append(pending + piece)
            pending = ''
    if pending:
        words.append(pending)
    return ' '.join(words)


# ---------------------------------------------------------------------------
# External lexicons
# ---------------------------------------------------------------------------

class SegmentationLexicon:
    """Exact-match word → segments lookup. Misses fall back to the whole word."""

    def __init__(self, entries, source_tag='external-analyzer', overrides=0, skipped=0):
        if source_tag not in SOURCE_TAGS:
            raise SegmenterError(f"unknown lexicon source tag '{source_tag}'")
        self.entries = {}
        for word, segments in entries.items():
            segments = tuple(segments)
            if not segments or any(not s for s in segments):
                raise SegmenterError(f"lexicon entry '{word}' has an empty segment")
            self.entries[word] = segments
        self.source_tag = source_tag
        self.overrides = overrides
        self.skipped = skipped
        self._misses = 0
        self._lock = threading.Lock()

    @property
    def misses(self):
        return self._misses

    def segment(self, word):
        segments = self.entries.get(word)
        if segments is None:
            with self._lock:
                self._misses += 1
            return [word]
        return list(segments)

    def __len__(self):
        return len(self.entries)

    def __contains__(self, word):
        return word in self.entries


def load_lexicon(path, source_tag='external-analyzer', normalization='NFC'):
    """
    Read a `word<TAB>seg1 seg2 ...` file. A third tab-separated column is
    ignored. Later duplicates override earlier ones (counted in
    `overrides`); entries whose segments do not spell the word are skipped
    (counted in `skipped`) so that segmentation always concatenates back.
    """
    entries = {}
    overrides = 0
    skipped = 0
    for line_number, line in enumerate(read_lines(path), start=1):
        if not line.strip():
            continue
        if '\t' not in line:
            raise LexiconFormatError(path, line_number, "missing tab between word and segments")
        word, _, rest = line.partition('\t')
        word = normalize(word.strip(), normalization)
        if not word or any(ch.isspace() for ch in word):
            raise LexiconFormatError(path, line_number, "empty or whitespace-containing word")
        segments = [normalize(s, normalization) for s in rest.split('\t')[0].split()]
        if not segments:
            raise LexiconFormatError(path, line_number, "empty segment list")
        if ''.join(segments) != word:
            skipped += 1
            logger.warning("%s:%d: segments %s do not spell '%s', entry skipped", path, line_number, segments, word)
            continue
        if word in entries:
            overrides += 1
        entries[word] = segments
    if overrides:
        logger.warning("%s: %d duplicate word(s) overridden by later lines", path, overrides)
    logger.info("Loaded lexicon %s with %d entries", path, len(entries))
    return SegmentationLexicon(entries, source_tag=source_tag, overrides=overrides, skipped=skipped)


# ---------------------------------------------------------------------------
# Baseline MDL segmenter
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MdlConfig:
    epochs: int = 5
    corpus_weight: float = 1.0
    exhaustive_limit: int = 65536

    def __post_init__(self):
        if self.exhaustive_limit < 0:
            raise SegmenterError(f"exhaustive_limit must be non-negative, got {self.exhaustive_limit}")
        if self.epochs < 1:
            raise SegmenterError(f"epochs must be at least 1, got {self.epochs}")
        if self.corpus_weight <= 0:
            raise SegmenterError(f"corpus_weight must be positive, got {self.corpus_weight}")

    def as_dict(self):
        return asdict(self)


def segmentations(word):
    """Every segmentation of `word`, unsplit first."""
    for cuts in itertools.product((False, True), repeat=len(word) - 1):
        pieces, start = [], 0
        for index, cut in enumerate(cuts, start=1):
            if cut:
                pieces.append(word[start:index])
                start = index
        pieces.append(word[start:])
        yield pieces


def _xlogx(x):
    return x * math.log(x) if x > 0 else 0.0


def mdl_cost(morph_counts, corpus_weight=1.0):
    """Exact total code length of a morph inventory with its token counts."""
    counts = [c for c in morph_counts.values() if c > 0]
    corpus = _xlogx(sum(counts)) - math.fsum(_xlogx(c) for c in counts)
    chars = Counter()
    for morph, count in morph_counts.items():
        if count > 0:
            chars.update(morph)
            chars[_TERMINATOR] += 1
    lexicon = _xlogx(sum(chars.values())) - math.fsum(_xlogx(n) for n in chars.values())
    return lexicon + corpus_weight * corpus


class _CodeLength:
    """Incrementally maintained MDL cost of a changing morph inventory."""

    def __init__(self, corpus_weight):
        self.corpus_weight = corpus_weight
        self.counts = Counter()
        self.chars = Counter()
        self.tokens = 0
        self.char_total = 0
        self.morph_xlogx = 0.0
        self.char_xlogx = 0.0

    def add(self, morph, delta):
        old = self.counts[morph]
        new = old + delta
        if new < 0:
            raise SegmenterError(f"negative count for morph '{morph}'")
        self.morph_xlogx += _xlogx(new) - _xlogx(old)
        self.tokens += delta
        if old == 0 and new > 0:
            self._lexicon(morph, 1)
        elif old > 0 and new == 0:
            self._lexicon(morph, -1)
        if new:
            self.counts[morph] = new
        else:
            del self.counts[morph]

    def _lexicon(self, morph, sign):
        for ch in (*morph, _TERMINATOR):
            n = self.chars[ch]
            self.char_xlogx += _xlogx(n + sign) - _xlogx(n)
            self.chars[ch] = n + sign
        self.char_total += sign * (len(morph) + 1)

    def cost(self):
        corpus = _xlogx(self.tokens) - self.morph_xlogx
        lexicon = _xlogx(self.char_total) - self.char_xlogx
        return lexicon + self.corpus_weight * corpus


class _MdlTrainer:
    """
    Exhaustive search over per-word segmentations while the number of
    combinations stays within `config.exhaustive_limit`, then local search:
    each word is re-analysed against the rest of the inventory and the
    cheapest analysis is kept. Words of up to ENUMERATED_LENGTH characters
    try every segmentation; longer ones use recursive binary splitting.
    """

    def __init__(self, word_counts, config, seed):
        self.config = config
        self.words = dict(sorted(word_counts.items()))
        self.rng = random.Random(seed)
        self.state = _CodeLength(config.corpus_weight)
        self.analyses = {}
        for word, count in self.words.items():
            self.analyses[word] = (word,)
            self.state.add(word, count)
        self.history = [self.state.cost()]

    def train(self):
        if self._combinations() <= self.config.exhaustive_limit:
            self._search_exhaustively()
        for epoch in range(1, self.config.epochs + 1):
            order = list(self.words)
            self.rng.shuffle(order)
            changed = sum(1 for word in order if self._reanalyse(word))
            self.history.append(self.state.cost())
            logger.info("MDL epoch %d: %d analyses changed, cost %.4f, %d morph types",
                        epoch, changed, self.state.cost(), len(self.state.counts))
            if not changed:
                break
        return dict(self.state.counts)

    def _combinations(self):
        total = 1
        for word in self.words:
            total *= 2 ** (len(word) - 1)
            if total > self.config.exhaustive_limit:
                break
        return total

    def _search_exhaustively(self):
        for word, count in self.words.items():
            for morph in self.analyses[word]:
                self.state.add(morph, -count)
        # single characters have one analysis
        free = [w for w in self.words if len(w) > 1]
        for word in self.words:
            if len(word) == 1:
                self.state.add(word, self.words[word])
        options = [list(segmentations(word)) for word in free]
        best_cost, best = math.inf, None
        chosen = []
        stack = [0]
        # iterative depth-first walk; stack[i] is the next option index at depth i
        while stack:
            depth = len(stack) - 1
            if depth == len(free):
                cost = self.state.cost()
                if cost < best_cost - _TIE_TOLERANCE:
                    best_cost, best = cost, tuple(chosen)
                stack.pop()
                self._undo(free, chosen)
                continue
            index = stack[-1]
            if index == len(options[depth]):
                stack.pop()
                if stack:
                    self._undo(free, chosen)
                continue
            stack[-1] += 1
            pieces = options[depth][index]
            for morph in pieces:
                self.state.add(morph, self.words[free[depth]])
            chosen.append(pieces)
            stack.append(0)
        # rebuild from scratch so the incremental sums carry no drift
        self.state = _CodeLength(self.config.corpus_weight)
        for word in self.words:
            self.analyses[word] = (word,)
        for word, pieces in zip(free, best or ()):
            self.analyses[word] = tuple(pieces)
        for word, count in self.words.items():
            for morph in self.analyses[word]:
                self.state.add(morph, count)
        self.history.append(self.state.cost())
        logger.info("MDL exhaustive search over %d words: cost %.4f, %d morph types",
                    len(self.words), self.state.cost(), len(self.state.counts))

    def _undo(self, free, chosen):
        if not chosen:
            return
        pieces = chosen.pop()
        count = self.words[free[len(chosen)]]
        for morph in pieces:
            self.state.add(morph, -count)

    def _reanalyse(self, word):
        count = self.words[word]
        before = self.state.cost()
        old = self.analyses[word]
        for morph in old:
            self.state.add(morph, -count)
        if len(word) <= ENUMERATED_LENGTH:
            new = self._best_segmentation(word, count)
        else:
            new = self._split(word, count)
        if new == old or self.state.cost() > before - _TIE_TOLERANCE:
            for morph in new:
                self.state.add(morph, -count)
            for morph in old:
                self.state.add(morph, count)
            return False
        self.analyses[word] = new
        self.history.append(self.state.cost())
        return True

    def _best_segmentation(self, word, count):
        """Add `word` in the cheapest of all its segmentations; return the morphs."""
        best, best_cost = None, math.inf
        for pieces in segmentations(word):
            cost = self._cost_with(pieces, count)
            if cost < best_cost - _TIE_TOLERANCE:
                best, best_cost = tuple(pieces), cost
        for morph in best:
            self.state.add(morph, count)
        return best

    def _cost_with(self, parts, count):
        for part in parts:
            self.state.add(part, count)
        cost = self.state.cost()
        for part in parts:
            self.state.add(part, -count)
        return cost

    def _split(self, construction, count):
        """Add `construction` in its best recursive binary analysis; return the morphs."""
        best_index = 0
        best_cost = self._cost_with((construction,), count)
        for index in range(1, len(construction)):
            cost = self._cost_with((construction[:index], construction[index:]), count)
            if cost < best_cost - _TIE_TOLERANCE:
                best_index, best_cost = index, cost
        if best_index == 0:
            self.state.add(construction, count)
            return (construction,)
        prefix, suffix = construction[:best_index], construction[best_index:]
        self.state.add(suffix, count)
        left = self._split(prefix, count)
        self.state.add(suffix, -count)
        right = self._split(suffix, count)
        return left + right


@dataclass(frozen=True, eq=False)
class MdlModel:
    morph_counts: dict
    config: MdlConfig = field(default_factory=MdlConfig)
    cost_history: tuple = ()

    source_tag = 'mdl-trained'

    def __post_init__(self):
        if not self.morph_counts:
            raise SegmenterError("an MDL model needs at least one morph")
        for morph, count in self.morph_counts.items():
            if not morph or count < 1:
                raise SegmenterError(f"invalid morph entry {morph!r}: {count}")
        object.__setattr__(self, '_log_total', math.log(self.total_count))
        object.__setattr__(self, '_max_length', max(len(m) for m in self.morph_counts))

    @property
    def total_count(self):
        return sum(self.morph_counts.values())

    def cost(self):
        return mdl_cost(self.morph_counts, self.config.corpus_weight)

    def segment(self, word):
        """Viterbi (minimum code length) split of `word` over the morph lexicon."""
        n = len(word)
        if n == 0:
            return []
        best = [0.0] + [math.inf] * n
        back = [0] * (n + 1)
        for end in range(1, n + 1):
            for start in range(max(0, end - self._max_length), end):
                if best[start] == math.inf:
                    continue
                count = self.morph_counts.get(word[start:end])
                if count:
                    cost = self._log_total - math.log(count)
                elif end - start == 1:
                    cost = UNKNOWN_CHARACTER_COST
                else:
                    continue
                if best[start] + cost < best[end]:
                    best[end] = best[start] + cost
                    back[end] = start
        segments = []
        end = n
        while end > 0:
            segments.append(word[back[end]:end])
            end = back[end]
        return segments[::-1]

    def as_dict(self):
        return {
            'version': MDL_FORMAT_VERSION,
            'morphs': [{'morph': m, 'count': c} for m, c in sorted(self.morph_counts.items())],
            'config': self.config.as_dict(),
        }

    def save(self, path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.as_dict(), ensure_ascii=False, indent=1) + '\n', encoding='utf-8')

    @classmethod
    def load(cls, path):
        try:
            data = json.loads(Path(path).read_text(encoding='utf-8'))
        except json.JSONDecodeError as exc:
            raise ModelFormatError('<file>', f"not valid JSON: {exc}") from exc
        if data.get('version') != MDL_FORMAT_VERSION:
            raise ModelFormatError('version', f"unsupported MDL model version {data.get('version')!r}")
        try:
            morphs = {entry['morph']: int(entry['count']) for entry in data['morphs']}
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelFormatError('morphs', str(exc)) from exc
        try:
            config = MdlConfig(**data.get('config', {}))
        except TypeError as exc:
            raise ModelFormatError('config', str(exc)) from exc
        return cls(morph_counts=morphs, config=config)


def train_mdl(word_counts, config=None, seed=0):
    """
    Train a baseline MDL segmenter on a word → count table. Deterministic for
    a fixed seed and input; the cost never increases across accepted steps.
    """
    config = config or MdlConfig()
    word_counts = {w: int(c) for w, c in word_counts.items() if c}
    if not word_counts:
        raise SegmenterError("cannot train an MDL segmenter on an empty word table")
    for word in word_counts:
        if not word or any(ch.isspace() for ch in word):
            raise SegmenterError(f"invalid word {word!r} in training table")
    trainer = _MdlTrainer(word_counts, config, seed)
    morphs = trainer.train()
    return MdlModel(morph_counts=dict(sorted(morphs.items())), config=config, cost_history=tuple(trainer.history))


# ---------------------------------------------------------------------------
# Applying segmenters
# ---------------------------------------------------------------------------

def load_segmenter(kind, path, normalization='NFC'):
    if kind == 'lexicon':
        return load_lexicon(path, normalization=normalization)
    if kind == 'mdl':
        return MdlModel.load(path)
    raise SegmenterError(f"unknown segmenter kind '{kind}'")


def segment_word(word, segmenter):
    return segmenter.segment(word)


def segment_line(line, segmenter, policy):
    pieces = []
    for word in line.split():
        policy.check(word)
        pieces.extend(policy.render(segmenter.segment(word)))
    return ' '.join(pieces)


def apply_segmentation(corpus, segmenter, policy, out):
    count = write_lines(out, (segment_line(line, segmenter, policy) for line in corpus.lines()))
    return Corpus(path=Path(out), line_count=count)
