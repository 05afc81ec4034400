"""
Tokenizer families (character, word, morphemic, bpe, unigram) behind one model
format.

Text is pre-tokenized by splitting on whitespace and, when a segmenter is
configured, splitting each word into its morphological segments. Subword
units never cross a pre-token boundary. Every model reserves id 0 for the
unknown token.
"""
import heapq
import json
import logging
import math
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .corpus import word_counts
from .exceptions import (
    ModelFormatError,
    TokenizerError,
    VocabularyExhaustedError,
    VocabularySizeError,
)
from .segment import MarkerPolicy, load_segmenter

logger = logging.getLogger(__name__)

FAMILIES = ('character', 'word', 'morphemic', 'bpe', 'unigram')
LOOKUP_FAMILIES = ('character', 'word', 'morphemic')
MODEL_FORMAT_VERSION = 1
DEFAULT_UNK = '<unk>'

UNK_LOGPROB_OFFSET = 10.0
_EXPECTED_COUNT_FLOOR = 1e-6


# ---------------------------------------------------------------------------
# Pre-tokenization
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PreTokenizer:
    """Whitespace split, optionally followed by a morphological segmenter."""
    kind: str = 'none'
    path: str | None = None
    marker: MarkerPolicy = field(default_factory=MarkerPolicy)
    segmenter: object = None

    def __post_init__(self):
        if self.kind not in ('none', 'lexicon', 'mdl'):
            raise TokenizerError(f"unknown pre-tokenizer kind '{self.kind}'")
        if self.kind == 'none':
            return
        if self.path is None:
            raise TokenizerError(f"pre-tokenizer '{self.kind}' needs a path")
        if self.segmenter is None:
            object.__setattr__(self, 'segmenter', load_segmenter(self.kind, self.path))

    @classmethod
    def from_ref(cls, ref, marker=None):
        """Parse `none`, `lexicon:PATH` or `mdl:PATH`."""
        marker = marker or MarkerPolicy()
        if ref in (None, '', 'none'):
            return cls(marker=marker)
        kind, sep, path = ref.partition(':')
        if not sep or not path:
            raise TokenizerError(f"pre-tokenizer must be none, lexicon:PATH or mdl:PATH, got '{ref}'")
        return cls(kind=kind, path=path, marker=marker)

    @property
    def ref(self):
        return 'none' if self.kind == 'none' else f'{self.kind}:{self.path}'

    def split_word(self, word):
        if self.segmenter is None:
            return [word]
        return self.segmenter.segment(word)

    def words(self, text):
        """Pre-tokens grouped per whitespace word."""
        return [self.split_word(word) for word in text.split()]

    def counts(self, corpus):
        """Pre-token frequencies over a corpus, computed per word type."""
        counts = Counter()
        for word, count in word_counts(corpus).items():
            for segment in self.split_word(word):
                counts[segment] += count
        return counts

    def as_dict(self):
        return {'kind': self.kind, 'path': self.path}


# ---------------------------------------------------------------------------
# Model and encodings
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Encoding:
    ids: tuple
    word_spans: tuple

    def __post_init__(self):
        previous = 0
        for start, end in self.word_spans:
            if start != previous or end < start:
                raise TokenizerError(f"word spans must tile the id sequence, got {self.word_spans}")
            previous = end
        if previous != len(self.ids):
            raise TokenizerError("word spans do not cover the id sequence")

    def __len__(self):
        return len(self.ids)

    def word_ids(self):
        return [self.ids[start:end] for start, end in self.word_spans]

    def as_dict(self):
        return {'ids': list(self.ids), 'spans': [list(span) for span in self.word_spans]}

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(ids=tuple(int(i) for i in data['ids']),
                       word_spans=tuple((int(s), int(e)) for s, e in data['spans']))
        except (KeyError, TypeError, ValueError) as exc:
            raise TokenizerError(f"malformed encoding record: {exc}") from exc


@dataclass(frozen=True, eq=False)
class TokenizerModel:
    family: str
    vocab: tuple
    pre_tokenizer: PreTokenizer = field(default_factory=PreTokenizer)
    requested_vocab_size: int | None = None
    unk: str = DEFAULT_UNK
    merges: tuple = ()
    piece_logprobs: tuple = ()
    prune_log: tuple = ()

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ModelFormatError('family', f"unknown family '{self.family}'")
        if not self.vocab or self.vocab[0] != self.unk:
            raise ModelFormatError('vocab', f"id 0 must be the unknown token '{self.unk}'")
        ids = {}
        for index, token in enumerate(self.vocab):
            if not isinstance(token, str) or not token:
                raise ModelFormatError('vocab', f"entry {index} is not a non-empty string")
            if token in ids:
                raise ModelFormatError('vocab', f"duplicate token '{token}'")
            ids[token] = index
        object.__setattr__(self, '_ids', ids)

        ranks = {}
        for rank, (left, right) in enumerate(self.merges):
            if left not in ids or right not in ids or left + right not in ids:
                raise ModelFormatError('merges', f"merge {rank} ({left!r}, {right!r}) references a token outside the vocab")
            ranks.setdefault((left, right), rank)
        object.__setattr__(self, '_ranks', ranks)

        if self.family == 'unigram':
            if len(self.piece_logprobs) != len(self.vocab):
                raise ModelFormatError('piece_logprobs', "length differs from vocab")
            for value in self.piece_logprobs:
                if not math.isfinite(value) or value > 0:
                    raise ModelFormatError('piece_logprobs', f"log-probability {value} is not finite and <= 0")
            logprobs = dict(zip(self.vocab[1:], self.piece_logprobs[1:]))
            object.__setattr__(self, '_logprobs', logprobs)
            object.__setattr__(self, '_max_piece', max(len(p) for p in logprobs) if logprobs else 1)

    @property
    def unk_id(self):
        return 0

    @property
    def marker(self):
        return self.pre_tokenizer.marker

    def __len__(self):
        return len(self.vocab)

    def token_id(self, token):
        return self._ids.get(token, 0)

    def token(self, token_id):
        if not 0 <= token_id < len(self.vocab):
            raise TokenizerError(f"token id {token_id} is out of range for a vocabulary of {len(self.vocab)}")
        return self.vocab[token_id]

    def tokenize_pre_token(self, pre_token):
        """Token strings for one pre-token (unknown units kept as their surface)."""
        if self.family == 'character':
            return list(pre_token)
        if self.family in ('word', 'morphemic'):
            return [pre_token]
        if self.family == 'bpe':
            return _apply_merges(list(pre_token), self._ranks)
        return _viterbi(pre_token, self._logprobs, self._max_piece, self.piece_logprobs[0])[1]

    def word_tokens(self, word_segments):
        tokens = []
        for pre_token in word_segments:
            tokens.extend(self.tokenize_pre_token(pre_token))
        return tokens

    def as_dict(self):
        data = {
            'version': MODEL_FORMAT_VERSION,
            'family': self.family,
            'requested_vocab_size': self.requested_vocab_size,
            'vocab': list(self.vocab),
            'pre_tokenizer': self.pre_tokenizer.as_dict(),
            'marker': self.marker.as_dict(),
            'unk': self.unk,
        }
        if self.family == 'bpe':
            data['merges'] = [list(pair) for pair in self.merges]
        if self.family == 'unigram':
            data['piece_logprobs'] = list(self.piece_logprobs)
            data['prune_log'] = list(self.prune_log)
        return data


# ---------------------------------------------------------------------------
# Encoding and decoding
# ---------------------------------------------------------------------------

def encode(model, text):
    ids = []
    spans = []
    for segments in model.pre_tokenizer.words(text):
        start = len(ids)
        ids.extend(model.token_id(token) for token in model.word_tokens(segments))
        spans.append((start, len(ids)))
    return Encoding(ids=tuple(ids), word_spans=tuple(spans))


def encode_corpus(model, corpus):
    for line in corpus.lines():
        yield encode(model, line)


def word_pieces(model, encoding):
    """Token strings grouped per word."""
    return [[model.token(i) for i in ids] for ids in encoding.word_ids()]


def render_pieces(model, encoding):
    """Token strings with intra-word markers, as one space-joined line."""
    pieces = []
    for word in word_pieces(model, encoding):
        model.marker.check(''.join(word))
        pieces.extend(model.marker.render(word))
    return ' '.join(pieces)


def decode(model, encoding):
    """Tokens carry no markers, so each word is its pieces concatenated."""
    return ' '.join(''.join(word) for word in word_pieces(model, encoding))


# ---------------------------------------------------------------------------
# Lookup families
# ---------------------------------------------------------------------------

def build_lookup(corpus, family, vocab_size=None, pre_tokenizer=None, unk=DEFAULT_UNK):
    pre_tokenizer = pre_tokenizer or PreTokenizer()
    if family not in LOOKUP_FAMILIES:
        raise TokenizerError(f"'{family}' is not a lookup family")
    if family == 'morphemic' and pre_tokenizer.segmenter is None:
        raise TokenizerError("the morphemic family needs a segmenter (pre-tokenizer lexicon:PATH or mdl:PATH)")
    counts = pre_tokenizer.counts(corpus)

    if family == 'character':
        if vocab_size is not None:
            logger.warning("character family ignores vocab_size=%s; the vocabulary is the observed alphabet", vocab_size)
        alphabet = sorted({ch for token in counts for ch in token})
        return TokenizerModel(family=family, vocab=(unk, *alphabet), pre_tokenizer=pre_tokenizer, unk=unk)

    if vocab_size is None or vocab_size < 2:
        raise VocabularySizeError(vocab_size, 2, "one unit plus the unknown token")
    ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    selected = [token for token, _ in ranked if token != unk][:vocab_size - 1]
    if len(selected) < vocab_size - 1:
        raise VocabularyExhaustedError(vocab_size, len(selected) + 1, family)
    logger.info("Built %s vocabulary: %d of %d units kept", family, len(selected), len(counts))
    return TokenizerModel(family=family, vocab=(unk, *selected), pre_tokenizer=pre_tokenizer,
                          requested_vocab_size=vocab_size, unk=unk)


# ---------------------------------------------------------------------------
# BPE
# ---------------------------------------------------------------------------

def _merge_pair(symbols, left, right):
    merged = []
    i = 0
    while i < len(symbols):
        if i + 1 < len(symbols) and symbols[i] == left and symbols[i + 1] == right:
            merged.append(left + right)
            i += 2
        else:
            merged.append(symbols[i])
            i += 1
    return merged


def _apply_merges(symbols, ranks):
    while len(symbols) > 1:
        best = None
        for pair in zip(symbols, symbols[1:]):
            rank = ranks.get(pair)
            if rank is not None and (best is None or rank < best[0]):
                best = (rank, pair)
        if best is None:
            break
        symbols = _merge_pair(symbols, *best[1])
    return symbols


def _check_minimum(vocab_size, alphabet, family):
    minimum = len(alphabet) + 1
    if vocab_size < minimum:
        raise VocabularySizeError(vocab_size, minimum, f"{family}: alphabet {len(alphabet)} + 1 special")


def train_bpe(corpus, vocab_size, pre_tokenizer=None, unk=DEFAULT_UNK):
    pre_tokenizer = pre_tokenizer or PreTokenizer()
    items = sorted(pre_tokenizer.counts(corpus).items())
    words = [list(token) for token, _ in items]
    freqs = [count for _, count in items]
    alphabet = sorted({ch for word in words for ch in word})
    _check_minimum(vocab_size, alphabet, 'bpe')

    pair_counts = Counter()
    locations = defaultdict(set)
    for index, (symbols, freq) in enumerate(zip(words, freqs)):
        for pair in zip(symbols, symbols[1:]):
            pair_counts[pair] += freq
            locations[pair].add(index)
    heap = [(-count, left, right) for (left, right), count in pair_counts.items()]
    heapq.heapify(heap)

    vocab = [unk, *alphabet]
    known = set(vocab)
    merges = []
    while len(vocab) < vocab_size:
        pair = None
        while heap:
            negative, left, right = heapq.heappop(heap)
            if pair_counts.get((left, right), 0) == -negative and negative < 0:
                pair = (left, right)
                break
        if pair is None:
            raise VocabularyExhaustedError(vocab_size, len(vocab), 'bpe')
        merges.append(pair)
        token = pair[0] + pair[1]
        if token not in known:
            known.add(token)
            vocab.append(token)

        touched = set()
        for index in sorted(locations.pop(pair)):
            symbols, freq = words[index], freqs[index]
            for old in zip(symbols, symbols[1:]):
                pair_counts[old] -= freq
                touched.add(old)
            symbols = _merge_pair(symbols, *pair)
            words[index] = symbols
            for new in zip(symbols, symbols[1:]):
                pair_counts[new] += freq
                locations[new].add(index)
                touched.add(new)
        for changed in touched:
            count = pair_counts[changed]
            if count > 0:
                heapq.heappush(heap, (-count, *changed))
            else:
                del pair_counts[changed]
        if len(merges) % 1000 == 0:
            logger.info("BPE: %d merges, vocabulary %d/%d", len(merges), len(vocab), vocab_size)

    logger.info("Trained BPE with %d merges over %d pre-token types", len(merges), len(items))
    return TokenizerModel(family='bpe', vocab=tuple(vocab), pre_tokenizer=pre_tokenizer,
                          requested_vocab_size=vocab_size, unk=unk, merges=tuple(merges))


# ---------------------------------------------------------------------------
# Unigram LM
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UnigramConfig:
    max_piece_length: int = 16
    seed_factor: int = 25
    seed_cap: int = 1_000_000
    em_iterations: int = 2
    shrink_ratio: float = 0.25

    def __post_init__(self):
        if self.max_piece_length < 1 or self.seed_factor < 1 or self.seed_cap < 1 or self.em_iterations < 1:
            raise TokenizerError(f"invalid unigram configuration {self}")
        if not 0 < self.shrink_ratio < 1:
            raise TokenizerError(f"shrink_ratio must lie in (0, 1), got {self.shrink_ratio}")

    def as_dict(self):
        return asdict(self)


def _logsumexp(values):
    top = max(values)
    if top == -math.inf:
        return top
    return top + math.log(math.fsum(math.exp(v - top) for v in values))


def _viterbi(text, logprobs, max_length, unknown_logprob, exclude=None):
    """Best segmentation of `text`; single characters outside `logprobs` score `unknown_logprob`."""
    n = len(text)
    best = [0.0] + [-math.inf] * n
    back = [0] * (n + 1)
    for end in range(1, n + 1):
        for start in range(max(0, end - max_length), end):
            if best[start] == -math.inf:
                continue
            piece = text[start:end]
            logprob = logprobs.get(piece) if piece != exclude else None
            if logprob is None:
                if end - start != 1:
                    continue
                logprob = unknown_logprob
            score = best[start] + logprob
            if score > best[end]:
                best[end] = score
                back[end] = start
    pieces = []
    end = n
    while end > 0:
        pieces.append(text[back[end]:end])
        end = back[end]
    return best[n], pieces[::-1]


def _expected_counts(items, logprobs, max_length):
    """One E-step: expected piece counts by forward-backward over every word."""
    expected = defaultdict(float)
    likelihood = 0.0
    for word, freq in items:
        n = len(word)
        alpha = [0.0] + [-math.inf] * n
        for end in range(1, n + 1):
            terms = [alpha[start] + logprobs[word[start:end]]
                     for start in range(max(0, end - max_length), end) if word[start:end] in logprobs]
            alpha[end] = _logsumexp(terms)
        beta = [-math.inf] * n + [0.0]
        for start in range(n - 1, -1, -1):
            terms = [logprobs[word[start:end]] + beta[end]
                     for end in range(start + 1, min(n, start + max_length) + 1) if word[start:end] in logprobs]
            beta[start] = _logsumexp(terms)
        total = alpha[n]
        likelihood += freq * total
        for start in range(n):
            for end in range(start + 1, min(n, start + max_length) + 1):
                piece = word[start:end]
                if piece in logprobs:
                    expected[piece] += freq * math.exp(alpha[start] + logprobs[piece] + beta[end] - total)
    return expected, likelihood


def _maximize(pieces, expected):
    counts = {piece: max(expected.get(piece, 0.0), _EXPECTED_COUNT_FLOOR) for piece in pieces}
    log_total = math.log(math.fsum(counts.values()))
    return {piece: math.log(count) - log_total for piece, count in counts.items()}


def _seed_pieces(items, alphabet, vocab_size, config):
    substrings = Counter()
    for word, freq in items:
        for start in range(len(word)):
            for end in range(start + 2, min(len(word), start + config.max_piece_length) + 1):
                substrings[word[start:end]] += freq
    limit = max(0, min(config.seed_cap, config.seed_factor * vocab_size) - len(alphabet))
    ranked = sorted(substrings.items(), key=lambda item: (-item[1] * len(item[0]), item[0]))[:limit]
    chars = Counter()
    for word, freq in items:
        for ch in word:
            chars[ch] += freq
    return {**{ch: chars[ch] for ch in alphabet}, **dict(ranked)}


def _prune(items, logprobs, max_length, removable):
    """Likelihood loss of removing each multi-character piece, per its Viterbi usage."""
    usage = Counter()
    for word, freq in items:
        for piece in _viterbi(word, logprobs, max_length, -math.inf)[1]:
            usage[piece] += freq
    losses = []
    for piece in removable:
        if usage[piece]:
            alternative = _viterbi(piece, logprobs, max_length, -math.inf, exclude=piece)[0]
            loss = usage[piece] * (logprobs[piece] - alternative)
        else:
            loss = 0.0
        losses.append((loss, piece))
    losses.sort()
    return losses


def train_unigram(corpus, vocab_size, pre_tokenizer=None, config=None, unk=DEFAULT_UNK):
    pre_tokenizer = pre_tokenizer or PreTokenizer()
    config = config or UnigramConfig()
    items = sorted(pre_tokenizer.counts(corpus).items())
    if not items:
        raise TokenizerError("cannot train a unigram model on a corpus with no words")
    alphabet = sorted({ch for word, _ in items for ch in word})
    _check_minimum(vocab_size, alphabet, 'unigram')

    seed = _seed_pieces(items, alphabet, vocab_size, config)
    if len(seed) + 1 < vocab_size:
        raise VocabularyExhaustedError(vocab_size, len(seed) + 1, 'unigram')
    log_total = math.log(sum(seed.values()))
    logprobs = {piece: math.log(count) - log_total for piece, count in seed.items()}
    max_length = max(len(piece) for piece in logprobs)
    required = set(alphabet)
    prune_log = []

    while True:
        for _ in range(config.em_iterations):
            expected, likelihood = _expected_counts(items, logprobs, max_length)
            logprobs = _maximize(logprobs, expected)
        size = len(logprobs) + 1
        logger.info("Unigram: %d pieces, log-likelihood %.4f", size, likelihood)
        if size <= vocab_size:
            break
        candidates = sorted(piece for piece in logprobs if piece not in required)
        remove = min(max(1, int(config.shrink_ratio * len(candidates))), size - vocab_size)
        removed = [piece for _, piece in _prune(items, logprobs, max_length, candidates)[:remove]]
        for piece in removed:
            del logprobs[piece]
        prune_log.append({'size': size, 'removed': removed})

    unk_logprob = min(logprobs.values()) - UNK_LOGPROB_OFFSET
    normalizer = _logsumexp([unk_logprob, *logprobs.values()])
    ordered = sorted(logprobs.items(), key=lambda item: (-item[1], item[0]))
    vocab = (unk, *(piece for piece, _ in ordered))
    values = (min(0.0, unk_logprob - normalizer), *(min(0.0, lp - normalizer) for _, lp in ordered))
    return TokenizerModel(family='unigram', vocab=vocab, pre_tokenizer=pre_tokenizer,
                          requested_vocab_size=vocab_size, unk=unk, piece_logprobs=values,
                          prune_log=tuple(prune_log))


def train_tokenizer(family, corpus, vocab_size, pre_tokenizer=None, unigram=None, unk=DEFAULT_UNK):
    if family == 'bpe':
        return train_bpe(corpus, vocab_size, pre_tokenizer, unk=unk)
    if family == 'unigram':
        return train_unigram(corpus, vocab_size, pre_tokenizer, unigram, unk=unk)
    return build_lookup(corpus, family, vocab_size, pre_tokenizer, unk=unk)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def dumps_model(model):
    return json.dumps(model.as_dict(), ensure_ascii=False, sort_keys=True, indent=1) + '\n'


def save_model(model, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_model(model), encoding='utf-8')


def _field(data, name, kind):
    if name not in data:
        raise ModelFormatError(name, "missing")
    value = data[name]
    if not isinstance(value, kind):
        raise ModelFormatError(name, f"expected {kind.__name__}, got {type(value).__name__}")
    return value


def load_model(path):
    try:
        data = json.loads(Path(path).read_text(encoding='utf-8'))
    except json.JSONDecodeError as exc:
        raise ModelFormatError('<file>', f"not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ModelFormatError('<file>', "top level is not an object")
    if data.get('version') != MODEL_FORMAT_VERSION:
        raise ModelFormatError('version', f"unsupported model version {data.get('version')!r}")
    family = _field(data, 'family', str)
    vocab = _field(data, 'vocab', list)
    unk = _field(data, 'unk', str)
    pre = _field(data, 'pre_tokenizer', dict)
    marker = _field(data, 'marker', dict)
    try:
        policy = MarkerPolicy(**marker)
    except TypeError as exc:
        raise ModelFormatError('marker', str(exc)) from exc
    try:
        pre_tokenizer = PreTokenizer(kind=pre.get('kind', 'none'), path=pre.get('path'), marker=policy)
    except TokenizerError as exc:
        raise ModelFormatError('pre_tokenizer', str(exc)) from exc
    merges = ()
    if family == 'bpe':
        merges = _field(data, 'merges', list)
        if any(not isinstance(pair, list) or len(pair) != 2 for pair in merges):
            raise ModelFormatError('merges', "every merge must be a [left, right] pair")
        merges = tuple(tuple(pair) for pair in merges)
    logprobs = ()
    prune_log = ()
    if family == 'unigram':
        logprobs = _field(data, 'piece_logprobs', list)
        if any(not isinstance(v, (int, float)) for v in logprobs):
            raise ModelFormatError('piece_logprobs', "values must be numbers")
        logprobs = tuple(float(v) for v in logprobs)
        prune_log = tuple(data.get('prune_log', ()))
    return TokenizerModel(
        family=family,
        vocab=tuple(vocab),
        pre_tokenizer=pre_tokenizer,
        requested_vocab_size=data.get('requested_vocab_size'),
        unk=unk,
        merges=merges,
        piece_logprobs=logprobs,
        prune_log=prune_log,
    )
