"""
Sentence corpora: ingestion with deduplication, seeded sampling and statistics.

A corpus is a UTF-8 text file with one sentence per line (LF endings). The
functions here stream their inputs; deduplication keeps only a 16-byte digest
per distinct line in memory.
"""
import hashlib
import logging
import os
import random
import unicodedata
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from .exceptions import CorpusError

logger = logging.getLogger(__name__)

NORMALIZATIONS = ('NFC', 'none')


def normalize(text, normalization='NFC'):
    if normalization == 'NFC':
        return unicodedata.normalize('NFC', text)
    if normalization == 'none':
        return text
    raise CorpusError(f"unknown normalization '{normalization}' (expected one of {', '.join(NORMALIZATIONS)})")


def read_lines(path):
    """
    Yield the lines of a UTF-8 file without their line terminator.
    Raises CorpusError naming the file and the 1-based line number on
    invalid UTF-8.
    """
    path = Path(path)
    with path.open('rb') as handle:
        for line_number, raw in enumerate(handle, start=1):
            if raw.endswith(b'\n'):
                raw = raw[:-1]
            if raw.endswith(b'\r'):
                raw = raw[:-1]
            try:
                yield raw.decode('utf-8')
            except UnicodeDecodeError as exc:
                raise CorpusError(f"{path}:{line_number}: invalid UTF-8 byte sequence ({exc.reason})") from exc


def write_lines(path, lines):
    """Write lines atomically (temp file + rename). Returns the line count."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + '.tmp')
    count = 0
    try:
        with tmp.open('w', encoding='utf-8', newline='\n') as handle:
            for line in lines:
                handle.write(line)
                handle.write('\n')
                count += 1
        os.replace(tmp, path)
    except BaseException:
        tmp.unlink(missing_ok=True)
        raise
    return count


@dataclass(frozen=True)
class Corpus:
    path: Path
    line_count: int

    @classmethod
    def from_path(cls, path):
        path = Path(path)
        if not path.is_file():
            raise CorpusError(f"corpus file not found: {path}")
        count = sum(1 for _ in read_lines(path))
        return cls(path=path, line_count=count)

    def lines(self):
        return read_lines(self.path)

    def __iter__(self):
        return self.lines()

    def __len__(self):
        return self.line_count


@dataclass(frozen=True)
class CorpusStats:
    sentences: int
    word_tokens: int
    word_types: int
    type_token_ratio: float | None
    alphabet_size: int

    def as_dict(self):
        return {
            'sentences': self.sentences,
            'word_tokens': self.word_tokens,
            'word_types': self.word_types,
            'type_token_ratio': self.type_token_ratio,
            'alphabet_size': self.alphabet_size,
        }


def ingest_dedup(sources, out, normalization='NFC'):
    """
    Merge `sources` in priority order into `out`, keeping the first
    occurrence of each distinct (normalized) line and dropping blank lines.
    """
    seen = set()
    stats = Counter()

    def unique_lines():
        for source in sources:
            for line in read_lines(source):
                stats['read'] += 1
                line = normalize(line, normalization)
                if not line.strip():
                    stats['blank'] += 1
                    continue
                digest = hashlib.blake2b(line.encode('utf-8'), digest_size=16).digest()
                if digest in seen:
                    stats['duplicate'] += 1
                    continue
                seen.add(digest)
                yield line

    count = write_lines(out, unique_lines())
    logger.info(
        "Ingested %d lines from %d source(s): kept %d, dropped %d duplicates and %d blank lines",
        stats['read'], len(sources), count, stats['duplicate'], stats['blank'],
    )
    return Corpus(path=Path(out), line_count=count)


def sample(corpus, n, seed, out):
    """Uniform sample of `n` lines without replacement, kept in input order."""
    if n < 0:
        raise CorpusError(f"sample size must be non-negative, got {n}")
    if n > corpus.line_count:
        raise CorpusError(f"cannot sample {n} lines from a corpus of {corpus.line_count} lines")
    chosen = set(random.Random(seed).sample(range(corpus.line_count), n))
    # materialise before writing: `out` may be the corpus itself
    selected = [line for index, line in enumerate(corpus.lines()) if index in chosen]
    count = write_lines(out, selected)
    logger.info("Sampled %d of %d lines (seed=%d)", count, corpus.line_count, seed)
    return Corpus(path=Path(out), line_count=count)


def word_counts(corpus):
    """Whitespace-token frequencies, in first-occurrence order."""
    counts = Counter()
    for line in corpus.lines():
        counts.update(line.split())
    return counts


def corpus_stats(corpus):
    sentences = 0
    counts = Counter()
    alphabet = set()
    for line in corpus.lines():
        sentences += 1
        words = line.split()
        counts.update(words)
        for word in words:
            alphabet.update(word)
    tokens = sum(counts.values())
    return CorpusStats(
        sentences=sentences,
        word_tokens=tokens,
        word_types=len(counts),
        type_token_ratio=len(counts) / tokens if tokens else None,
        alphabet_size=len(alphabet),
    )
