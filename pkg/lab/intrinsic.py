"""Corpus Token Count and Rényi entropy of a tokenizer's unigram distribution."""
import json
import logging
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .exceptions import MorphotokError
from .tokenize import encode

logger = logging.getLogger(__name__)

DEFAULT_ALPHA = 2.5


@dataclass(frozen=True)
class TokenDistribution:
    counts: dict
    model_vocab_size: int

    @property
    def total(self):
        return sum(self.counts.values())

    @property
    def observed_vocab_size(self):
        return sum(1 for c in self.counts.values() if c > 0)

    def probabilities(self):
        total = self.total
        return [c / total for _, c in sorted(self.counts.items()) if c > 0]


@dataclass(frozen=True)
class IntrinsicReport:
    ctc: int
    alpha: float
    renyi_entropy: float | None
    renyi_efficiency_model: float | None
    renyi_efficiency_observed: float | None
    observed_vocab: int
    model_vocab: int

    def as_dict(self):
        return {
            'ctc': self.ctc,
            'alpha': self.alpha,
            'renyi_entropy': self.renyi_entropy,
            'renyi_efficiency_model': self.renyi_efficiency_model,
            'renyi_efficiency_observed': self.renyi_efficiency_observed,
            'observed_vocab': self.observed_vocab,
            'model_vocab': self.model_vocab,
        }


def _count_lines(model, lines):
    counts = Counter()
    for line in lines:
        counts.update(encode(model, line).ids)
    return counts


def token_distribution(model, corpus, workers=1):
    lines = list(corpus.lines())
    if workers > 1 and len(lines) > 1:
        size = math.ceil(len(lines) / workers)
        shards = [lines[i:i + size] for i in range(0, len(lines), size)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partial = list(pool.map(lambda shard: _count_lines(model, shard), shards))
        counts = Counter()
        for part in partial:
            counts.update(part)
    else:
        counts = _count_lines(model, lines)
    return TokenDistribution(counts=dict(sorted(counts.items())), model_vocab_size=len(model.vocab))


def count_ctc(model, corpus):
    return sum(len(encode(model, line).ids) for line in corpus.lines())


def renyi_entropy(probabilities, alpha=DEFAULT_ALPHA):
    """H_alpha in nats; alpha == 1 gives the Shannon entropy."""
    if alpha <= 0:
        raise MorphotokError(f"Rényi alpha must be positive, got {alpha}")
    probabilities = [p for p in probabilities if p > 0]
    if not probabilities:
        raise MorphotokError("Rényi entropy of an empty distribution is undefined")
    if alpha == 1:
        return max(0.0, -math.fsum(p * math.log(p) for p in probabilities))
    return max(0.0, math.log(math.fsum(p ** alpha for p in probabilities)) / (1 - alpha))


def _efficiency(entropy, size):
    if entropy is None or size < 2:
        return None
    return entropy / math.log(size)


def renyi(distribution, alpha=DEFAULT_ALPHA):
    """Entropy and both efficiency variants; an empty distribution gives nulls."""
    if alpha <= 0:
        raise MorphotokError(f"Rényi alpha must be positive, got {alpha}")
    entropy = renyi_entropy(distribution.probabilities(), alpha) if distribution.total else None
    return IntrinsicReport(
        ctc=distribution.total,
        alpha=alpha,
        renyi_entropy=entropy,
        renyi_efficiency_model=_efficiency(entropy, distribution.model_vocab_size),
        renyi_efficiency_observed=_efficiency(entropy, distribution.observed_vocab_size),
        observed_vocab=distribution.observed_vocab_size,
        model_vocab=distribution.model_vocab_size,
    )


def intrinsic_report(model, corpus, alpha=DEFAULT_ALPHA, workers=1):
    report = renyi(token_distribution(model, corpus, workers=workers), alpha)
    logger.info("Intrinsic: CTC=%d, H_%s=%s nats", report.ctc, alpha, report.renyi_entropy)
    return report


def write_report(report, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(report.as_dict(), indent=1, sort_keys=True) + '\n', encoding='utf-8')
