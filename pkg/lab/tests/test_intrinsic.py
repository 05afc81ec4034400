import math
import random
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from lab.exceptions import MorphotokError
from lab.intrinsic import (
    TokenDistribution,
    count_ctc,
    intrinsic_report,
    renyi,
    renyi_entropy,
    token_distribution,
)
from lab.tokenize import TokenizerModel, build_lookup

from . import corpus_of


class RenyiTests(SimpleTestCase):
    def test_uniform(self):
        dist = TokenDistribution(counts={1: 5, 2: 5, 3: 5, 4: 5}, model_vocab_size=10)
        report = renyi(dist, 2.5)
        self.assertAlmostEqual(report.renyi_entropy, math.log(4), delta=1e-12)
        self.assertAlmostEqual(report.renyi_efficiency_observed, 1.0, delta=1e-12)
        self.assertAlmostEqual(report.renyi_efficiency_model, math.log(4) / math.log(10), delta=1e-12)

    def test_degenerate(self):
        self.assertEqual(renyi_entropy([1.0], 2.5), 0.0)
        report = renyi(TokenDistribution(counts={1: 7}, model_vocab_size=3), 2.5)
        self.assertEqual(report.renyi_entropy, 0.0)
        self.assertIsNone(report.renyi_efficiency_observed)

    def test_three_token_closed_form(self):
        expected = math.log(0.5 ** 2.5 + 2 * 0.25 ** 2.5) / -1.5
        self.assertAlmostEqual(renyi_entropy([0.5, 0.25, 0.25], 2.5), expected, delta=1e-9)
        self.assertAlmostEqual(expected, 0.9534, places=4)

    def test_shannon_limit(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            p = rng.dirichlet(np.ones(rng.integers(2, 30))).tolist()
            shannon = renyi_entropy(p, 1)
            self.assertAlmostEqual(shannon, -math.fsum(x * math.log(x) for x in p), delta=1e-12)
            self.assertLess(abs(renyi_entropy(p, 1 + 1e-6) - shannon), 1e-4)
            self.assertLess(abs(renyi_entropy(p, 1 - 1e-6) - shannon), 1e-4)

    def test_non_increasing_in_alpha(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            p = rng.dirichlet(np.ones(rng.integers(2, 40))).tolist()
            values = [renyi_entropy(p, a) for a in (0.5, 1, 2.5, 5)]
            self.assertTrue(all(b <= a + 1e-12 for a, b in zip(values, values[1:])))
            self.assertLessEqual(values[0], math.log(len(p)) + 1e-12)

    def test_alpha_must_be_positive(self):
        with self.assertRaises(MorphotokError):
            renyi_entropy([0.5, 0.5], 0)
        with self.assertRaises(MorphotokError):
            renyi(TokenDistribution(counts={1: 1}, model_vocab_size=2), -1)


class CorpusMetricTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_ctc(self):
        corpus = corpus_of(self.dir, ['aa bb', 'aa'])
        self.assertEqual(count_ctc(build_lookup(corpus, 'character'), corpus), 6)
        self.assertEqual(count_ctc(build_lookup(corpus, 'word', vocab_size=3), corpus), 3)
        self.assertEqual(count_ctc(build_lookup(corpus, 'character'), corpus_of(self.dir, [], 'empty.txt')), 0)

    def test_distribution(self):
        corpus = corpus_of(self.dir, ['a a a a'])
        model = build_lookup(corpus, 'character')
        dist = token_distribution(model, corpus)
        self.assertEqual(dist.counts, {model.token_id('a'): 4})
        self.assertEqual(dist.total, count_ctc(model, corpus))

    def test_empty_corpus_report(self):
        model = TokenizerModel(family='character', vocab=('<unk>', 'a'))
        report = intrinsic_report(model, corpus_of(self.dir, [], 'empty.txt'))
        self.assertEqual(report.ctc, 0)
        self.assertIsNone(report.renyi_entropy)

    def test_additive_and_order_free(self):
        rng = random.Random(3)
        lines = [' '.join(rng.choice(['ab', 'ba', 'abc', 'c']) for _ in range(rng.randint(1, 6))) for _ in range(60)]
        whole = corpus_of(self.dir, lines, 'whole.txt')
        model = build_lookup(whole, 'word', vocab_size=3)
        for trial in range(5):
            cut = rng.randint(0, len(lines))
            first = corpus_of(self.dir, lines[:cut], f'first{trial}.txt')
            second = corpus_of(self.dir, lines[cut:], f'second{trial}.txt')
            self.assertEqual(count_ctc(model, whole), count_ctc(model, first) + count_ctc(model, second))
        shuffled = lines[:]
        rng.shuffle(shuffled)
        reordered = corpus_of(self.dir, shuffled, 'shuffled.txt')
        self.assertEqual(intrinsic_report(model, whole).as_dict(), intrinsic_report(model, reordered).as_dict())

    def test_sharded_counting_matches(self):
        lines = [f'w{i % 7} w{i % 3} w{i % 11}' for i in range(100)]
        corpus = corpus_of(self.dir, lines)
        model = build_lookup(corpus, 'word', vocab_size=10)
        self.assertEqual(token_distribution(model, corpus).counts, token_distribution(model, corpus, workers=4).counts)
