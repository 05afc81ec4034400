import itertools
import math
import random
import tempfile
from pathlib import Path

from django.test import SimpleTestCase

from lab.corpus import Corpus
from lab.exceptions import LexiconFormatError, ModelFormatError, SegmenterError
from lab.segment import (
    MarkerPolicy,
    MdlConfig,
    MdlModel,
    SegmentationLexicon,
    apply_segmentation,
    load_lexicon,
    mdl_cost,
    segment_word,
    strip_markers,
    train_mdl,
)

from . import read_text, write_text

REOPEN = {'reopen': 5, 'rewrite': 5, 'open': 5, 'write': 5}


def splits(word):
    """Every segmentation of `word` (all subsets of its inner boundaries)."""
    for cuts in itertools.product((False, True), repeat=len(word) - 1):
        pieces, start = [], 0
        for index, cut in enumerate(cuts, start=1):
            if cut:
                pieces.append(word[start:index])
                start = index
        pieces.append(word[start:])
        yield pieces


def brute_force_cost(word_counts):
    best = math.inf
    words = list(word_counts)
    for choice in itertools.product(*(list(splits(w)) for w in words)):
        counts = {}
        for word, pieces in zip(words, choice):
            for piece in pieces:
                counts[piece] = counts.get(piece, 0) + word_counts[word]
        best = min(best, mdl_cost(counts))
    return best


class LexiconTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_load(self):
        path = write_text(self.dir, 'lex.tsv', ['books\tbook s', 'cat\tcat'])
        lexicon = load_lexicon(path)
        self.assertEqual(lexicon.segment('books'), ['book', 's'])
        self.assertEqual(lexicon.segment('cat'), ['cat'])
        self.assertEqual(len(lexicon), 2)

    def test_empty_segment_list_is_an_error(self):
        path = write_text(self.dir, 'lex.tsv', ['books\tbook s', 'x\t'])
        with self.assertRaises(LexiconFormatError) as ctx:
            load_lexicon(path)
        self.assertEqual(ctx.exception.line_number, 2)

    def test_missing_tab_is_an_error(self):
        path = write_text(self.dir, 'lex.tsv', ['books book s'])
        with self.assertRaises(LexiconFormatError) as ctx:
            load_lexicon(path)
        self.assertEqual(ctx.exception.line_number, 1)

    def test_later_duplicates_override(self):
        path = write_text(self.dir, 'lex.tsv', ['books\tbooks', 'books\tbook s'])
        lexicon = load_lexicon(path)
        self.assertEqual(lexicon.overrides, 1)
        self.assertEqual(lexicon.segment('books'), ['book', 's'])

    def test_non_concatenating_entry_skipped(self):
        path = write_text(self.dir, 'lex.tsv', ['went\tgo ed', 'books\tbook s'])
        lexicon = load_lexicon(path)
        self.assertEqual(lexicon.skipped, 1)
        self.assertNotIn('went', lexicon)

    def test_miss_returns_whole_word_and_counts(self):
        lexicon = SegmentationLexicon({'books': ['book', 's']})
        self.assertEqual(segment_word('zzz', lexicon), ['zzz'])
        self.assertEqual(segment_word('books', lexicon), ['book', 's'])
        self.assertEqual(lexicon.misses, 1)

    def test_empty_segment_rejected(self):
        with self.assertRaises(SegmenterError):
            SegmentationLexicon({'ab': ['ab', '']})


class MarkerTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)
        self.lexicon = SegmentationLexicon({'books': ['book', 's'], 'undoing': ['un', 'do', 'ing']})

    def tearDown(self):
        self.tmp.cleanup()

    def test_apply_suffix_marker(self):
        corpus = Corpus.from_path(write_text(self.dir, 'c.txt', ['books here', 'undoing it']))
        out = apply_segmentation(corpus, self.lexicon, MarkerPolicy(), self.dir / 'seg.txt')
        self.assertEqual(read_text(out.path), ['book@@ s here', 'un@@ do@@ ing it'])
        self.assertEqual(out.line_count, 2)

    def test_apply_prefix_marker(self):
        corpus = Corpus.from_path(write_text(self.dir, 'c.txt', ['books here']))
        out = apply_segmentation(corpus, self.lexicon, MarkerPolicy(position='prefix'), self.dir / 'seg.txt')
        self.assertEqual(read_text(out.path), ['book @@s here'])

    def test_strip_round_trip(self):
        line = 'undoing books here zzz'
        for policy in (MarkerPolicy(), MarkerPolicy(marker='##', position='prefix')):
            pieces = []
            for word in line.split():
                pieces.extend(policy.render(self.lexicon.segment(word)))
            self.assertEqual(strip_markers(' '.join(pieces), policy), line)

    def test_word_containing_marker_rejected(self):
        corpus = Corpus.from_path(write_text(self.dir, 'c.txt', ['books here', 'foo@@ bar']))
        with self.assertRaises(SegmenterError) as ctx:
            apply_segmentation(corpus, self.lexicon, MarkerPolicy(), self.dir / 'seg.txt')
        self.assertIn('foo@@', str(ctx.exception))
        self.assertFalse((self.dir / 'seg.txt').exists())
        self.assertFalse((self.dir / 'seg.txt.tmp').exists())
        corpus = Corpus.from_path(write_text(self.dir, 'c.txt', ['foo@@ bar']))
        out = apply_segmentation(corpus, self.lexicon, MarkerPolicy(marker='##'), self.dir / 'seg.txt')
        self.assertEqual(read_text(out.path), ['foo@@ bar'])

    def test_invalid_policy(self):
        with self.assertRaises(SegmenterError):
            MarkerPolicy(marker='')
        with self.assertRaises(SegmenterError):
            MarkerPolicy(position='infix')


class MdlTests(SimpleTestCase):
    def test_unsplit_cost(self):
        self.assertAlmostEqual(mdl_cost(REOPEN), 82.28, places=2)

    def test_reopen_rewrite(self):
        model = train_mdl(REOPEN, MdlConfig(epochs=5), seed=0)
        self.assertEqual(segment_word('reopen', model), ['re', 'open'])
        self.assertEqual(segment_word('rewrite', model), ['re', 'write'])
        self.assertAlmostEqual(model.cost(), 61.93, places=2)
        self.assertLessEqual(model.cost(), mdl_cost(REOPEN))

    def test_single_character(self):
        model = train_mdl({'a': 10})
        self.assertEqual(model.morph_counts, {'a': 10})
        self.assertEqual(model.segment('a'), ['a'])

    def test_abab_matches_brute_force(self):
        model = train_mdl({'abab': 1})
        self.assertAlmostEqual(model.cost(), brute_force_cost({'abab': 1}), places=9)
        self.assertAlmostEqual(model.cost(), 3 * math.log(3), places=9)
        self.assertEqual(model.segment('abab'), ['ab', 'ab'])

    def test_small_table_matches_brute_force(self):
        counts = {'abab': 3, 'ab': 2, 'ba': 1}
        model = train_mdl(counts, seed=7)
        self.assertAlmostEqual(model.cost(), brute_force_cost(counts), places=6)

    def test_tables_that_trap_binary_splitting(self):
        for counts in ({'bb': 4, 'bbb': 1, 'bbba': 2}, {'ba': 1, 'bbbb': 1}):
            with self.subTest(counts=counts):
                model = train_mdl(counts)
                self.assertAlmostEqual(model.cost(), brute_force_cost(counts), places=6)

    def test_random_tables_match_brute_force(self):
        rng = random.Random(2024)
        for trial in range(60):
            size, counts = rng.randint(2, 3), {}
            while len(counts) < size:
                word = ''.join(rng.choice('ab') for _ in range(rng.randint(2, 6)))
                counts[word] = rng.randint(1, 4)
            with self.subTest(trial=trial, counts=counts):
                model = train_mdl(counts, seed=trial)
                self.assertAlmostEqual(model.cost(), brute_force_cost(counts), places=6)

    def test_local_search_without_exhaustive_pass(self):
        counts = {'abab': 3, 'ab': 2, 'ba': 1}
        model = train_mdl(counts, MdlConfig(exhaustive_limit=0), seed=7)
        self.assertLessEqual(model.cost(), mdl_cost(counts) + 1e-9)
        history = model.cost_history
        self.assertTrue(all(b <= a + 1e-6 for a, b in zip(history, history[1:])))
        for word in counts:
            self.assertEqual(''.join(model.segment(word)), word)

    def test_negative_exhaustive_limit(self):
        with self.assertRaises(SegmenterError):
            MdlConfig(exhaustive_limit=-1)

    def test_cost_never_increases(self):
        model = train_mdl({'walked': 4, 'walking': 3, 'talked': 5, 'talking': 2, 'walks': 1}, seed=3)
        history = model.cost_history
        self.assertTrue(all(b <= a + 1e-6 for a, b in zip(history, history[1:])))
        self.assertAlmostEqual(history[-1], model.cost(), places=6)

    def test_deterministic(self):
        counts = {'walked': 4, 'walking': 3, 'talked': 5, 'talking': 2}
        self.assertEqual(train_mdl(counts, seed=11).morph_counts, train_mdl(counts, seed=11).morph_counts)

    def test_segments_concatenate(self):
        model = train_mdl(REOPEN)
        for word in ('reopen', 'unseenword', 'x', 'rewritten'):
            self.assertEqual(''.join(model.segment(word)), word)

    def test_empty_table(self):
        with self.assertRaises(SegmenterError):
            train_mdl({})

    def test_save_load(self):
        model = train_mdl(REOPEN)
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'mdl.json'
            model.save(path)
            loaded = MdlModel.load(path)
        self.assertEqual(loaded.morph_counts, model.morph_counts)
        self.assertEqual(loaded.segment('reopen'), ['re', 'open'])

    def test_unknown_version(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'mdl.json'
            path.write_text('{"version": 9, "morphs": []}', encoding='utf-8')
            with self.assertRaises(ModelFormatError):
                MdlModel.load(path)
