import hashlib
import json
import tempfile
from pathlib import Path

from django.test import SimpleTestCase

from lab.exceptions import ManifestError
from lab.pipeline import ExperimentRunner, GridEntry, load_manifest, parse_manifest, run
from lab.stats import AnalysisTable

from . import read_text, write_text

STEMS = ['walk', 'talk', 'play', 'jump', 'paint', 'cook']
SUFFIXES = ['', 's', 'ed', 'ing', 'er']

TRAIN_LINES = [
    f'{a}{x} {b}{y} {c}'
    for a in STEMS for b in STEMS for x in SUFFIXES for y, c in zip(SUFFIXES, ['the', 'a', 'we', 'they', 'it'])
    if a != b
]
GOLD_LINES = [
    'walked\twalk ed\tinflectional',
    'talking\ttalk ing\tinflectional',
    'players\tplay er s',
    'jumps\tjump s\tinflectional',
    'painter\tpaint er\tderivational',
    'cooked\tcook ed',
]
EVAL_LINES = ['we walked and they talked', 'the painter paints', 'a cook cooking']


def toy_workspace(directory, **overrides):
    directory = Path(directory)
    write_text(directory, 'train.txt', TRAIN_LINES)
    write_text(directory, 'gold.tsv', GOLD_LINES)
    write_text(directory, 'eval.txt', EVAL_LINES)
    write_text(directory, 'lexicon.tsv', [line.rsplit('\t', 1)[0] if line.count('\t') == 2 else line
                                           for line in GOLD_LINES])
    data = {
        'name': 'toy',
        'corpus': ['train.txt'],
        'gold_sets': ['gold.tsv'],
        'eval_corpus': 'eval.txt',
        'output_dir': 'out',
        'grid': {'families': ['bpe', 'unigram'], 'pre_tokenizers': ['none'], 'vocab_sizes': [40]},
        'seed': 7,
        **overrides,
    }
    path = directory / 'manifest.json'
    path.write_text(json.dumps(data), encoding='utf-8')
    return path


class ManifestTests(SimpleTestCase):
    def base(self, **changes):
        data = {
            'corpus': ['c.txt'],
            'gold_sets': ['g.tsv'],
            'eval_corpus': 'e.txt',
            'output_dir': 'out',
            'grid': {'families': ['bpe'], 'vocab_sizes': [100]},
        }
        data.update(changes)
        return data

    def assertField(self, data, field):
        with self.assertRaises(ManifestError) as ctx:
            parse_manifest(data, '/base')
        self.assertEqual(ctx.exception.field, field)

    def test_defaults_and_relative_paths(self):
        manifest = parse_manifest(self.base(), '/base', defaults={'RENYI_ALPHA': 3.0})
        self.assertEqual(manifest.corpus, (Path('/base/c.txt'),))
        self.assertEqual(manifest.output_dir, Path('/base/out'))
        self.assertEqual(manifest.pre_tokenizers, ('none',))
        self.assertEqual(manifest.alpha, 3.0)
        self.assertEqual(manifest.seed, 0)

    def test_errors_name_the_field(self):
        self.assertField(self.base(corpus=[]), 'corpus')
        self.assertField(self.base(grid={'families': ['wordpiece']}), 'grid.families')
        self.assertField(self.base(grid={'families': ['bpe'], 'vocab_sizes': [1]}), 'grid.vocab_sizes')
        self.assertField(self.base(grid={'families': ['bpe'], 'vocab_sizes': [64, 64]}), 'grid.vocab_sizes')
        self.assertField(self.base(grid={'families': ['bpe'], 'pre_tokenizers': ['spacy']}), 'grid.pre_tokenizers')
        self.assertField(self.base(alpha=0), 'alpha')
        self.assertField(self.base(seed=-1), 'seed')
        self.assertField(self.base(normalization='NFX'), 'normalization')
        self.assertField(self.base(unigram={'em_iterations': 'many', 'bogus': 1}), 'unigram')
        data = self.base()
        del data['eval_corpus']
        self.assertField(data, 'eval_corpus')

    def test_morphemic_needs_segmenter(self):
        self.assertField(self.base(grid={'families': ['morphemic'], 'pre_tokenizers': ['none']}),
                         'grid.pre_tokenizers')

    def test_grid_order_and_ids(self):
        manifest = parse_manifest(self.base(grid={
            'families': ['character', 'bpe'],
            'pre_tokenizers': ['none', 'lexicon:lex/telugu.tsv'],
            'vocab_sizes': [100, 200],
        }), '/base')
        ids = [entry.config_id for entry in manifest.grid()]
        self.assertEqual(ids, [
            'character-none-all', 'character-lexicon-telugu-all',
            'bpe-none-100', 'bpe-none-200', 'bpe-lexicon-telugu-100', 'bpe-lexicon-telugu-200',
        ])
        self.assertEqual([entry.index for entry in manifest.grid()], list(range(6)))
        self.assertEqual(GridEntry(0, 'bpe', 'morfessor', 8).level, 'morfessor')
        self.assertEqual(manifest.grid()[1].level, 'analyzer')

    def test_shared_file_stems_get_distinct_ids(self):
        manifest = parse_manifest(self.base(grid={
            'families': ['bpe'],
            'pre_tokenizers': ['lexicon:a/lex.tsv', 'lexicon:b/lex.tsv', 'lexicon:c/other.tsv'],
            'vocab_sizes': [40],
        }), '/base')
        ids = [entry.config_id for entry in manifest.grid()]
        self.assertEqual(len(set(ids)), 3)
        self.assertTrue(ids[0].startswith('bpe-lexicon-lex-'))
        self.assertTrue(ids[1].startswith('bpe-lexicon-lex-'))
        self.assertEqual(ids[2], 'bpe-lexicon-other-40')

    def test_colliding_config_ids_rejected(self):
        digest = hashlib.sha1('lexicon:/base/a/lex.tsv'.encode('utf-8')).hexdigest()[:8]
        self.assertField(self.base(grid={
            'families': ['bpe'],
            'pre_tokenizers': ['lexicon:a/lex.tsv', 'lexicon:b/lex.tsv', f'lexicon:c/lex-{digest}.tsv'],
            'vocab_sizes': [40],
        }), 'grid.pre_tokenizers')

    def test_missing_file_is_reported(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = toy_workspace(tmp, gold_sets=['absent.tsv'])
            manifest = load_manifest(path)
            with self.assertRaises(ManifestError) as ctx:
                manifest.validate()
            self.assertEqual(ctx.exception.field, 'gold_sets')

    def test_workers_override(self):
        manifest = parse_manifest(self.base(), '/base')
        self.assertEqual(manifest.with_workers(4).workers, 4)
        with self.assertRaises(ManifestError):
            manifest.with_workers(0)


class RunTests(SimpleTestCase):
    def test_toy_run(self):
        with tempfile.TemporaryDirectory() as tmp:
            seen = []
            summary = run(load_manifest(toy_workspace(tmp)), on_entry=seen.append)
            out = Path(tmp) / 'out'
            self.assertEqual(summary.exit_code, 0)
            self.assertEqual(len(seen), 2)
            table = AnalysisTable.read_csv(out / 'analysis.csv')
            self.assertEqual(len(table), 2)
            self.assertEqual(list(table.frame['config_id']), ['bpe-none-40', 'unigram-none-40'])
            self.assertEqual(set(table.frame['status']), {'ok'})
            for value in table.numeric('recall'):
                self.assertTrue(0.0 <= value <= 1.0)
            for config in ('bpe-none-40', 'unigram-none-40'):
                self.assertTrue((out / 'models' / f'{config}.json').is_file())
                reports = json.loads((out / 'reports' / f'{config}.morph.json').read_text(encoding='utf-8'))
                self.assertEqual(set(reports), {'gold.tsv', 'pooled'})
                self.assertTrue((out / 'reports' / f'{config}.intrinsic.json').is_file())
                self.assertTrue((out / 'logs' / f'{config}.log').is_file())
            self.assertEqual(len(read_text(out / 'corpus' / 'train.txt')), len(set(TRAIN_LINES)))

    def test_rerun_is_byte_identical(self):
        with tempfile.TemporaryDirectory() as first, tempfile.TemporaryDirectory() as second:
            run(load_manifest(toy_workspace(first, sample_size=200)))
            run(load_manifest(toy_workspace(second, sample_size=200)).with_workers(2))
            for name in ('analysis.csv', 'summary.json', 'models/bpe-none-40.json', 'models/unigram-none-40.json',
                         'corpus/train.txt'):
                self.assertEqual((Path(first) / 'out' / name).read_bytes(),
                                 (Path(second) / 'out' / name).read_bytes(), name)

    def test_failed_entry_is_kept_in_table(self):
        with tempfile.TemporaryDirectory() as tmp:
            grid = {'families': ['character', 'bpe'], 'pre_tokenizers': ['none'], 'vocab_sizes': [100000]}
            summary = run(load_manifest(toy_workspace(tmp, grid=grid)))
            self.assertEqual(summary.exit_code, 1)
            self.assertEqual([r.entry.config_id for r in summary.failed], ['bpe-none-100000'])
            table = AnalysisTable.read_csv(Path(tmp) / 'out' / 'analysis.csv')
            self.assertEqual(list(table.frame['status']), ['ok', 'failed'])

    def test_lexicon_pre_tokenizer(self):
        with tempfile.TemporaryDirectory() as tmp:
            grid = {'families': ['morphemic'], 'pre_tokenizers': ['lexicon:lexicon.tsv'], 'vocab_sizes': [30]}
            summary = run(load_manifest(toy_workspace(tmp, grid=grid)))
            self.assertEqual(summary.exit_code, 0)
            row = summary.results[0].row
            self.assertEqual(row['recall'], 1.0)
            self.assertEqual(row['precision'], 1.0)

    def test_missing_gold_set_writes_nothing(self):
        with tempfile.TemporaryDirectory() as tmp:
            manifest = load_manifest(toy_workspace(tmp, gold_sets=['absent.tsv']))
            with self.assertRaises(ManifestError):
                ExperimentRunner(manifest).run()
            self.assertFalse((Path(tmp) / 'out' / 'analysis.csv').exists())
