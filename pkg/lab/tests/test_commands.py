import io
import json
import tempfile
from contextlib import redirect_stdout
from pathlib import Path

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase

from lab.models import ExperimentRun
from morphotok.__main__ import main

from . import read_text, write_text
from .test_pipeline import toy_workspace


def call(*args):
    out = io.StringIO()
    call_command(*args, stdout=out)
    return out.getvalue()


class CommandTestCase(SimpleTestCase):
    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)

    def tearDown(self):
        self._tmp.cleanup()

    def path(self, name):
        return str(self.tmp / name)

    def assertExitCode(self, code, *args):
        with self.assertRaises(CommandError) as ctx:
            call(*args)
        self.assertEqual(ctx.exception.returncode, code)
        return ctx.exception


class CorpusCommandTests(CommandTestCase):
    def test_dedup_sample_stats(self):
        write_text(self.tmp, 'a.txt', ['one two', 'three', 'one two'])
        write_text(self.tmp, 'b.txt', ['three', 'four five six'])
        call('corpus', 'dedup', self.path('a.txt'), self.path('b.txt'), '--out', self.path('merged.txt'))
        self.assertEqual(read_text(self.tmp / 'merged.txt'), ['one two', 'three', 'four five six'])

        call('corpus', 'sample', self.path('merged.txt'), '--n', '2', '--seed', '1', '--out', self.path('s.txt'))
        self.assertEqual(len(read_text(self.tmp / 's.txt')), 2)

        stats = json.loads(call('corpus', 'stats', self.path('merged.txt')))
        self.assertEqual(stats['sentences'], 3)
        self.assertEqual(stats['word_tokens'], 6)

    def test_missing_source_exits_2(self):
        self.assertExitCode(2, 'corpus', 'stats', self.path('absent.txt'))

    def test_oversized_sample_exits_2(self):
        write_text(self.tmp, 'a.txt', ['x'])
        self.assertExitCode(2, 'corpus', 'sample', self.path('a.txt'), '--n', '5', '--out', self.path('s.txt'))


class TokenizerCommandTests(CommandTestCase):
    def setUp(self):
        super().setUp()
        write_text(self.tmp, 'train.txt', ['the cat sat on the mat', 'the dog sat on the log', 'a cat and a dog'])

    def test_train_encode_decode(self):
        call('tok', 'train', '--family', 'bpe', '--vocab-size', '20',
             '--in', self.path('train.txt'), '--out', self.path('bpe.json'))
        call('tok', 'encode', '--model', self.path('bpe.json'), '--in', self.path('train.txt'), '--out', self.path('ids.jsonl'))
        records = [json.loads(line) for line in read_text(self.tmp / 'ids.jsonl')]
        self.assertEqual(len(records), 3)
        self.assertEqual(set(records[0]), {'ids', 'spans'})
        call('tok', 'decode', '--model', self.path('bpe.json'), '--in', self.path('ids.jsonl'), '--out', self.path('back.txt'))
        self.assertEqual(read_text(self.tmp / 'back.txt'), read_text(self.tmp / 'train.txt'))

    def test_vocab_size_required(self):
        self.assertExitCode(1, 'tok', 'train', '--family', 'bpe', '--in', self.path('train.txt'), '--out', self.path('m.json'))

    def test_character_needs_no_vocab_size(self):
        call('tok', 'train', '--family', 'character', '--in', self.path('train.txt'), '--out', self.path('c.json'))
        call('tok', 'encode', '--model', self.path('c.json'), '--in', self.path('train.txt'),
             '--out', self.path('pieces.txt'), '--pieces')
        self.assertEqual(len(read_text(self.tmp / 'pieces.txt')), 3)

    def test_bad_jsonl_names_line(self):
        call('tok', 'train', '--family', 'character', '--in', self.path('train.txt'), '--out', self.path('c.json'))
        write_text(self.tmp, 'ids.jsonl', ['{"ids": [1], "spans": [[0, 1]]}', 'not json'])
        error = self.assertExitCode(1, 'tok', 'decode', '--model', self.path('c.json'),
                                    '--in', self.path('ids.jsonl'), '--out', self.path('out.txt'))
        self.assertIn('ids.jsonl:2', str(error))
        self.assertFalse((self.tmp / 'out.txt').exists())
        self.assertFalse((self.tmp / 'out.txt.tmp').exists())

    def test_intrinsic(self):
        call('tok', 'train', '--family', 'character', '--in', self.path('train.txt'), '--out', self.path('c.json'))
        report = json.loads(call('intrinsic', '--model', self.path('c.json'), '--in', self.path('train.txt')))
        self.assertEqual(report['ctc'], sum(len(line.replace(' ', '')) for line in read_text(self.tmp / 'train.txt')))
        self.assertEqual(report['alpha'], 2.5)


class SegmentCommandTests(CommandTestCase):
    def test_apply_and_strip(self):
        write_text(self.tmp, 'lex.tsv', ['walked\twalk ed', 'talking\ttalk ing'])
        write_text(self.tmp, 'in.txt', ['we walked', 'talking walked'])
        output = call('segment', 'apply', '--lexicon', self.path('lex.tsv'),
                      '--in', self.path('in.txt'), '--out', self.path('seg.txt'))
        self.assertIn('1 lexicon misses', output)
        self.assertEqual(read_text(self.tmp / 'seg.txt'), ['we walk@@ ed', 'talk@@ ing walk@@ ed'])
        call('segment', 'strip', '--in', self.path('seg.txt'), '--out', self.path('plain.txt'))
        self.assertEqual(read_text(self.tmp / 'plain.txt'), ['we walked', 'talking walked'])

    def test_malformed_lexicon_exits_1(self):
        write_text(self.tmp, 'lex.tsv', ['walked walk ed'])
        write_text(self.tmp, 'in.txt', ['walked'])
        error = self.assertExitCode(1, 'segment', 'apply', '--lexicon', self.path('lex.tsv'),
                                    '--in', self.path('in.txt'), '--out', self.path('seg.txt'))
        self.assertIn(':1', str(error))

    def test_train_mdl(self):
        write_text(self.tmp, 'in.txt', ['reopen rewrite open write', 'reopen rewrite'])
        output = call('segment', 'train-mdl', '--in', self.path('in.txt'), '--out', self.path('mdl.json'), '--seed', '3')
        self.assertIn('morphs', output)
        self.assertTrue((self.tmp / 'mdl.json').is_file())


class MorphCommandTests(CommandTestCase):
    def test_filter(self):
        write_text(self.tmp, 'raw.tsv', ['walked\twalk ed\tinflectional', 'talking\ttalk ed', 'cats\tcat s'])
        output = call('morph', 'filter', '--in', self.path('raw.tsv'),
                      '--kept', self.path('kept.tsv'), '--dropped', self.path('dropped.tsv'))
        self.assertIn('kept 2, dropped 1', output)
        self.assertEqual(read_text(self.tmp / 'kept.tsv'), ['walked\twalk ed\tinflectional', 'cats\tcat s\tunspecified'])
        self.assertEqual(read_text(self.tmp / 'dropped.tsv'),
                         ['talking\ttalk ed\tsegments do not concatenate to the word'])

    def test_eval_character(self):
        write_text(self.tmp, 'train.txt', ['walked talking cats'])
        write_text(self.tmp, 'gold.tsv', ['walked\twalk ed', 'cats\tcat s'])
        call('tok', 'train', '--family', 'character', '--in', self.path('train.txt'), '--out', self.path('c.json'))
        call('morph', 'eval', '--gold', self.path('gold.tsv'), '--model', self.path('c.json'), '--out', self.path('r.json'))
        report = json.loads((self.tmp / 'r.json').read_text(encoding='utf-8'))
        self.assertEqual(report['macro']['recall'], 1.0)


class StatsCommandTests(CommandTestCase):
    def test_correlation_and_anova(self):
        rows = ['tokenizer,pre_tokenizer,x,y', 'bpe,none,1,2', 'bpe,lex,2,4', 'unigram,none,3,7',
                'unigram,lex,4,8', 'bpe,none,5,11', 'unigram,lex,6,12']
        write_text(self.tmp, 't.csv', rows)
        result = json.loads(call('stats', 'corr', self.path('t.csv'), '--method', 'spearman', '--x', 'x', '--y', 'y'))
        self.assertEqual(result['kind'], 'spearman')
        self.assertAlmostEqual(result['estimate'], 1.0)
        call('stats', 'anova', self.path('t.csv'), '--response', 'y', '--a', 'tokenizer', '--b', 'pre_tokenizer',
             '--out', self.path('anova.json'))
        anova = json.loads((self.tmp / 'anova.json').read_text(encoding='utf-8'))
        self.assertIn('C(tokenizer)', anova['terms'])

    def test_unknown_column_exits_1(self):
        write_text(self.tmp, 't.csv', ['x,y', '1,2', '2,3', '3,5'])
        self.assertExitCode(1, 'stats', 'corr', self.path('t.csv'), '--x', 'x', '--y', 'z')


class RunCommandTests(TestCase):
    def test_run_records_results(self):
        with tempfile.TemporaryDirectory() as tmp:
            manifest = toy_workspace(tmp)
            out = io.StringIO()
            call_command('run', str(manifest), stdout=out)
            run = ExperimentRun.objects.get()
            self.assertEqual(run.status, ExperimentRun.STATUS_FINISHED)
            self.assertEqual(run.results.count(), 2)
            self.assertEqual(list(run.results.values_list('config_id', flat=True)), ['bpe-none-40', 'unigram-none-40'])
            self.assertTrue((Path(tmp) / 'out' / 'analysis.csv').is_file())

    def test_lexicons_sharing_a_file_name_are_recorded_separately(self):
        with tempfile.TemporaryDirectory() as tmp:
            grid = {'families': ['bpe'], 'pre_tokenizers': ['lexicon:a/lex.tsv', 'lexicon:b/lex.tsv'],
                    'vocab_sizes': [40]}
            manifest = toy_workspace(tmp, grid=grid)
            lexicon = read_text(Path(tmp) / 'lexicon.tsv')
            write_text(Path(tmp) / 'a', 'lex.tsv', lexicon)
            write_text(Path(tmp) / 'b', 'lex.tsv', lexicon[:3])
            call_command('run', str(manifest), stdout=io.StringIO())
            ids = list(ExperimentRun.objects.get().results.values_list('config_id', flat=True))
            self.assertEqual(len(set(ids)), 2)
            models = sorted(p.stem for p in (Path(tmp) / 'out' / 'models').glob('*.json'))
            self.assertEqual(models, sorted(ids))

    def test_missing_gold_exits_2(self):
        with tempfile.TemporaryDirectory() as tmp:
            manifest = toy_workspace(tmp, gold_sets=['absent.tsv'])
            with self.assertRaises(CommandError) as ctx:
                call_command('run', str(manifest), '--no-record', stdout=io.StringIO())
            self.assertEqual(ctx.exception.returncode, 2)
            self.assertFalse(ExperimentRun.objects.exists())
            self.assertFalse((Path(tmp) / 'out' / 'analysis.csv').exists())

    def test_failed_entries_exit_1(self):
        with tempfile.TemporaryDirectory() as tmp:
            grid = {'families': ['bpe'], 'pre_tokenizers': ['none'], 'vocab_sizes': [100000]}
            manifest = toy_workspace(tmp, grid=grid)
            with self.assertRaises(CommandError) as ctx:
                call_command('run', str(manifest), stdout=io.StringIO())
            self.assertEqual(ctx.exception.returncode, 1)
            self.assertIn('bpe-none-100000', str(ctx.exception))
            self.assertEqual(ExperimentRun.objects.get().failed_entries, ['bpe-none-100000'])


class VersionTests(SimpleTestCase):
    def test_version(self):
        out = io.StringIO()
        with redirect_stdout(out):
            self.assertEqual(main(['--version']), 0)
        self.assertEqual(out.getvalue().strip(), 'morphotok 0.4.0')
