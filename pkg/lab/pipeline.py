"""
Experiment manifests and the grid runner behind `manage.py run`.

A run prepares the training corpus (dedup, optional seeded sample), builds
each distinct pre-tokenizer once, then trains and evaluates every grid entry.
Artifacts land under the manifest's output directory:

    corpus/train.txt            segmenters/morfessor.json
    models/<config>.json        reports/<config>.morph.json
    reports/<config>.intrinsic.json
    logs/<config>.log           analysis.csv    summary.json

All randomness comes from the manifest seed, so reruns are byte-identical.
"""
import hashlib
import json
import logging
import math
import os
import threading
from collections import Counter
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field, replace
from pathlib import Path

from . import intrinsic, morphscore
from .corpus import NORMALIZATIONS, Corpus, ingest_dedup, sample, word_counts
from .exceptions import ManifestError, MorphotokError
from .segment import MarkerPolicy, MdlConfig, train_mdl
from .stats import AnalysisTable
from .tokenize import FAMILIES, PreTokenizer, UnigramConfig, save_model, train_tokenizer

logger = logging.getLogger(__name__)

RESULT_COLUMNS = (
    'config_id', 'tokenizer', 'pre_tokenizer', 'vocab_size', 'status',
    'recall', 'precision', 'f1', 'macro_f1', 'micro_recall', 'micro_precision',
    'evaluated', 'ctc', 'renyi_entropy', 'renyi_efficiency', 'renyi_efficiency_observed',
    'model_vocab',
)

DEFAULTS = {
    'VOCAB_SIZES': (8192, 16384, 50277),
    'RENYI_ALPHA': intrinsic.DEFAULT_ALPHA,
    'MARKER': '@@',
    'NORMALIZATION': 'NFC',
    'MDL_EPOCHS': 5,
    'UNIGRAM': {},
    'DEFAULT_SEED': 0,
    'RUN_WORKERS': 1,
}


def level_of(pre_tokenizer):
    """AnalysisTable level of a manifest pre-tokenizer reference."""
    if pre_tokenizer == 'none':
        return 'none'
    if pre_tokenizer.startswith('lexicon:'):
        return 'analyzer'
    return 'morfessor'


def pre_tokenizer_labels(pre_tokenizers):
    """
    Config-id label per pre-tokenizer reference: `none`, `morfessor`, or
    `<kind>-<file stem>`. Stems shared by several files get a short digest
    of the full reference appended.
    """
    labels = {}
    for pre in pre_tokenizers:
        kind, _, path = pre.partition(':')
        labels[pre] = f'{kind}-{Path(path).stem}' if path else pre
    shared = Counter(labels.values())
    for pre, label in labels.items():
        if shared[label] > 1:
            labels[pre] = f"{label}-{hashlib.sha1(pre.encode('utf-8')).hexdigest()[:8]}"
    return labels


@dataclass(frozen=True)
class GridEntry:
    index: int
    family: str
    pre_tokenizer: str
    vocab_size: int | None
    label: str = ''

    @property
    def level(self):
        return level_of(self.pre_tokenizer)

    @property
    def config_id(self):
        pre = self.label or pre_tokenizer_labels([self.pre_tokenizer])[self.pre_tokenizer]
        return f"{self.family}-{pre}-{self.vocab_size if self.vocab_size else 'all'}"


@dataclass(frozen=True)
class ExperimentManifest:
    name: str
    corpus: tuple
    families: tuple
    gold_sets: tuple
    eval_corpus: Path
    output_dir: Path
    pre_tokenizers: tuple = ('none',)
    vocab_sizes: tuple = DEFAULTS['VOCAB_SIZES']
    normalization: str = 'NFC'
    sample_size: int | None = None
    seed: int = 0
    alpha: float = intrinsic.DEFAULT_ALPHA
    marker: str = '@@'
    mdl_epochs: int = 5
    unigram: UnigramConfig = field(default_factory=UnigramConfig)
    workers: int = 1

    def grid(self):
        entries = []
        labels = pre_tokenizer_labels(self.pre_tokenizers)
        for family in self.families:
            for pre in self.pre_tokenizers:
                sizes = (None,) if family == 'character' else self.vocab_sizes
                for size in sizes:
                    entries.append(GridEntry(len(entries), family, pre, size, labels[pre]))
        return entries

    def referenced_files(self):
        files = [('corpus', p) for p in self.corpus]
        files += [('gold_sets', p) for p in self.gold_sets]
        files.append(('eval_corpus', self.eval_corpus))
        for pre in self.pre_tokenizers:
            if ':' in pre:
                files.append(('grid.pre_tokenizers', Path(pre.partition(':')[2])))
        return files

    def validate(self):
        for name, path in self.referenced_files():
            if not Path(path).is_file():
                raise ManifestError(f"missing file: {path}", field=name, path=path)

    def with_workers(self, workers):
        if workers < 1:
            raise ManifestError(f"workers must be at least 1, got {workers}", field='workers')
        return replace(self, workers=workers)


def _list(data, name, default=None, required=False):
    value = data.get(name, default)
    if value is None:
        if required:
            raise ManifestError(f"manifest field '{name}' is required", field=name)
        return default
    if not isinstance(value, list) or (required and not value):
        raise ManifestError(f"manifest field '{name}' must be a non-empty list", field=name)
    return value


def _integer(value, name, minimum):
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ManifestError(f"manifest field '{name}' must be an integer >= {minimum}, got {value!r}", field=name)
    return value


def parse_manifest(data, base_dir, default_name='run', defaults=None):
    defaults = {**DEFAULTS, **(defaults or {})}
    if not isinstance(data, dict):
        raise ManifestError("manifest must be a JSON object")
    base_dir = Path(base_dir)

    def resolve(value, name):
        if not isinstance(value, str) or not value:
            raise ManifestError(f"manifest field '{name}' must hold path strings", field=name)
        path = Path(value)
        return path if path.is_absolute() else base_dir / path

    grid = data.get('grid')
    if not isinstance(grid, dict):
        raise ManifestError("manifest field 'grid' must be an object", field='grid')
    families = _list(grid, 'families', required=True)
    for family in families:
        if family not in FAMILIES:
            raise ManifestError(f"unknown family '{family}' (expected one of {', '.join(FAMILIES)})", field='grid.families')

    pre_tokenizers = []
    for pre in _list(grid, 'pre_tokenizers', default=['none']):
        if pre in ('none', 'morfessor'):
            pre_tokenizers.append(pre)
        elif isinstance(pre, str) and pre.partition(':')[0] in ('lexicon', 'mdl') and pre.partition(':')[2]:
            kind, _, path = pre.partition(':')
            pre_tokenizers.append(f"{kind}:{resolve(path, 'grid.pre_tokenizers')}")
        else:
            raise ManifestError(f"invalid pre-tokenizer {pre!r}", field='grid.pre_tokenizers')
    if 'morphemic' in families and 'none' in pre_tokenizers:
        raise ManifestError("the morphemic family needs a segmenting pre-tokenizer, not 'none'",
                            field='grid.pre_tokenizers')

    vocab_sizes = [_integer(v, 'grid.vocab_sizes', 2) for v in _list(grid, 'vocab_sizes', default=list(defaults['VOCAB_SIZES']))]
    for name, values in (('grid.families', families), ('grid.pre_tokenizers', pre_tokenizers), ('grid.vocab_sizes', vocab_sizes)):
        if len(set(values)) != len(values):
            raise ManifestError(f"manifest field '{name}' has duplicate values", field=name)

    normalization = data.get('normalization', defaults['NORMALIZATION'])
    if normalization not in NORMALIZATIONS:
        raise ManifestError(f"normalization must be one of {', '.join(NORMALIZATIONS)}", field='normalization')
    sample_size = data.get('sample_size')
    if sample_size is not None:
        _integer(sample_size, 'sample_size', 1)
    alpha = data.get('alpha', defaults['RENYI_ALPHA'])
    if isinstance(alpha, bool) or not isinstance(alpha, (int, float)) or alpha <= 0:
        raise ManifestError(f"alpha must be a positive number, got {alpha!r}", field='alpha')
    marker = data.get('marker', defaults['MARKER'])
    if not isinstance(marker, str) or not marker or any(ch.isspace() for ch in marker):
        raise ManifestError("marker must be a non-empty string without whitespace", field='marker')
    mdl = data.get('mdl', {})
    if not isinstance(mdl, dict):
        raise ManifestError("manifest field 'mdl' must be an object", field='mdl')
    unigram = {**defaults['UNIGRAM'], **data.get('unigram', {})}
    try:
        unigram = UnigramConfig(**unigram)
    except (TypeError, MorphotokError) as exc:
        raise ManifestError(f"invalid unigram settings: {exc}", field='unigram') from exc

    if 'eval_corpus' not in data:
        raise ManifestError("manifest field 'eval_corpus' is required", field='eval_corpus')
    if 'output_dir' not in data:
        raise ManifestError("manifest field 'output_dir' is required", field='output_dir')
    name = data.get('name', default_name)
    if not isinstance(name, str) or not name:
        raise ManifestError("manifest field 'name' must be a non-empty string", field='name')
    manifest = ExperimentManifest(
        name=name,
        corpus=tuple(resolve(p, 'corpus') for p in _list(data, 'corpus', required=True)),
        families=tuple(families),
        pre_tokenizers=tuple(pre_tokenizers),
        vocab_sizes=tuple(vocab_sizes),
        gold_sets=tuple(resolve(p, 'gold_sets') for p in _list(data, 'gold_sets', required=True)),
        eval_corpus=resolve(data['eval_corpus'], 'eval_corpus'),
        output_dir=resolve(data['output_dir'], 'output_dir'),
        normalization=normalization,
        sample_size=sample_size,
        seed=_integer(data.get('seed', defaults['DEFAULT_SEED']), 'seed', 0),
        alpha=float(alpha),
        marker=marker,
        mdl_epochs=_integer(mdl.get('epochs', defaults['MDL_EPOCHS']), 'mdl.epochs', 1),
        unigram=unigram,
        workers=_integer(data.get('workers', defaults['RUN_WORKERS']), 'workers', 1),
    )
    ids = Counter(entry.config_id for entry in manifest.grid())
    duplicates = sorted(config_id for config_id, n in ids.items() if n > 1)
    if duplicates:
        raise ManifestError(f"grid entries share config ids: {', '.join(duplicates)}", field='grid.pre_tokenizers')
    return manifest


def load_manifest(path, defaults=None):
    path = Path(path)
    if not path.is_file():
        raise ManifestError(f"missing file: {path}", field='manifest', path=path)
    try:
        data = json.loads(path.read_text(encoding='utf-8'))
    except json.JSONDecodeError as exc:
        raise ManifestError(f"manifest is not valid JSON: {exc}", field='manifest', path=path) from exc
    return parse_manifest(data, path.parent, default_name=path.stem, defaults=defaults)


# ---------------------------------------------------------------------------
# Running
# ---------------------------------------------------------------------------

@dataclass
class EntryResult:
    entry: GridEntry
    status: str = 'pending'
    row: dict = field(default_factory=dict)
    error: str = ''
    model_path: str = ''

    def as_dict(self):
        return {
            'config_id': self.entry.config_id,
            'family': self.entry.family,
            'pre_tokenizer': self.entry.pre_tokenizer,
            'vocab_size': self.entry.vocab_size,
            'status': self.status,
            'error': self.error,
            'row': self.row,
        }


@dataclass
class RunSummary:
    manifest: ExperimentManifest
    results: list
    training_lines: int = 0

    @property
    def failed(self):
        return [r for r in self.results if r.status != 'ok']

    @property
    def exit_code(self):
        return 1 if self.failed else 0

    def as_dict(self):
        return {
            'name': self.manifest.name,
            'seed': self.manifest.seed,
            'alpha': self.manifest.alpha,
            'training_lines': self.training_lines,
            'entries': [
                {'config_id': r.entry.config_id, 'status': r.status, 'error': r.error}
                for r in self.results
            ],
            'failed': len(self.failed),
        }


class _ThreadFilter(logging.Filter):
    def __init__(self, thread_id):
        super().__init__()
        self.thread_id = thread_id

    def filter(self, record):
        return record.thread == self.thread_id


def _json_dump(data, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + '.tmp')
    try:
        tmp.write_text(json.dumps(data, ensure_ascii=False, indent=1, sort_keys=True) + '\n', encoding='utf-8')
        os.replace(tmp, path)
    except BaseException:
        tmp.unlink(missing_ok=True)
        raise


def _finite(value):
    return value if value is None or math.isfinite(value) else None


class ExperimentRunner:
    """Trains and evaluates every grid entry of a manifest."""

    def __init__(self, manifest, on_entry=None):
        self.manifest = manifest
        self.on_entry = on_entry
        self.out = Path(manifest.output_dir)
        self.policy = MarkerPolicy(marker=manifest.marker)

    def prepare_corpus(self):
        train = ingest_dedup(list(self.manifest.corpus), self.out / 'corpus' / 'train.txt',
                             normalization=self.manifest.normalization)
        if self.manifest.sample_size is not None:
            train = sample(train, self.manifest.sample_size, self.manifest.seed, train.path)
        return train

    def build_pre_tokenizers(self, train):
        built = {}
        for ref in self.manifest.pre_tokenizers:
            if ref == 'morfessor':
                model = train_mdl(word_counts(train), MdlConfig(epochs=self.manifest.mdl_epochs), seed=self.manifest.seed)
                path = self.out / 'segmenters' / 'morfessor.json'
                model.save(path)
                built[ref] = PreTokenizer(kind='mdl', path=str(path), marker=self.policy, segmenter=model)
            else:
                built[ref] = PreTokenizer.from_ref(ref, marker=self.policy)
        return built

    def run_entry(self, entry, train, pre_tokenizers, gold_sets, eval_corpus):
        result = EntryResult(entry=entry)
        log_path = self.out / 'logs' / f'{entry.config_id}.log'
        log_path.parent.mkdir(parents=True, exist_ok=True)
        handler = logging.FileHandler(log_path, mode='w', encoding='utf-8')
        handler.setFormatter(logging.Formatter('[%(name)s] %(levelname)s %(message)s'))
        handler.addFilter(_ThreadFilter(threading.get_ident()))
        package_logger = logging.getLogger('lab')
        package_logger.addHandler(handler)
        try:
            logger.info("Training %s", entry.config_id)
            model = train_tokenizer(entry.family, train, entry.vocab_size, pre_tokenizers[entry.pre_tokenizer],
                                    unigram=self.manifest.unigram)
            model_path = self.out / 'models' / f'{entry.config_id}.json'
            save_model(model, model_path)
            result.model_path = str(model_path)

            reports = {}
            pooled = []
            for gold in gold_sets:
                reports[Path(gold.path).name] = morphscore.evaluate(gold, model).as_dict()
                pooled.extend(gold.entries)
            morph = morphscore.evaluate(morphscore.GoldSet(entries=tuple(pooled)), model)
            reports['pooled'] = morph.as_dict()
            _json_dump(reports, self.out / 'reports' / f'{entry.config_id}.morph.json')

            report = intrinsic.intrinsic_report(model, eval_corpus, alpha=self.manifest.alpha)
            _json_dump(report.as_dict(), self.out / 'reports' / f'{entry.config_id}.intrinsic.json')

            result.row = {
                'recall': morph.macro_recall,
                'precision': morph.macro_precision,
                'f1': morph.table_f1,
                'macro_f1': morph.macro_f1,
                'micro_recall': morph.micro_recall,
                'micro_precision': morph.micro_precision,
                'evaluated': morph.evaluated,
                'ctc': report.ctc,
                'renyi_entropy': _finite(report.renyi_entropy),
                'renyi_efficiency': _finite(report.renyi_efficiency_model),
                'renyi_efficiency_observed': _finite(report.renyi_efficiency_observed),
                'model_vocab': report.model_vocab,
            }
            result.status = 'ok'
        except MorphotokError as exc:
            logger.error("%s failed: %s", entry.config_id, exc)
            result.status = 'failed'
            result.error = str(exc)
        finally:
            package_logger.removeHandler(handler)
            handler.close()
        return result

    def run(self):
        self.manifest.validate()
        self.out.mkdir(parents=True, exist_ok=True)
        train = self.prepare_corpus()
        pre_tokenizers = self.build_pre_tokenizers(train)
        gold_sets = [morphscore.load_goldset(p, normalization=self.manifest.normalization) for p in self.manifest.gold_sets]
        eval_corpus = Corpus.from_path(self.manifest.eval_corpus)
        grid = self.manifest.grid()
        logger.info("Run '%s': %d grid entries, %d worker(s)", self.manifest.name, len(grid), self.manifest.workers)

        results = [None] * len(grid)
        args = (train, pre_tokenizers, gold_sets, eval_corpus)
        if self.manifest.workers > 1:
            with ThreadPoolExecutor(max_workers=self.manifest.workers) as pool:
                futures = {pool.submit(self.run_entry, entry, *args): entry for entry in grid}
                for future in as_completed(futures):
                    result = future.result()
                    results[result.entry.index] = result
                    self._notify(result)
        else:
            for entry in grid:
                result = self.run_entry(entry, *args)
                results[entry.index] = result
                self._notify(result)

        summary = RunSummary(manifest=self.manifest, results=results, training_lines=train.line_count)
        self.analysis_table(results).to_csv(self.out / 'analysis.csv')
        _json_dump(summary.as_dict(), self.out / 'summary.json')
        logger.info("Run '%s' finished: %d ok, %d failed",
                    self.manifest.name, len(results) - len(summary.failed), len(summary.failed))
        return summary

    def _notify(self, result):
        if self.on_entry is not None:
            self.on_entry(result)

    @staticmethod
    def analysis_table(results):
        rows = []
        for result in results:
            entry = result.entry
            rows.append({
                'config_id': entry.config_id,
                'tokenizer': entry.family,
                'pre_tokenizer': entry.level,
                'vocab_size': entry.vocab_size if entry.vocab_size else '',
                'status': result.status,
                **result.row,
            })
        # object dtype keeps integers integral and missing values empty in the CSV
        return AnalysisTable.from_rows(rows, columns=RESULT_COLUMNS, dtype=object)


def run(manifest, on_entry=None):
    return ExperimentRunner(manifest, on_entry=on_entry).run()
