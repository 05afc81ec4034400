from lab.corpus import Corpus, read_lines, word_counts, write_lines
from lab.management.base import LabCommand, lab_setting
from lab.segment import (
    MARKER_POSITIONS,
    MarkerPolicy,
    MdlConfig,
    MdlModel,
    apply_segmentation,
    load_lexicon,
    strip_markers,
    train_mdl,
)


class Command(LabCommand):
    help = "Morphological pre-segmentation: train an MDL segmenter, apply a segmenter, strip markers"

    def add_actions(self, subparsers):
        train = subparsers.add_parser('train-mdl', help="train a baseline MDL segmenter on a corpus")
        train.add_argument('--in', dest='source', required=True)
        train.add_argument('--out', required=True)
        train.add_argument('--epochs', type=int, default=None)
        train.add_argument('--corpus-weight', type=float, default=1.0)
        train.add_argument('--seed', type=int, default=None)

        apply = subparsers.add_parser('apply', help="segment every word of a corpus")
        source = apply.add_mutually_exclusive_group(required=True)
        source.add_argument('--lexicon')
        source.add_argument('--mdl')
        apply.add_argument('--lexicon-source', choices=['external-analyzer', 'external-morfessor'],
                           default='external-analyzer')
        apply.add_argument('--marker', default=None)
        apply.add_argument('--position', choices=MARKER_POSITIONS, default='suffix')
        apply.add_argument('--in', dest='source', required=True)
        apply.add_argument('--out', required=True)

        strip = subparsers.add_parser('strip', help="rejoin marker-segmented text into words")
        strip.add_argument('--marker', default=None)
        strip.add_argument('--position', choices=MARKER_POSITIONS, default='suffix')
        strip.add_argument('--in', dest='source', required=True)
        strip.add_argument('--out', required=True)

    def _policy(self, marker, position):
        return MarkerPolicy(marker=marker or lab_setting('MARKER'), position=position)

    def handle_train_mdl(self, source, out, epochs, corpus_weight, seed, **options):
        config = MdlConfig(epochs=epochs or lab_setting('MDL_EPOCHS'), corpus_weight=corpus_weight)
        seed = lab_setting('DEFAULT_SEED') if seed is None else seed
        model = train_mdl(word_counts(Corpus.from_path(source)), config, seed=seed)
        model.save(out)
        self.stdout.write(f"{out}: {len(model.morph_counts)} morphs, cost {model.cost():.4f}")

    def handle_apply(self, lexicon, mdl, lexicon_source, marker, position, source, out, **options):
        normalization = lab_setting('NORMALIZATION')
        segmenter = load_lexicon(lexicon, lexicon_source, normalization) if lexicon else MdlModel.load(mdl)
        corpus = apply_segmentation(Corpus.from_path(source), segmenter, self._policy(marker, position), out)
        misses = getattr(segmenter, 'misses', None)
        suffix = f", {misses} lexicon misses" if misses is not None else ''
        self.stdout.write(f"{corpus.path}: {corpus.line_count} lines{suffix}")

    def handle_strip(self, marker, position, source, out, **options):
        policy = self._policy(marker, position)
        count = write_lines(out, (strip_markers(line, policy) for line in read_lines(source)))
        self.stdout.write(f"{out}: {count} lines")
