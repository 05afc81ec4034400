from lab.corpus import NORMALIZATIONS, Corpus, corpus_stats, ingest_dedup, sample
from lab.management.base import LabCommand, lab_setting


class Command(LabCommand):
    help = "Corpus preparation: deduplicate, sample and describe sentence files"

    def add_actions(self, subparsers):
        dedup = subparsers.add_parser('dedup', help="merge sources keeping the first copy of each line")
        dedup.add_argument('sources', nargs='+', metavar='SRC')
        dedup.add_argument('--out', required=True)
        dedup.add_argument('--normalization', choices=NORMALIZATIONS, default=None)

        sampler = subparsers.add_parser('sample', help="seeded uniform sample without replacement")
        sampler.add_argument('source', metavar='SRC')
        sampler.add_argument('--n', type=int, required=True)
        sampler.add_argument('--seed', type=int, default=None)
        sampler.add_argument('--out', required=True)

        stats = subparsers.add_parser('stats', help="sentence, token, type and alphabet counts")
        stats.add_argument('source', metavar='SRC')
        stats.add_argument('--out', default=None)

    def handle_dedup(self, sources, out, normalization, **options):
        corpus = ingest_dedup(sources, out, normalization=normalization or lab_setting('NORMALIZATION'))
        self.stdout.write(f"{corpus.path}: {corpus.line_count} unique lines")

    def handle_sample(self, source, n, seed, out, **options):
        seed = lab_setting('DEFAULT_SEED') if seed is None else seed
        corpus = sample(Corpus.from_path(source), n, seed, out)
        self.stdout.write(f"{corpus.path}: {corpus.line_count} lines (seed {seed})")

    def handle_stats(self, source, out, **options):
        self.write_json(corpus_stats(Corpus.from_path(source)).as_dict(), out)
