from lab.corpus import Corpus
from lab.intrinsic import intrinsic_report, write_report
from lab.management.base import ToolkitCommand, lab_setting
from lab.tokenize import load_model


class Command(ToolkitCommand):
    help = "Corpus token count and Rényi entropy/efficiency of a tokenizer on a corpus"

    def add_arguments(self, parser):
        parser.add_argument('--model', required=True)
        parser.add_argument('--in', dest='source', required=True)
        parser.add_argument('--alpha', type=float, default=None)
        parser.add_argument('--out', default=None)
        parser.add_argument('--workers', type=int, default=1)

    def handle(self, *args, **options):
        self.guarded(self.measure, **options)

    def measure(self, model, source, alpha, out, workers, **options):
        alpha = lab_setting('RENYI_ALPHA') if alpha is None else alpha
        report = intrinsic_report(load_model(model), Corpus.from_path(source), alpha=alpha, workers=workers)
        if out:
            write_report(report, out)
            self.stdout.write(f"{out}: CTC {report.ctc}, H_{alpha} {report.renyi_entropy}")
        else:
            self.write_json(report.as_dict())
