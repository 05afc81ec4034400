from lab.corpus import read_lines
from lab.management.base import LabCommand, lab_setting
from lab.morphscore import UNITS, evaluate, filter_goldset, load_goldset, write_goldset, write_report
from lab.tokenize import load_model


class Command(LabCommand):
    help = "MorphScore evaluation and gold-set filtering"

    def add_actions(self, subparsers):
        ev = subparsers.add_parser('eval', help="score a tokenizer against a gold segmentation set")
        ev.add_argument('--gold', required=True)
        ev.add_argument('--model', required=True)
        ev.add_argument('--out', required=True)
        ev.add_argument('--per-word', default=None, help="also write per-word scores as JSONL")
        ev.add_argument('--unit', choices=UNITS, default='codepoint')
        ev.add_argument('--workers', type=int, default=1)

        filt = subparsers.add_parser('filter', help="drop gold entries whose segments do not spell the word")
        filt.add_argument('--in', dest='source', required=True)
        filt.add_argument('--kept', required=True)
        filt.add_argument('--dropped', required=True)

    def handle_eval(self, gold, model, out, per_word, unit, workers, **options):
        goldset = load_goldset(gold, normalization=lab_setting('NORMALIZATION'))
        report = evaluate(goldset, load_model(model), unit=unit, workers=workers)
        write_report(report, out, per_word=per_word)
        self.stdout.write(
            f"{out}: evaluated {report.evaluated}/{report.total}, "
            f"recall {report.macro_recall}, precision {report.macro_precision}"
        )

    def handle_filter(self, source, kept, dropped, **options):
        raw = []
        for line in read_lines(source):
            if not line.strip():
                continue
            fields = line.split('\t')
            word = fields[0].strip()
            segments = fields[1].split() if len(fields) > 1 else []
            category = fields[2].strip() if len(fields) > 2 and fields[2].strip() else 'unspecified'
            raw.append((word, segments, category))
        kept_entries, dropped_entries = filter_goldset(raw)
        write_goldset(kept_entries, kept)
        with open(dropped, 'w', encoding='utf-8', newline='\n') as handle:
            for entry in dropped_entries:
                handle.write(f"{entry.word}\t{' '.join(entry.segments)}\t{entry.reason}\n")
        self.stdout.write(f"kept {len(kept_entries)}, dropped {len(dropped_entries)}")
