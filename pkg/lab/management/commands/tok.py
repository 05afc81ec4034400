import json

from lab.corpus import Corpus, read_lines, write_lines
from lab.exceptions import TokenizerError
from lab.management.base import LabCommand, lab_setting
from lab.segment import MARKER_POSITIONS, MarkerPolicy
from lab.tokenize import (
    FAMILIES,
    Encoding,
    PreTokenizer,
    UnigramConfig,
    decode,
    encode,
    load_model,
    render_pieces,
    save_model,
    train_tokenizer,
)


class Command(LabCommand):
    help = "Train tokenizers, encode text to ids and decode ids back to text"

    def add_actions(self, subparsers):
        train = subparsers.add_parser('train', help="train one tokenizer model")
        train.add_argument('--family', choices=FAMILIES, required=True)
        train.add_argument('--vocab-size', type=int, default=None)
        train.add_argument('--pre', default='none', help="none, lexicon:PATH or mdl:PATH")
        train.add_argument('--marker', default=None)
        train.add_argument('--position', choices=MARKER_POSITIONS, default='suffix')
        train.add_argument('--in', dest='source', required=True)
        train.add_argument('--out', required=True)

        enc = subparsers.add_parser('encode', help="encode a corpus, one JSON record per line")
        enc.add_argument('--model', required=True)
        enc.add_argument('--in', dest='source', required=True)
        enc.add_argument('--out', required=True)
        enc.add_argument('--pieces', action='store_true', help="write marker-rendered pieces instead of ids")

        dec = subparsers.add_parser('decode', help="decode JSONL id records back to text")
        dec.add_argument('--model', required=True)
        dec.add_argument('--in', dest='source', required=True)
        dec.add_argument('--out', required=True)

    def handle_train(self, family, vocab_size, pre, marker, position, source, out, **options):
        if family != 'character' and vocab_size is None:
            raise TokenizerError(f"--vocab-size is required for the {family} family")
        policy = MarkerPolicy(marker=marker or lab_setting('MARKER'), position=position)
        model = train_tokenizer(
            family,
            Corpus.from_path(source),
            vocab_size,
            PreTokenizer.from_ref(pre, marker=policy),
            unigram=UnigramConfig(**lab_setting('UNIGRAM')),
            unk=lab_setting('UNK_TOKEN'),
        )
        save_model(model, out)
        self.stdout.write(f"{out}: {family} model with {len(model.vocab)} entries")

    def handle_encode(self, model, source, out, pieces, **options):
        tokenizer = load_model(model)
        if pieces:
            lines = (render_pieces(tokenizer, encode(tokenizer, line)) for line in read_lines(source))
        else:
            lines = (json.dumps(encode(tokenizer, line).as_dict()) for line in read_lines(source))
        count = write_lines(out, lines)
        self.stdout.write(f"{out}: {count} sentences encoded")

    def handle_decode(self, model, source, out, **options):
        tokenizer = load_model(model)

        def decoded():
            for line_number, line in enumerate(read_lines(source), start=1):
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise TokenizerError(f"{source}:{line_number}: not a JSON record") from exc
                yield decode(tokenizer, Encoding.from_dict(record))

        count = write_lines(out, decoded())
        self.stdout.write(f"{out}: {count} sentences decoded")
