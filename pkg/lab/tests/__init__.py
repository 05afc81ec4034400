from pathlib import Path


def write_text(directory, name, lines):
    """Write `lines` as an LF-terminated UTF-8 file and return its path."""
    path = Path(directory) / name
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(''.join(line + '\n' for line in lines), encoding='utf-8')
    return path


def read_text(path):
    return Path(path).read_text(encoding='utf-8').splitlines()


def corpus_of(directory, lines, name='corpus.txt'):
    from lab.corpus import Corpus
    return Corpus.from_path(write_text(directory, name, lines))
