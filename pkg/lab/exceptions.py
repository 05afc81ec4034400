class MorphotokError(Exception):
    """Base class for every error raised by the toolkit"""


class CorpusError(MorphotokError):
    pass


class LexiconFormatError(MorphotokError):
    def __init__(self, path, line_number, reason):
        self.path = str(path)
        self.line_number = line_number
        self.reason = reason
        super().__init__(f"{self.path}:{line_number}: {reason}")


class GoldFormatError(LexiconFormatError):
    pass


class SegmenterError(MorphotokError):
    pass


class VocabularySizeError(MorphotokError):
    def __init__(self, requested, minimum, detail=''):
        self.requested = requested
        self.minimum = minimum
        message = f"vocab_size {requested} is below the required minimum {minimum}"
        if detail:
            message = f"{message} ({detail})"
        super().__init__(message)


class ModelFormatError(MorphotokError):
    def __init__(self, field, reason):
        self.field = field
        super().__init__(f"invalid model file, field '{field}': {reason}")


class StatsError(MorphotokError):
    pass


class RankDeficientError(StatsError):
    def __init__(self, columns):
        self.columns = list(columns)
        super().__init__(f"design matrix is rank deficient; collinear columns: {', '.join(self.columns)}")


class ManifestError(MorphotokError):
    """Invalid manifest field or missing referenced file"""

    def __init__(self, message, field=None, path=None):
        self.field = field
        self.path = str(path) if path is not None else None
        super().__init__(message)


class TokenizerError(MorphotokError):
    pass


class VocabularyExhaustedError(TokenizerError):
    def __init__(self, requested, reachable, family):
        self.requested = requested
        self.reachable = reachable
        super().__init__(
            f"{family} training can reach only {reachable} vocabulary entries, {requested} were requested"
        )


class ScoringError(MorphotokError):
    """Boundary scoring called outside its contract (empty gold or predicted set)"""
