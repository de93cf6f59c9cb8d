"""Exception hierarchy shared by all modules."""


class AtrError(Exception):
    """Base class for every error raised by this package."""


class NotSquarefree(AtrError):
    pass


class NarrowClassNumberNotOne(AtrError):
    pass


class SearchBoundExceeded(AtrError):
    def __init__(self, msg, bound=None):
        super().__init__(msg)
        self.bound = bound


class AdditiveReduction(AtrError):
    pass


class NormBoundExceeded(AtrError):
    pass


class SingularEmbedding(AtrError):
    pass


class NoOptimalEmbedding(AtrError):
    pass


class TableTooSmall(AtrError):
    pass


class DepthExceeded(AtrError):
    pass


class TruncationInsufficient(AtrError):
    pass


class DegenerateFixedPoint(AtrError):
    pass


class ConfigError(AtrError):
    pass


class AdmissibilityError(AtrError):
    pass
