"""Exception types shared across the package."""


class ChessvecError(Exception):
    """Base class for all package-specific errors."""


class IllegalMove(ChessvecError):
    """A move that is not legal in the position it was applied to."""


class MalformedSan(ChessvecError):
    """Move text that does not match SAN or long-algebraic syntax."""


class NoLegalMatch(ChessvecError):
    """Syntactically valid move text with no legal move behind it."""


class AmbiguousSan(ChessvecError):
    """SAN text matched by more than one legal move."""


class GameError(ChessvecError):
    """A single unparseable or illegal game inside a PGN collection.

    Carries the byte offset of the game's first tag line so the bad
    game can be located in the source file.
    """

    def __init__(self, message, offset=None, game_index=None):
        super().__init__(message)
        self.message = message
        self.offset = offset
        self.game_index = game_index

    def __str__(self):
        where = []
        if self.game_index is not None:
            where.append(f"game {self.game_index}")
        if self.offset is not None:
            where.append(f"byte {self.offset}")
        if where:
            return f"{self.message} ({', '.join(where)})"
        return self.message


class MalformedToken(ChessvecError):
    """Text that does not parse as a move/position/lemma token."""


class UnknownToken(ChessvecError):
    """A query token missing from the model vocabulary."""


class TooFewTokens(ChessvecError):
    """A query that needs more tokens than it was given."""


class EmptyVocabulary(ChessvecError):
    """No token survived the min_count cutoff."""


class NonFiniteLoss(ChessvecError):
    """Training loss became NaN or infinite."""


class FormatError(ChessvecError):
    """A model file that does not follow the expected layout."""

    def __init__(self, message, line=None):
        super().__init__(message)
        self.message = message
        self.line = line

    def __str__(self):
        if self.line is not None:
            return f"{self.message} (line {self.line})"
        return self.message


class PerplexityTooLarge(ChessvecError):
    """Projection perplexity incompatible with the number of points."""


class NonFiniteGradient(ChessvecError):
    """Projection gradient became NaN or infinite."""


class NonMoveVocabulary(ChessvecError):
    """A statistic that needs move tokens ran on a non-move vocabulary."""
