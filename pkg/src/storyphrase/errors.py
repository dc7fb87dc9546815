"""Exception types raised across the toolkit."""


class StoryphraseError(Exception):
    """Base class for all toolkit errors."""


class EmptyCorpus(StoryphraseError):
    pass


class OrderTooLarge(StoryphraseError):
    pass


class BadContextLength(StoryphraseError):
    pass


class EmptySequence(StoryphraseError):
    pass


class NonPositiveTemperature(StoryphraseError):
    pass


class InvalidDistribution(StoryphraseError):
    pass


class KZero(StoryphraseError):
    pass


class POutOfRange(StoryphraseError):
    pass


class EmptyGeneratedText(StoryphraseError):
    pass


class NoCharacters(StoryphraseError):
    pass


class EmptyInput(StoryphraseError):
    pass


class NoRules(StoryphraseError):
    pass


class EmptyList(StoryphraseError):
    pass


class EmptyText(StoryphraseError):
    pass


class AttemptMatchesAssigned(StoryphraseError):
    pass


class AlphaOutOfRange(StoryphraseError):
    pass


class EmptyDictionary(StoryphraseError):
    pass


class PoolExhausted(StoryphraseError):
    pass


class RoundClosed(StoryphraseError):
    pass


class RoundAlreadyTerminal(StoryphraseError):
    pass


class RoundLocked(StoryphraseError):
    """Round opened out of order (a prior round was skipped or not finished)."""


class MalformedLog(StoryphraseError):
    pass


class LogCorrupt(StoryphraseError):
    def __init__(self, line_number, message):
        super().__init__(f"event log corrupt at line {line_number}: {message}")
        self.line_number = line_number


class ConfigError(StoryphraseError):
    pass


class StageError(StoryphraseError):
    """Pipeline stage failure; carries the stage name."""

    def __init__(self, stage, message):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
