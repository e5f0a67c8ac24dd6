"""Domain errors. Every error names the module that raised it so the CLI can prefix messages."""

from __future__ import annotations


class LatentError(ValueError):
    module = "venmo-latent"

    @property
    def prefixed(self) -> str:
        return f"{self.module}: {self}"


class ConfigError(LatentError):
    module = "cli"


class InvalidSynthSpec(LatentError):
    module = "cli"


class MalformedRecord(LatentError):
    module = "corpus"

    def __init__(self, line_number: int, reason: str) -> None:
        super().__init__(f"line {line_number}: {reason}")
        self.line_number = line_number


class EmptyProfile(LatentError):
    module = "features"


class EmptyCorpus(LatentError):
    module = "vectorize"


class DimensionMismatch(LatentError):
    module = "vectorize"


class RowMismatch(LatentError):
    module = "vectorize"


class UnknownRegion(LatentError):
    module = "label"


class MissingLabels(LatentError):
    module = "label"


class MalformedLabels(LatentError):
    module = "label"


class SingleClass(LatentError):
    module = "model"


class NonFinite(LatentError):
    module = "model"


class VersionError(LatentError):
    module = "model"


class CorruptError(LatentError):
    module = "model"


class TooFewSamples(LatentError):
    module = "eval"


class HarvestError(LatentError):
    module = "harvest"


class UserNotFound(HarvestError):
    pass


class UnknownUsername(HarvestError):
    pass


class PatternNotFound(HarvestError):
    pass


class MalformedPage(HarvestError):
    def __init__(self, page_index: int, reason: str) -> None:
        super().__init__(f"page {page_index}: {reason}")
        self.page_index = page_index
