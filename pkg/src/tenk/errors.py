"""Exception hierarchy shared across the itemization pipeline."""


class TenkError(Exception):
    """Base class for all errors raised by this package."""


class MalformedRef(TenkError):
    """A filing reference has a bad accession number or URL/path combination."""


class NetworkError(TenkError):
    """EDGAR was unreachable or answered with a non-2xx status."""


class EmptyInput(TenkError):
    """The raw filing carries no usable content."""


class ParseError(TenkError):
    """Raw bytes could not be decoded into text at all."""


class DictError(TenkError):
    """The keyword dictionary file is missing, incomplete, or unparseable."""


class CandidateMismatch(TenkError):
    """A candidate's offset does not fall inside any run of its document."""


class DegenerateData(TenkError):
    """Training data is empty or contains only one class."""


class ExternalUnavailable(TenkError):
    """The external scorer endpoint failed or returned a malformed response."""


class SpanError(TenkError):
    """Segment spans overlap or fall outside the document."""


class ConfigError(TenkError):
    """A configuration value is out of range or inconsistent."""


class EmptyCorpus(TenkError):
    """An evaluation was requested over zero judgements."""


class ModelMissing(TenkError):
    """An ablation mode needs a trained scorer but none was supplied."""


class NoStructureError(TenkError):
    """The reconstructor kept zero assignments for a filing."""

    def __init__(self, serial: str):
        super().__init__(f"no item structure survived reconstruction for {serial}")
        self.serial = serial


class UnknownSerial(TenkError):
    """A serial was requested that is neither stored nor cached."""


class UnknownTask(TenkError):
    """A review task id does not exist."""


class VerdictConflict(TenkError):
    """A verdict was posted for a task that is already resolved."""
