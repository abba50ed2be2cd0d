"""Exception taxonomy shared by every pipeline stage.

Errors fall into three families that the CLI maps onto exit codes:
input problems (exit 2), backend availability (exit 3), and everything
else (exit 1).
"""


class VidtrustError(Exception):
    """Base class for all pipeline errors."""


class InputError(VidtrustError):
    """Bad user-supplied data: files, documents, flag values."""


class ParseError(InputError):
    """A document or corpus line could not be parsed."""


class ValidationError(InputError):
    """A value violates a declared invariant (missing title, bad label...)."""


class UnsupportedFormatError(InputError):
    """File exists but uses a codec or layout we do not read."""


class CorruptFileError(InputError):
    """File is structurally damaged (truncated chunk, bad sizes)."""


class NotFoundError(InputError):
    """A referenced video id or fixture file does not exist."""


class ConfigError(InputError):
    """Unknown method name, bad weights, malformed backend address."""


class ContractError(VidtrustError):
    """A caller violated an operation precondition."""


class UndefinedReferenceError(ContractError):
    """WER asked for with an empty reference; the rate is undefined."""


class DegenerateCorpusError(ContractError):
    """Classifier training needs both classes present."""


class SourceUnavailableError(VidtrustError):
    """The video source adapter cannot be reached at all."""


class BackendUnavailableError(VidtrustError):
    """A model backend cannot be reached."""


class BackendOpError(VidtrustError):
    """The backend answered ok=false for one request (op-level failure)."""


class ProtocolError(VidtrustError):
    """A backend sent bytes that violate the wire protocol.

    Carries the offending line (truncated) so operators can see what the
    sidecar actually produced.
    """

    def __init__(self, message: str, raw: bytes | str = b""):
        if isinstance(raw, str):
            raw = raw.encode("utf-8", errors="replace")
        self.raw = raw[:256]
        super().__init__(message)
