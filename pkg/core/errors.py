"""
Error types shared by every stage of the forecaster
----------------------------------------------------
ValidationError and its children map to exit code 2, everything else to 3.
"""


class ForecastError(Exception):
    """Base class for all errors raised by this project."""

    exit_code = 3


class ValidationError(ForecastError):
    """Input data or arguments violate a documented invariant."""

    exit_code = 2


class FormatError(ValidationError):
    """A file does not have the expected layout."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(f"{where}{message}")


class ParseError(FormatError):
    """A value in a file could not be parsed."""

    def __init__(self, message, path=None, line=None, field=None):
        self.field = field
        if field is not None:
            message = f"field '{field}': {message}"
        super().__init__(message, path=path, line=line)


class StartupError(ValidationError):
    """Missing inputs or a broken config, detected before any work starts."""


class ContractError(ForecastError):
    """Shapes or caches handed to the network code do not match."""

    def __init__(self, message, layer=None):
        self.layer = layer
        if layer is not None:
            message = f"layer {layer}: {message}"
        super().__init__(message)


class TrainingError(ForecastError):
    """Training produced a non-finite loss or gradient."""

    def __init__(self, message, epoch=None, batch=None):
        self.epoch = epoch
        self.batch = batch
        if epoch is not None:
            message = f"epoch {epoch}" + (f", batch {batch}" if batch is not None else "") + f": {message}"
        super().__init__(message)
