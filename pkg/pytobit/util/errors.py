"""
Exception types raised by pytobit.

Validation failures subclass ValueError, so callers that only care about "bad input" can keep
catching ValueError. Fetch failures carry the URL that was requested.
"""


class PyTobitError(Exception):
    """ Base class for every error raised deliberately by pytobit. """


class InvalidInputError(PyTobitError, ValueError):
    """ An argument or a data value is outside what the operation accepts. """


class SeriesParseError(InvalidInputError):
    """ A series file could not be parsed; `line` is the 1-based line number. """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnstableFilterError(InvalidInputError):
    """ The limited-autoregressive filter phi(L) is not absolutely summable enough. """


class SingularDesignError(PyTobitError, ValueError):
    """ The OLS design matrix is (numerically) rank deficient. """


class DegenerateVarianceError(PyTobitError, ValueError):
    """ The residual variance is zero, so t-statistics are undefined. """


class EcbFetchError(PyTobitError):
    """ Base class for failures talking to the ECB data portal. """

    def __init__(self, message: str, url: str):
        self.url = url
        super().__init__(f"{message} (url: {url})")


class EcbHttpError(EcbFetchError):
    """ The request failed or returned a non-200 status. """


class EcbEmptyPayloadError(EcbFetchError):
    """ The response parsed, but contained no observations. """


class EcbMalformedPayloadError(EcbFetchError):
    """ The response was not the expected SDMX CSV. """
