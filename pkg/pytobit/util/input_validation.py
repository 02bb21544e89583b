"""
Module for checking that provided inputs are of the correct type and lie in the range each
operation expects, e.g. that lag orders are positive, that coefficient vectors have the length
the lag order implies, that levels are tabulated, and that date ranges and SDMX series keys are
well formed.
"""

import re
from datetime import datetime
from typing import Sequence

import numpy as np

from pytobit.util.errors import InvalidInputError


### CONSTANTS #####################################################################################

# SDMX series key: a dataflow id followed by one or more non-empty dimension codes
SERIES_KEY_PATTERN = re.compile(r'^[A-Za-z0-9_]+(\.[A-Za-z0-9_+]+)+$')

DATE_FORMAT = '%Y-%m-%d'

### END CONSTANTS #################################################################################


def check_choice(value: str | int, valid: Sequence[str | int], name: str) -> bool:
    """ Checks that value is one of the valid options.

    Args:

        value:
            The provided value.
        valid:
            The accepted values.
        name:
            Name of the argument, used in the error message.

    Returns:

        True if no error is raised.

    Raises:

        InvalidInputError: value is not one of valid.
    """

    if value not in valid:
        raise InvalidInputError(f"Invalid input '{value}' provided for {name}.\n"\
                                f"Valid inputs are {list(valid)}")

    return True


def check_lag_order(k: int) -> bool:
    """ Checks that a lag order is an integer of at least one. """

    if isinstance(k, bool) or not isinstance(k, (int, np.integer)):
        raise InvalidInputError(f"Lag order must be an integer, received {type(k)}: {k}")
    if k < 1:
        raise InvalidInputError(f"Lag order must be at least 1, received {k}")

    return True


def check_phi(phi: Sequence[float], k: int) -> np.ndarray:
    """ Checks that phi holds k - 1 finite difference coefficients and returns it as an array.

    Raises:

        InvalidInputError: Wrong length or non-finite entries.
    """

    check_lag_order(k)
    arr = np.asarray(phi, dtype=np.float64).reshape(-1)
    if arr.shape[0] != k - 1:
        raise InvalidInputError(f"A lag order of {k} needs {k - 1} difference coefficients, "\
                                f"received {arr.shape[0]}: {list(arr)}")
    check_finite(arr, 'phi')

    return arr


def check_finite(values: np.ndarray, name: str) -> bool:
    """ Checks that every entry of values is finite, naming the first offending position. """

    arr = np.asarray(values, dtype=np.float64)
    bad = np.flatnonzero(~np.isfinite(arr))
    if bad.size:
        raise InvalidInputError(f"Values provided for {name} must be finite, found "\
                                f"{arr.reshape(-1)[bad[0]]} at position {bad[0]}")

    return True


def check_series_key(series_key: str) -> tuple[str, str]:
    """ Checks that an SDMX series key is well formed and splits off its dataflow.

    Args:

        series_key:
            A key such as 'EXR.D.CHF.EUR.SP00.A'.

    Returns:

        The dataflow ('EXR') and the remaining key ('D.CHF.EUR.SP00.A').

    Raises:

        InvalidInputError: The key is empty, has an empty dimension, or contains characters SDMX
        does not allow.
    """

    if not isinstance(series_key, str) or not SERIES_KEY_PATTERN.match(series_key):
        raise InvalidInputError(f"Invalid series key '{series_key}'. Expected a dataflow and "\
                                "dimension codes separated by dots, e.g. EXR.D.CHF.EUR.SP00.A")

    flow, key = series_key.split('.', 1)

    return flow, key


def validate_date_range(start_date: str | None, end_date: str | None) -> bool:
    """ Checks that date inputs are valid.

    Both dates, if provided, must be ISO-8601 calendar dates (YYYY-MM-DD), and end_date must not
    come before start_date.

    Args:

        start_date:
            First date of the range, or None for an open start.
        end_date:
            Last date of the range, or None for an open end.

    Returns:

        True if no error is raised.

    Raises:

        InvalidInputError: A date is in the wrong format, or the range is empty.
    """

    parsed: dict[str, datetime] = {}
    for name, date_string in [('start_date', start_date), ('end_date', end_date)]:
        if date_string is None:
            continue
        try:
            parsed[name] = datetime.strptime(date_string, DATE_FORMAT)
        except (TypeError, ValueError) as e:
            raise InvalidInputError(f"'{name}' provided in unsupported format. Must be "\
                                    f"YYYY-MM-DD. Received {date_string}.") from e

    if len(parsed) == 2 and parsed['end_date'] < parsed['start_date']:
        raise InvalidInputError(f"Provided end date ({end_date}) comes before provided start "\
                                f"date ({start_date}), so the date range is empty.")

    return True
