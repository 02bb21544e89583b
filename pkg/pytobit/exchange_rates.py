"""
Main module for returning observed series from the ECB data portal.
"""
import math

import polars as pl

from pytobit.model import Series
from pytobit.util.config import CHF_EUR_KEY, CHF_FLOOR_END, CHF_FLOOR_LEVEL, CHF_FLOOR_START
from pytobit.util.data_disclaimer import print_data_disclaimer
from pytobit.util.errors import InvalidInputError
from pytobit.util.fetch_table import fetch_table


def fetch_ecb(series_key: str,
              start_date: str | None = None,
              end_date: str | None = None,
              lower_bound: float = 0.0,
              log: bool = False,
              cache_dir: str | None = None,
              quiet: bool = False,
              prefer_cache: bool = False) -> Series:
    """ Return one ECB series as a Series

    Primary function for retrieving observed data. Requests the series over the given date range
    in SDMX csvdata format, skips missing observations and returns the values in date order.

    Args:

        series_key:
            Full SDMX series key including the dataflow, e.g. 'EXR.D.CHF.EUR.SP00.A'
        start_date:
            First date to return, in YYYY-MM-DD format, defaults to None
        end_date:
            Last date to return, in YYYY-MM-DD format, defaults to None
        lower_bound:
            Declared lower bound L of the returned series, on the scale of the returned values
            (i.e. after the log when log is True), defaults to 0
        log:
            If set to True, return natural logarithms of the observations, defaults to False
        cache_dir:
            Directory to store the raw response in, defaults to None (PYTOBIT_CACHE_DIR if set)
        quiet:
            If set to True, don't print the data disclaimer, defaults to False
        prefer_cache:
            If set to True, read a cached response for the same request when one exists instead
            of downloading, defaults to False

    Returns:

        A Series with ISO dates.

    Raises:

        InvalidInputError: Malformed key or dates, or non-positive values under log.
        EcbFetchError: The request failed or returned no usable data.
    """

    table: pl.DataFrame = fetch_table(series_key, start_date=start_date, end_date=end_date,
                                      cache_dir=cache_dir, prefer_cache=prefer_cache)

    values = table['value'].to_numpy()
    if log:
        if (values <= 0).any():
            raise InvalidInputError(f"Series {series_key} has non-positive values, cannot take "\
                                    "logarithms")
        values = pl.Series(values).log().to_numpy()

    if not quiet:
        print_data_disclaimer(series_key)

    return Series(values=values, dates=tuple(table['date'].to_list()), lower_bound=lower_bound)


def chf_eur_floor(log: bool = True, cache_dir: str | None = None, quiet: bool = False,
                  prefer_cache: bool = False) -> Series:
    """ The daily CHF per EUR reference rate over the Swiss National Bank's 1.20 floor.

    Covers 6 September 2011 to 15 January 2015 with lower bound 1.20, or log(1.20) when log is
    True.
    """

    bound = math.log(CHF_FLOOR_LEVEL) if log else CHF_FLOOR_LEVEL

    return fetch_ecb(CHF_EUR_KEY, start_date=CHF_FLOOR_START, end_date=CHF_FLOOR_END,
                     lower_bound=bound, log=log, cache_dir=cache_dir, quiet=quiet,
                     prefer_cache=prefer_cache)
