"""
Module for handling the actual requesting of series from the ECB data portal. Building the URL,
opening the session, checking the response, parsing the SDMX CSV payload and caching the raw text
are the same for every series, so they live here rather than in the public entry points.
"""

import io
import logging
import os
import re
from pathlib import Path

import polars as pl
import requests

from pytobit.util.config import CACHE_DIR_ENV, ECB_TIMEOUT_SECONDS
from pytobit.util.errors import EcbEmptyPayloadError, EcbHttpError, EcbMalformedPayloadError
from pytobit.util.http_connect import create_session
from pytobit.util.url_builder import construct_url

logger = logging.getLogger(__name__)

# Columns of the SDMX csvdata representation that we keep
DATE_COLUMN = 'TIME_PERIOD'
VALUE_COLUMN = 'OBS_VALUE'


def fetch_table(series_key: str,
                start_date: str | None = None,
                end_date: str | None = None,
                cache_dir: str | Path | None = None,
                session: requests.Session | None = None,
                prefer_cache: bool = False) -> pl.DataFrame:
    """ Request one series and return its observations as a (date, value) table.

    Handles constructing the URL, sending the request, checking the status, parsing the CSV,
    dropping missing observations, sorting by date and caching the raw response.

    Args:

        series_key:
            Full series key, e.g. 'EXR.D.CHF.EUR.SP00.A'.
        start_date:
            First date, YYYY-MM-DD, defaults to None.
        end_date:
            Last date, YYYY-MM-DD, defaults to None.
        cache_dir:
            Directory to write the raw response to. Falls back to the directory named by the
            PYTOBIT_CACHE_DIR environment variable; nothing is cached when neither is set.
        session:
            An existing session to reuse, defaults to a new one from create_session.
        prefer_cache:
            Parse a previously cached response for the same key and dates instead of sending a
            request, when one exists in the cache directory. Defaults to False.

    Returns:

        A polars DataFrame with a String column 'date' and a Float64 column 'value'.

    Raises:

        InvalidInputError: Malformed key or dates (raised before any request is made).
        EcbHttpError: The request failed or returned an unexpected status.
        EcbEmptyPayloadError: No observations were returned.
        EcbMalformedPayloadError: The payload is not the expected CSV.
    """

    url = construct_url(series_key, start_date, end_date)
    if prefer_cache:
        cached = cached_response_path(series_key, start_date, end_date, cache_dir)
        if cached is not None and cached.is_file():
            logger.info("Reading cached response %s", cached)
            return parse_payload(cached.read_text(encoding='utf-8'), url)

    session = create_session() if session is None else session

    logger.info("Requesting %s", url)
    try:
        response = session.get(url, timeout=ECB_TIMEOUT_SECONDS)
    except requests.RequestException as e:
        raise EcbHttpError(f"Request failed: {e}", url) from e

    # The portal answers 404 when the key/range combination holds no observations
    if response.status_code == 404:
        raise EcbEmptyPayloadError("No observations for this key and date range", url)
    if response.status_code != 200:
        raise EcbHttpError(f"Unexpected HTTP status {response.status_code}", url)

    text = response.text
    if not text.strip():
        raise EcbEmptyPayloadError("Empty response body", url)

    cache_raw_response(text, series_key, start_date, end_date, cache_dir)

    return parse_payload(text, url)


def parse_payload(text: str, url: str) -> pl.DataFrame:
    """ Parse an SDMX csvdata payload into (date, value), skipping missing observations. """

    head = text.lstrip()[:64].lower()
    if head.startswith(('<', '{')):
        raise EcbMalformedPayloadError("Expected CSV, received markup or JSON", url)

    try:
        raw = pl.read_csv(io.StringIO(text), infer_schema=False)
    except pl.exceptions.PolarsError as e:
        raise EcbMalformedPayloadError(f"Could not parse CSV: {e}", url) from e

    missing = [c for c in (DATE_COLUMN, VALUE_COLUMN) if c not in raw.columns]
    if missing:
        raise EcbMalformedPayloadError(f"Missing columns {missing}", url)

    table = (
        raw.select(pl.col(DATE_COLUMN).alias('date'), pl.col(VALUE_COLUMN).alias('value'))
        .with_columns(pl.col('value').str.strip_chars().cast(pl.Float64, strict=False))
        .filter(pl.col('value').is_not_null() & pl.col('value').is_finite())
        .sort('date')
    )

    dropped = raw.height - table.height
    if dropped:
        logger.info("Skipped %d missing observations", dropped)
    if table.height == 0:
        raise EcbEmptyPayloadError("The payload holds no usable observations", url)

    return table


def cached_response_path(series_key: str, start_date: str | None, end_date: str | None,
                         cache_dir: str | Path | None = None) -> Path | None:
    """ Where the raw payload for this key and date range is cached, or None without a cache. """

    cache_dir = cache_dir if cache_dir is not None else os.environ.get(CACHE_DIR_ENV)
    if not cache_dir:
        return None

    name = re.sub(r'[^A-Za-z0-9_.+-]', '_',
                  f"{series_key}_{start_date or 'start'}_{end_date or 'end'}") + '.csv'
    return Path(cache_dir) / name


def cache_raw_response(text: str, series_key: str, start_date: str | None, end_date: str | None,
                       cache_dir: str | Path | None = None) -> Path | None:
    """ Write the raw payload to the cache directory, if one is configured. """

    path = cached_response_path(series_key, start_date, end_date, cache_dir)
    if path is None:
        return None
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding='utf-8')
    logger.info("Cached raw response at %s", path)

    return path
