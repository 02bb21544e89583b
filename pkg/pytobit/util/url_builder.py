"""
Module used to construct SDMX-REST request URLs for the ECB data portal.

Instead of each public entry point assembling its own URL from a series key and a date range,
they all call construct_url here, which validates the inputs first and always asks for the
`csvdata` representation so that the response can be parsed as a flat table.
"""

from urllib.parse import urlencode

from pytobit.util.config import ECB_BASE_URL
from pytobit.util.input_validation import check_series_key, validate_date_range


def construct_url(series_key: str,
                  start_date: str | None = None,
                  end_date: str | None = None,
                  base_url: str = ECB_BASE_URL) -> str:
    """ Constructs the URL requesting one series from the data portal.

    Args:

        series_key:
            Full series key including the dataflow, e.g. 'EXR.D.CHF.EUR.SP00.A'.
        start_date:
            First date to request, in YYYY-MM-DD format, defaults to None (no lower limit).
        end_date:
            Last date to request, in YYYY-MM-DD format, defaults to None (no upper limit).
        base_url:
            Root of the SDMX-REST data resource, defaults to ECB_BASE_URL.

    Returns:

        The full URL, e.g.
        https://data-api.ecb.europa.eu/service/data/EXR/D.CHF.EUR.SP00.A?format=csvdata&...

    Raises:

        InvalidInputError: Malformed key or date, or an empty date range.
    """

    flow, key = check_series_key(series_key)
    validate_date_range(start_date, end_date)

    params: dict[str, str] = {'format': 'csvdata'}
    if start_date:
        params['startPeriod'] = start_date
    if end_date:
        params['endPeriod'] = end_date

    return f"{base_url.rstrip('/')}/{flow}/{key}?{urlencode(params)}"
