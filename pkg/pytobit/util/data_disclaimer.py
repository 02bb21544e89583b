"""
Attribution line printed after every ECB download.
"""
from pytobit.util.config import ECB_PORTAL_URL


def print_data_disclaimer(series_key: str) -> None:
    """ Prints where a downloaded series came from and under which terms it may be reused.

    Args:

        series_key:
            SDMX key of the downloaded series, e.g. 'EXR.D.CHF.EUR.SP00.A'
    """

    print(f"Series {series_key} provided by the European Central Bank Data Portal, "\
          f"{ECB_PORTAL_URL}. Reuse is subject to the ECB's terms of use.")
