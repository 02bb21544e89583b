"""
Module for creating the HTTP session used to talk to the ECB data portal.

Requests go through a requests.Session carrying the headers the portal expects and a single
retry on connection errors and on transient server statuses.
"""

import requests
from requests.adapters import HTTPAdapter
from urllib3.util.retry import Retry

from pytobit.util.config import ECB_RETRIES, ECB_USER_AGENT

# Statuses worth one more attempt
RETRY_STATUSES = (429, 500, 502, 503, 504)


def create_session(retries: int = ECB_RETRIES) -> requests.Session:
    """ Creates the session object used for data requests.

    Args:

        retries:
            Number of retries after a failed attempt, defaults to ECB_RETRIES.

    Returns:

        A requests.Session with CSV accept headers and the retry policy mounted for https.
    """

    session = requests.Session()
    session.headers.update({
        'Accept': 'text/csv; charset=utf-8',
        'User-Agent': ECB_USER_AGENT,
    })

    retry = Retry(total=retries, backoff_factor=0.8, status_forcelist=RETRY_STATUSES,
                  allowed_methods=['GET'], raise_on_status=False)
    session.mount('https://', HTTPAdapter(max_retries=retry))

    return session
