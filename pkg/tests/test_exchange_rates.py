import math
from pathlib import Path

import polars as pl
import pytest
import requests

from pytobit.estimation import select_lag
from pytobit.exchange_rates import chf_eur_floor, fetch_ecb
from pytobit.inference import TestOptions, unit_root_test
from pytobit.util.errors import EcbEmptyPayloadError, EcbHttpError, EcbMalformedPayloadError
from pytobit.util.fetch_table import (cache_raw_response, cached_response_path, fetch_table,
                                      parse_payload)
from pytobit.util.http_connect import create_session

URL = 'https://data-api.ecb.europa.eu/service/data/EXR/D.CHF.EUR.SP00.A?format=csvdata'

# A networked run of test_chf_eur_floor_live writes the raw floor-episode response here
FIXTURE_DIR = Path(__file__).parent / 'data'
FLOOR_FIXTURE = cached_response_path('EXR.D.CHF.EUR.SP00.A', '2011-09-06', '2015-01-15',
                                     FIXTURE_DIR)

PAYLOAD = (
    "KEY,FREQ,CURRENCY,CURRENCY_DENOM,EXR_TYPE,EXR_SUFFIX,TIME_PERIOD,OBS_VALUE,OBS_STATUS\n"
    "EXR.D.CHF.EUR.SP00.A,D,CHF,EUR,SP00,A,2011-09-07,1.2102,A\n"
    "EXR.D.CHF.EUR.SP00.A,D,CHF,EUR,SP00,A,2011-09-06,1.2037,A\n"
    "EXR.D.CHF.EUR.SP00.A,D,CHF,EUR,SP00,A,2011-09-08,,M\n"
    "EXR.D.CHF.EUR.SP00.A,D,CHF,EUR,SP00,A,2011-09-09,NaN,M\n"
    "EXR.D.CHF.EUR.SP00.A,D,CHF,EUR,SP00,A,2011-09-12,1.2065,A\n"
)


class FakeResponse:

    def __init__(self, status_code: int, text: str = ''):
        self.status_code = status_code
        self.text = text


class FakeSession:
    """ Stands in for requests.Session, recording the URLs it was asked for. """

    def __init__(self, response: FakeResponse | None = None, error: Exception | None = None):
        self.response = response
        self.error = error
        self.urls = []

    def get(self, url, timeout=None):
        self.urls.append(url)
        if self.error is not None:
            raise self.error
        return self.response


def test_parse_payload():
    """
    Test that missing observations are skipped and the rest sorted by date.
    """
    result: pl.DataFrame = parse_payload(PAYLOAD, URL)

    assert result.columns == ['date', 'value']
    assert result['date'].to_list() == ['2011-09-06', '2011-09-07', '2011-09-12']
    assert result['value'].to_list() == [1.2037, 1.2102, 1.2065]


def test_parse_payload_malformed():
    """
    Test that markup and CSVs without the observation columns are refused.
    """
    with pytest.raises(EcbMalformedPayloadError):
        parse_payload('<?xml version="1.0"?><message/>', URL)

    with pytest.raises(EcbMalformedPayloadError):
        parse_payload('KEY,VALUE\nEXR.D.CHF.EUR.SP00.A,1.2\n', URL)


def test_parse_payload_without_observations():
    """
    Test that a payload whose observations are all missing is reported as empty.
    """
    with pytest.raises(EcbEmptyPayloadError):
        parse_payload('TIME_PERIOD,OBS_VALUE\n2011-09-08,\n2011-09-09,NaN\n', URL)


def test_fetch_table_statuses():
    """
    Test that 404 is an empty result, other statuses and connection failures are HTTP errors.
    """
    with pytest.raises(EcbEmptyPayloadError):
        fetch_table('EXR.D.CHF.EUR.SP00.A', session=FakeSession(FakeResponse(404)))

    with pytest.raises(EcbHttpError):
        fetch_table('EXR.D.CHF.EUR.SP00.A', session=FakeSession(FakeResponse(503)))

    with pytest.raises(EcbHttpError) as excinfo:
        fetch_table('EXR.D.CHF.EUR.SP00.A',
                    session=FakeSession(error=requests.ConnectionError('unreachable')))
    assert excinfo.value.url == URL


def test_fetch_table_caches_raw_response(tmp_path):
    """
    Test that the raw payload is written to the cache directory unchanged.
    """
    session = FakeSession(FakeResponse(200, PAYLOAD))

    result = fetch_table('EXR.D.CHF.EUR.SP00.A', start_date='2011-09-06', end_date='2011-09-12',
                         cache_dir=tmp_path, session=session)

    cached = list(tmp_path.iterdir())
    assert result.height == 3
    assert 'startPeriod=2011-09-06' in session.urls[0]
    assert len(cached) == 1
    assert cached[0].read_text() == PAYLOAD


def test_cache_raw_response_disabled(monkeypatch):
    """
    Test that nothing is cached without a directory or the environment variable.
    """
    monkeypatch.delenv('PYTOBIT_CACHE_DIR', raising=False)

    assert cache_raw_response(PAYLOAD, 'EXR.D.CHF.EUR.SP00.A', None, None) is None


def test_fetch_table_validates_before_request():
    """
    Test that a malformed key fails without touching the session.
    """
    session = FakeSession(FakeResponse(200, PAYLOAD))

    with pytest.raises(ValueError):
        fetch_table('not a key', session=session)
    assert session.urls == []


def test_fetch_ecb(monkeypatch, capsys):
    """
    Test that fetch_ecb returns a dated Series, in logs when asked, and prints the disclaimer.
    """
    monkeypatch.setattr('pytobit.util.fetch_table.create_session',
                        lambda: FakeSession(FakeResponse(200, PAYLOAD)))

    series = fetch_ecb('EXR.D.CHF.EUR.SP00.A', log=True, lower_bound=math.log(1.2))

    assert series.dates == ('2011-09-06', '2011-09-07', '2011-09-12')
    assert series.values[0] == pytest.approx(math.log(1.2037))
    assert series.lower_bound == pytest.approx(math.log(1.2))
    assert 'European Central Bank' in capsys.readouterr().out


def test_chf_eur_floor(monkeypatch, capsys):
    """
    Test that the floor episode uses the 1.20 bound on the log scale and stays quiet on request.
    """
    session = FakeSession(FakeResponse(200, PAYLOAD))
    monkeypatch.setattr('pytobit.util.fetch_table.create_session', lambda: session)

    series = chf_eur_floor(quiet=True)

    assert series.lower_bound == pytest.approx(math.log(1.2))
    assert 'startPeriod=2011-09-06' in session.urls[0]
    assert 'endPeriod=2015-01-15' in session.urls[0]
    assert capsys.readouterr().out == ''


def test_create_session():
    """
    Test the session headers and retry policy.
    """
    session = create_session(retries=2)
    retry = session.get_adapter('https://data-api.ecb.europa.eu').max_retries

    assert session.headers['Accept'].startswith('text/csv')
    assert retry.total == 2
    assert 503 in retry.status_forcelist


def test_fetch_table_prefers_cached_response(tmp_path):
    """
    Test that a cached response is parsed without a request when the cache is preferred.
    """
    cache_raw_response(PAYLOAD, 'EXR.D.CHF.EUR.SP00.A', '2011-09-06', '2011-09-12', tmp_path)
    session = FakeSession(error=requests.ConnectionError('offline'))

    table = fetch_table('EXR.D.CHF.EUR.SP00.A', start_date='2011-09-06', end_date='2011-09-12',
                        cache_dir=tmp_path, session=session, prefer_cache=True)

    assert session.urls == []
    assert table['date'].to_list() == ['2011-09-06', '2011-09-07', '2011-09-12']


def test_fetch_table_downloads_when_cache_is_missing(tmp_path):
    """
    Test that preferring the cache still downloads, and then caches, a response not yet seen.
    """
    session = FakeSession(FakeResponse(200, PAYLOAD))

    table = fetch_table('EXR.D.CHF.EUR.SP00.A', start_date='2011-09-06', end_date='2011-09-12',
                        cache_dir=tmp_path, session=session, prefer_cache=True)

    assert len(session.urls) == 1
    assert table.height == 3
    assert cached_response_path('EXR.D.CHF.EUR.SP00.A', '2011-09-06', '2011-09-12',
                                tmp_path).is_file()


def test_chf_eur_floor_from_cache(tmp_path, monkeypatch):
    """
    Test that the floor episode can be rebuilt offline from a cached response.
    """
    cache_raw_response(PAYLOAD, 'EXR.D.CHF.EUR.SP00.A', '2011-09-06', '2015-01-15', tmp_path)
    monkeypatch.setattr('pytobit.util.fetch_table.create_session',
                        lambda: FakeSession(error=requests.ConnectionError('offline')))

    series = chf_eur_floor(quiet=True, cache_dir=str(tmp_path), prefer_cache=True)

    assert series.dates == ('2011-09-06', '2011-09-07', '2011-09-12')
    assert series.values[1] == pytest.approx(math.log(1.2102))


def _floor_fixture():
    if not FLOOR_FIXTURE.is_file():
        pytest.skip(f"no cached floor-episode response at {FLOOR_FIXTURE}; run the network tests "
                    "once to create it")
    return chf_eur_floor(quiet=True, cache_dir=str(FIXTURE_DIR), prefer_cache=True)


def test_chf_eur_floor_fixture_lag_and_tstat():
    """
    Test the cached floor episode: one lag under both criteria up to 15 and a t-statistic near
    -2.87.
    """
    series = _floor_fixture()

    assert len(series) > 800
    assert select_lag(series, 15, 'aic') == 1
    assert select_lag(series, 15, 'bic') == 1

    report = unit_root_test(series, k='auto', options=TestOptions(k_max=15, criterion='bic'))

    assert report.k == 1
    assert report.t_beta == pytest.approx(-2.87, abs=0.02)
    assert report.lower_bound == pytest.approx(math.log(1.2))


@pytest.mark.slow
def test_chf_eur_floor_fixture_simulated_pvalue():
    """
    Test the simulated p-value of the cached floor episode lies near 0.2.
    """
    series = _floor_fixture()

    options = TestOptions(k_max=15, simulate_p=True, sim_replications=5_000, sim_T=10_000,
                          seed=2024, workers=4)
    report = unit_root_test(series, k='auto', options=options)

    assert report.k == 1
    assert 0.17 <= report.p_value_sim <= 0.22


@pytest.mark.network
def test_chf_eur_floor_live():
    """
    Test the live download of the floor episode: every rate sits at or above the floor. The raw
    response is kept under tests/data for the offline tests.
    """
    series = chf_eur_floor(quiet=True, cache_dir=str(FIXTURE_DIR))

    assert len(series) > 800
    assert series.values.min() >= math.log(1.2) - 1e-3
    assert FLOOR_FIXTURE.is_file()


@pytest.mark.network
@pytest.mark.slow
def test_chf_eur_floor_unit_root_test():
    """
    Test the full pipeline on a fresh download: one lag under both criteria up to 15, a
    t-statistic near -2.87 and a simulated p-value near 0.2. Data revisions can move these
    numbers slightly.
    """
    series = chf_eur_floor(quiet=True)

    assert select_lag(series, 15, 'aic') == 1
    assert select_lag(series, 15, 'bic') == 1

    options = TestOptions(simulate_p=True, sim_replications=5_000, sim_T=10_000, seed=2024,
                          workers=4)
    report = unit_root_test(series, k=1, options=options)

    assert report.t_beta == pytest.approx(-2.87, abs=0.02)
    assert 0.17 <= report.p_value_sim <= 0.22
