import json

import jsonschema
import pytest
import requests

from pytobit.cli import (EXIT_FETCH, EXIT_INVALID_INPUT, EXIT_IO, EXIT_NUMERICAL, EXIT_OK,
                         EXIT_USAGE, float_list, lag_order, main, ratio_grid)
from pytobit.cv_table import read_table
from pytobit.model import ModelParams, Series, simulate_tobit
from pytobit.series_io import load_schema, write_series_csv
from pytobit.util.fetch_table import cache_raw_response
from pytobit.util.rng import draw_innovations, replication_rng


@pytest.fixture
def walk_csv(tmp_path):
    """ A censored random walk of 300 observations written as value-per-line CSV. """
    u = draw_innovations(replication_rng(101, 0), 300)
    y = simulate_tobit(ModelParams(k=1, alpha=0.0, beta=1.0, init=(5.0,)), u).y
    path = tmp_path / 'walk.csv'
    write_series_csv(Series(y), path)
    return path


def _report(path) -> dict:
    return json.loads(path.read_text())


def test_ratio_grid():
    """
    Test the start:stop:step syntax, which includes the stop value, and plain lists.
    """
    grid = ratio_grid('0:2.5:0.1')

    assert len(grid) == 26
    assert grid[0] == 0.0
    assert grid[-1] == 2.5
    assert grid[3] == 0.3
    assert ratio_grid('0,0.5,1') == [0.0, 0.5, 1.0]
    assert float_list('1.3,-0.8') == [1.3, -0.8]
    assert lag_order('auto') == 'auto'
    assert lag_order('3') == 3


def test_simulate_csv_to_stdout(capsys):
    """
    Test that simulate writes the path as CSV.
    """
    code = main(['simulate', '--k', '1', '--a', '1', '--c', '-5', '--T', '500', '--seed', '7'])

    lines = capsys.readouterr().out.splitlines()
    assert code == EXIT_OK
    assert lines[0] == 't,y,y_minus,u'
    assert len(lines) == 501


def test_simulate_json_is_reproducible(tmp_path):
    """
    Test that two runs with the same seed give the same result and echo the configuration.
    """
    first, second = tmp_path / 'a.json', tmp_path / 'b.json'
    args = ['simulate', '--T', '50', '--seed', '7', '--format', 'json']

    assert main(args + ['--output', str(first)]) == EXIT_OK
    assert main(args + ['--output', str(second)]) == EXIT_OK

    report = _report(first)
    jsonschema.validate(report, load_schema('simulation'))
    assert report['result'] == _report(second)['result']
    assert report['config']['seed'] == 7
    assert report['config']['command'] == 'simulate'


def test_estimate_auto(walk_csv, tmp_path):
    """
    Test that estimate selects a lag order and reports the criteria table.
    """
    out = tmp_path / 'fit.json'

    code = main(['estimate', '--input', str(walk_csv), '--k', 'auto', '--k-max', '4',
                 '--output', str(out)])

    report = _report(out)
    assert code == EXIT_OK
    jsonschema.validate(report, load_schema('ols_fit'))
    assert len(report['result']['information_criteria']) == 4
    assert report['config']['k'] == 'auto'


def test_test_command(walk_csv, tmp_path):
    """
    Test that the unit-root test writes a valid report, whatever the decision.
    """
    out = tmp_path / 'test.json'

    code = main(['test', '--input', str(walk_csv), '--k', '1', '--output', str(out)])

    report = _report(out)
    assert code == EXIT_OK
    jsonschema.validate(report, load_schema('test_report'))
    assert report['result']['k'] == 1
    assert report['config']['input'] == str(walk_csv)


def test_jsr_command(tmp_path):
    """
    Test the certificate for phi = (1.3, -0.8) with the explosion probe.
    """
    out = tmp_path / 'jsr.json'

    code = main(['jsr', '--phi=1.3,-0.8', '--probe', '--T', '200', '--reps', '5',
                 '--output', str(out)])

    report = _report(out)
    assert code == EXIT_OK
    jsonschema.validate(report, load_schema('jsr_certificate'))
    assert report['result']['violates_assumption']
    assert report['result']['probe']['classification'] in ('explosive', 'bounded')


def test_tabulate_command(tmp_path):
    """
    Test that tabulate writes a readable table with its sidecar.
    """
    out = tmp_path / 'cv.csv'

    code = main(['tabulate', '--ratios', '0:0.2:0.1', '--T', '50', '--reps', '60',
                 '--output', str(out)])

    table = read_table(out, strict=False)
    assert code == EXIT_OK
    assert table.ratios.tolist() == [0.0, 0.1, 0.2]
    assert table.provenance['config']['command'] == 'tabulate'
    jsonschema.validate(json.loads(out.with_suffix('.json').read_text()),
                        load_schema('cv_table'))


def test_power_and_dist_commands(tmp_path):
    """
    Test the experiment commands, as CSV with a run sidecar and as JSON.
    """
    power = tmp_path / 'power.csv'
    dist = tmp_path / 'dist.json'

    assert main(['power', '--a-grid=0', '--c-grid=0,-5', '--T', '50', '--reps', '40',
                 '--output', str(power)]) == EXIT_OK
    assert main(['dist', '--model', 'linear', '--T', '50', '--reps', '40', '--format', 'json',
                 '--output', str(dist)]) == EXIT_OK

    assert power.read_text().splitlines()[0] == 'a,c,mean_tstat,reject_tobit,reject_adf,'\
                                                'replications'
    jsonschema.validate(_report(power.with_suffix('.json')), load_schema('experiment'))
    jsonschema.validate(_report(dist), load_schema('experiment'))


def test_usage_errors():
    """
    Test that bad arguments exit with the usage code.
    """
    assert main(['bogus']) == EXIT_USAGE
    assert main(['test', '--input', 'a.csv', '--ecb', 'EXR.D.CHF.EUR.SP00.A']) == EXIT_USAGE
    assert main(['estimate', '--input', 'a.csv', '--k', '0']) == EXIT_USAGE


def test_invalid_input(tmp_path):
    """
    Test that missing and malformed input files exit with the invalid-input code.
    """
    bad = tmp_path / 'bad.csv'
    bad.write_text('1.0\nabc\n')

    assert main(['test', '--input', str(tmp_path / 'missing.csv')]) == EXIT_INVALID_INPUT
    assert main(['test', '--input', str(bad)]) == EXIT_INVALID_INPUT


def test_numerical_error(tmp_path):
    """
    Test that a constant series exits with the numerical-error code.
    """
    flat = tmp_path / 'flat.csv'
    flat.write_text('\n'.join(['2.0'] * 30) + '\n')

    assert main(['test', '--input', str(flat)]) == EXIT_NUMERICAL


def test_fetch_error(monkeypatch, tmp_path):
    """
    Test that a failed download exits with the fetch-error code.
    """
    class Missing:
        status_code = 404
        text = ''

    class Session:
        def get(self, url, timeout=None):
            return Missing()

    monkeypatch.setattr('pytobit.util.fetch_table.create_session', lambda: Session())

    code = main(['fetch-ecb', '--start', '2011-09-06', '--end', '2011-09-07',
                 '--output', str(tmp_path / 'chf.csv')])

    assert code == EXIT_FETCH


def test_fetch_ecb_use_cache(monkeypatch, tmp_path):
    """
    Test that --use-cache reads a cached response with the network unavailable.
    """
    class Offline:
        def get(self, url, timeout=None):
            raise requests.ConnectionError('offline')

    monkeypatch.setattr('pytobit.util.fetch_table.create_session', lambda: Offline())
    cache_raw_response("TIME_PERIOD,OBS_VALUE\n2011-09-06,1.2037\n2011-09-07,1.2102\n",
                       'EXR.D.CHF.EUR.SP00.A', '2011-09-06', '2011-09-07', tmp_path)
    args = ['fetch-ecb', '--start', '2011-09-06', '--end', '2011-09-07',
            '--cache-dir', str(tmp_path), '--output', str(tmp_path / 'chf.csv')]

    assert main(args) == EXIT_FETCH
    assert main(args + ['--use-cache']) == EXIT_OK
    assert (tmp_path / 'chf.csv').read_text().splitlines()[1:] == ['2011-09-06,1.2037',
                                                                   '2011-09-07,1.2102']



def test_unwritable_output(walk_csv, tmp_path):
    """
    Test that an output path in a missing directory exits with the file-error code.
    """
    missing = tmp_path / 'no_such_dir'

    assert main(['simulate', '--T', '20', '--output', str(missing / 'path.csv')]) == EXIT_IO
    assert main(['simulate', '--T', '20', '--format', 'json',
                 '--output', str(missing / 'path.json')]) == EXIT_IO
    assert main(['estimate', '--input', str(walk_csv),
                 '--output', str(missing / 'fit.json')]) == EXIT_IO


def test_tabulate_only_writes_csv(tmp_path):
    """
    Test that tabulate refuses a JSON format, since its table is a CSV with a JSON sidecar.
    """
    code = main(['tabulate', '--format', 'json', '--ratios', '0', '--T', '50', '--reps', '20',
                 '--output', str(tmp_path / 'table.csv')])

    assert code == EXIT_USAGE
