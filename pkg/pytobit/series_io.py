"""
Reading and writing series and results.

Series files are CSVs with either one value per line or `date,value` pairs, with an optional
header line. JSON outputs share one envelope,

    {"schema": "<name>.v1", "generated_at": ..., "config": {...}, "result": {...}},

and every schema lives in pytobit/schemas/<name>.v1.json.
"""

import json
import logging
import math
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np
import polars as pl

from pytobit.model import Series, SimOutput
from pytobit.util.config import SCHEMA_VERSION
from pytobit.util.errors import InvalidInputError, SeriesParseError
from pytobit.util.input_validation import DATE_FORMAT

logger = logging.getLogger(__name__)


### CONSTANTS #####################################################################################

VALID_SCHEMAS = ['ols_fit', 'test_report', 'jsr_certificate', 'cv_table', 'experiment',
                 'simulation', 'series']

HEADER_TOKENS = {'date', 'value', 'time_period', 'obs_value'}

### END CONSTANTS #################################################################################


def _first_bad_line(frame: pl.DataFrame, mask: pl.Expr) -> int | None:
    bad = frame.filter(mask)
    if bad.height == 0:
        return None
    return int(bad['line'][0])


def _raw_frame(path: Path) -> pl.DataFrame:
    try:
        raw = pl.read_csv(path, has_header=False, infer_schema=False, encoding='utf8')
    except pl.exceptions.NoDataError as e:
        raise InvalidInputError(f"Series file {path} holds no observations") from e
    except pl.exceptions.PolarsError as e:
        raise SeriesParseError(f"could not read {path} as CSV: {e}") from e

    raw = raw.with_row_index('line', offset=1)
    fields = [c for c in raw.columns if c != 'line']

    return raw.with_columns(pl.col(fields).str.strip_chars()).rename(
        {name: f"field_{i}" for i, name in enumerate(fields)})


def read_series_csv(path: str | Path, log: bool = False, bound: float | None = None,
                    bound_raw: float | None = None) -> Series:
    """ Read a series from a one-column (value) or two-column (date,value) CSV.

    Args:

        path:
            The UTF-8 file to read.
        log:
            Take natural logarithms of the values, defaults to False.
        bound:
            Lower bound on the analysis scale, i.e. after the log when log is True.
        bound_raw:
            Lower bound on the scale of the file; transformed by the log when log is True.
            At most one of bound and bound_raw may be given.

    Returns:

        The Series; the bound defaults to 0.

    Raises:

        SeriesParseError: A line could not be parsed, or a value is non-positive under log.
        InvalidInputError: The file is missing or empty, or both bounds were given.
    """

    if bound is not None and bound_raw is not None:
        raise InvalidInputError("Provide at most one of bound and bound_raw")

    path = Path(path)
    if not path.is_file():
        raise InvalidInputError(f"Series file {path} does not exist")

    raw = _raw_frame(path)
    fields = [c for c in raw.columns if c != 'line']
    if len(fields) not in (1, 2):
        raise SeriesParseError(f"expected 1 or 2 columns, found {len(fields)}", line=1)

    first = {str(v).lower() for v in raw.select(fields).row(0) if v is not None}
    if first & HEADER_TOKENS:
        raw = raw.slice(1)
    raw = raw.filter(~pl.all_horizontal(pl.col(fields).is_null()))
    if raw.height == 0:
        raise InvalidInputError(f"Series file {path} holds no observations")

    ragged = _first_bad_line(raw, pl.any_horizontal(pl.col(fields).is_null()))
    if ragged is not None:
        raise SeriesParseError(f"expected {len(fields)} columns", line=ragged)

    value_text = pl.col(fields[-1])
    frame = raw.with_columns(value_text.cast(pl.Float64, strict=False).alias('value'))

    bad_number = _first_bad_line(frame, pl.col('value').is_null())
    if bad_number is not None:
        text = frame.filter(pl.col('line') == bad_number)[fields[-1]][0]
        raise SeriesParseError(f"could not parse '{text}' as a number", line=bad_number)
    not_finite = _first_bad_line(frame, ~pl.col('value').is_finite())
    if not_finite is not None:
        raise SeriesParseError("value is not finite", line=not_finite)

    dates = None
    if len(fields) == 2:
        frame = frame.with_columns(
            pl.col(fields[0]).str.to_date(DATE_FORMAT, strict=False).alias('parsed_date'))
        bad_date = _first_bad_line(frame, pl.col('parsed_date').is_null())
        if bad_date is not None:
            text = frame.filter(pl.col('line') == bad_date)[fields[0]][0]
            raise SeriesParseError(f"date '{text}' is not an ISO-8601 date (YYYY-MM-DD)",
                                   line=bad_date)
        dates = tuple(frame[fields[0]].to_list())

    if log:
        non_positive = _first_bad_line(frame, pl.col('value') <= 0)
        if non_positive is not None:
            value = frame.filter(pl.col('line') == non_positive)['value'][0]
            raise SeriesParseError(f"cannot take the log of non-positive value {value}",
                                   line=non_positive)
        frame = frame.with_columns(pl.col('value').log())

    lower_bound = 0.0
    if bound is not None:
        lower_bound = float(bound)
    elif bound_raw is not None:
        lower_bound = math.log(bound_raw) if log else float(bound_raw)

    logger.debug("Read %d observations from %s", frame.height, path)

    return Series(values=frame['value'].to_numpy(), dates=dates, lower_bound=lower_bound)


def series_frame(series: Series) -> pl.DataFrame:
    data = {'value': series.values}
    if series.dates is not None:
        data = {'date': list(series.dates), **data}
    return pl.DataFrame(data)


def write_series_csv(series: Series, path: str | Path) -> Path:
    """ Write a series as `date,value` (or `value`) with a header and round-trip floats. """

    path = Path(path)
    series_frame(series).write_csv(path)

    return path


def simulation_frame(output: SimOutput) -> pl.DataFrame:
    return pl.DataFrame({
        't': np.arange(1, output.y.size + 1),
        'y': output.y,
        'y_minus': output.y_minus,
        'u': output.innovations,
    })


def write_frame(frame: pl.DataFrame, path: str | Path) -> Path:
    path = Path(path)
    frame.write_csv(path)
    return path


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def json_envelope(schema: str, config: dict, result: dict,
                  generated_at: str | None = None) -> dict:
    """ Wrap a result in the versioned output envelope. Non-finite floats become null. """

    if schema not in VALID_SCHEMAS:
        raise InvalidInputError(f"Invalid schema '{schema}'. Valid schemas are {VALID_SCHEMAS}")
    if generated_at is None:
        generated_at = datetime.now(timezone.utc).isoformat(timespec='seconds')

    return {
        'schema': f"{schema}.{SCHEMA_VERSION}",
        'generated_at': generated_at,
        'config': _jsonable(config),
        'result': _jsonable(result),
    }


def write_json_report(schema: str, config: dict, result: dict, path: str | Path | None = None,
                      generated_at: str | None = None) -> str:
    """ Serialize a result envelope with sorted keys; write it to path when given.

    Returns:

        The JSON text.
    """

    text = json.dumps(json_envelope(schema, config, result, generated_at), indent=2,
                      sort_keys=True, allow_nan=False) + '\n'
    if path is not None:
        Path(path).write_text(text, encoding='utf-8')

    return text


def load_schema(schema: str) -> dict:
    """ The JSON schema document for one output type. """

    if schema not in VALID_SCHEMAS:
        raise InvalidInputError(f"Invalid schema '{schema}'. Valid schemas are {VALID_SCHEMAS}")
    resource = resources.files('pytobit') / 'schemas' / f"{schema}.{SCHEMA_VERSION}.json"

    return json.loads(resource.read_text(encoding='utf-8'))
