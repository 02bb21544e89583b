"""
Critical-value tables for the Tobit ADF t-statistic.

A CvTable holds the 1%, 5% and 10% quantiles of the null distribution of t_beta, one row per
value of the nuisance ratio b0*phi(1)/sigma, plus the conventional ADF quantiles used beyond the
last tabulated ratio. Tables are stored as a CSV with header `ratio,q01,q05,q10` next to a JSON
sidecar carrying the ADF row and the provenance of the simulation that produced them.

The package ships the table tabulated at T = 100000 with 10^7 Gaussian replications per row.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import polars as pl

from pytobit.util.config import SCHEMA_VERSION, VALID_LEVELS
from pytobit.util.errors import InvalidInputError
from pytobit.util.input_validation import check_choice

logger = logging.getLogger(__name__)


### CONSTANTS #####################################################################################

LEVEL_COLUMNS = {1: 'q01', 5: 'q05', 10: 'q10'}

TABLE_SCHEMA = {'ratio': pl.Float64, 'q01': pl.Float64, 'q05': pl.Float64, 'q10': pl.Float64}

# Ratios closer than this to each other count as equidistant for the nearest-row rule
RATIO_TIE_TOLERANCE = 1e-12

DEFAULT_TABLE_FILE = 'cv_table.csv'

### END CONSTANTS #################################################################################


@dataclass(frozen=True, eq=False)
class CvTable:
    """ Quantile surface of the null t_beta distribution.

    Attributes:

        rows:
            polars DataFrame with columns ratio, q01, q05, q10, ratios strictly increasing.
        adf_row:
            The (q01, q05, q10) quantiles of the linear (uncensored) model.
        provenance:
            How the table was produced: T, replications, seed, innovation law, backend, plus any
            monotonicity violations recorded during tabulation.
    """

    rows: pl.DataFrame
    adf_row: tuple[float, float, float]
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        missing = [c for c in TABLE_SCHEMA if c not in self.rows.columns]
        if missing:
            raise InvalidInputError(f"Critical-value table is missing columns {missing}")
        if self.rows.height == 0:
            raise InvalidInputError("Critical-value table has no rows")
        object.__setattr__(self, 'rows', self.rows.select(list(TABLE_SCHEMA)).cast(TABLE_SCHEMA))
        object.__setattr__(self, 'adf_row', tuple(float(v) for v in self.adf_row))

    @property
    def ratios(self) -> np.ndarray:
        return self.rows['ratio'].to_numpy()

    @property
    def max_ratio(self) -> float:
        return float(self.rows['ratio'].max())

    def nearest_row(self, ratio: float) -> tuple[tuple[float, float, float], float | None]:
        """ The quantiles for a ratio by the nearest-row rule.

        Exact ties go to the smaller ratio. A ratio above the largest tabulated one gets the ADF
        row, signalled by a returned row ratio of None.

        Returns:

            ((q01, q05, q10), tabulated ratio of the row used or None for the ADF row)
        """

        if ratio > self.max_ratio:
            return self.adf_row, None

        ratios = self.ratios
        distance = np.abs(ratios - ratio)
        index = int(np.flatnonzero(distance <= distance.min() + RATIO_TIE_TOLERANCE)[0])
        row = self.rows.row(index, named=True)

        return (row['q01'], row['q05'], row['q10']), float(ratios[index])

    def level_column(self, level: int) -> np.ndarray:
        check_choice(level, VALID_LEVELS, 'level')
        return self.rows[LEVEL_COLUMNS[level]].to_numpy()

    def to_dict(self) -> dict:
        return {
            'rows': self.rows.to_dicts(),
            'adf_row': dict(zip(LEVEL_COLUMNS.values(), self.adf_row)),
            'provenance': self.provenance,
        }


def check_table(table: CvTable, strict: bool = True) -> list[str]:
    """ Check the ordering invariants of a CvTable.

    Ratios must be strictly increasing, each quantile column nondecreasing in the ratio, and the
    1% < 5% < 10% quantiles ordered within every row, the ADF row included.

    Args:

        table:
            The table to check.
        strict:
            Raise on the first violation when True; otherwise log and return them.

    Returns:

        The list of violations (empty for a valid table).

    Raises:

        InvalidInputError: strict is True and the table violates an invariant.
    """

    violations = []
    ratios = table.ratios
    if np.any(np.diff(ratios) <= 0):
        violations.append("ratios are not strictly increasing")

    for column in LEVEL_COLUMNS.values():
        values = table.rows[column].to_numpy()
        for i in np.flatnonzero(np.diff(values) < 0):
            violations.append(f"{column} decreases from ratio {ratios[i]:g} to {ratios[i + 1]:g}")

    quantiles = table.rows.select(list(LEVEL_COLUMNS.values())).to_numpy()
    for i in np.flatnonzero(~np.all(np.diff(quantiles, axis=1) > 0, axis=1)):
        violations.append(f"quantiles are not ordered at ratio {ratios[i]:g}")
    if not table.adf_row[0] < table.adf_row[1] < table.adf_row[2]:
        violations.append("quantiles are not ordered in the ADF row")

    if violations and strict:
        raise InvalidInputError("Invalid critical-value table: " + "; ".join(violations))
    for violation in violations:
        logger.warning("Critical-value table: %s", violation)

    return violations


def sidecar_path(csv_path: str | Path) -> Path:
    return Path(csv_path).with_suffix('.json')


def write_table(table: CvTable, csv_path: str | Path) -> Path:
    """ Write the table CSV and its JSON sidecar. Returns the sidecar path. """

    csv_path = Path(csv_path)
    table.rows.write_csv(csv_path)

    sidecar = sidecar_path(csv_path)
    payload = {
        'schema': f"cv_table.{SCHEMA_VERSION}",
        'adf_row': dict(zip(LEVEL_COLUMNS.values(), table.adf_row)),
        'provenance': table.provenance,
    }
    sidecar.write_text(json.dumps(payload, indent=2, sort_keys=True) + '\n')

    return sidecar


def read_table(csv_path: str | Path, strict: bool = True) -> CvTable:
    """ Read a table CSV and its JSON sidecar, then check it.

    Raises:

        InvalidInputError: Missing sidecar, malformed content or a table failing check_table.
    """

    csv_path = Path(csv_path)
    sidecar = sidecar_path(csv_path)
    if not sidecar.exists():
        raise InvalidInputError(f"Critical-value table {csv_path} has no sidecar {sidecar}")

    try:
        rows = pl.read_csv(csv_path, schema_overrides=TABLE_SCHEMA)
        payload = json.loads(sidecar.read_text())
        adf_row = tuple(payload['adf_row'][c] for c in LEVEL_COLUMNS.values())
    except (pl.exceptions.PolarsError, json.JSONDecodeError, KeyError, TypeError) as e:
        raise InvalidInputError(f"Could not read critical-value table {csv_path}: {e}") from e

    if not all(math.isfinite(v) for v in adf_row):
        raise InvalidInputError(f"Non-finite ADF row in {sidecar}")

    table = CvTable(rows=rows, adf_row=adf_row, provenance=payload.get('provenance', {}))
    check_table(table, strict=strict)

    return table


def load_default_table() -> CvTable:
    """ The shipped critical-value table (22 ratio rows from 0.0 to 2.5, and the ADF row). """

    with resources.as_file(resources.files('pytobit') / 'data' / DEFAULT_TABLE_FILE) as path:
        return read_table(path)
