"""
Counter-based random streams for reproducible parallel Monte Carlo.

Every replication gets its own Philox generator, keyed by (master seed, stream, replication
index) through numpy's SeedSequence. A replication therefore draws the same numbers whichever
worker runs it and in whatever order, which is what makes results independent of the worker
count. Normal variates come from numpy's ziggurat transform of the Philox output.
"""

import numpy as np

from pytobit.util.config import STUDENT_T_DF, VALID_INNOVATION_LAWS
from pytobit.util.errors import InvalidInputError


def replication_rng(seed: int, replication: int, stream: int = 0) -> np.random.Generator:
    """ Return the generator owned by one replication.

    Args:

        seed:
            The master seed of the run.
        replication:
            Zero-based index of the replication.
        stream:
            Identifier separating unrelated uses of the same master seed (see util/config.py).

    Returns:

        A numpy Generator backed by a Philox bit generator.
    """

    sequence = np.random.SeedSequence(entropy=seed, spawn_key=(stream, replication))

    return np.random.Generator(np.random.Philox(sequence))


def draw_innovations(rng: np.random.Generator, size: int, law: str = 'normal',
                     sigma: float = 1.0) -> np.ndarray:
    """ Draw i.i.d. mean-zero innovations with standard deviation sigma.

    Args:

        rng:
            The generator to draw from.
        size:
            Number of draws.
        law:
            One of 'normal', 'student_t' (5 degrees of freedom, rescaled to unit variance) or
            'rademacher', defaults to 'normal'.
        sigma:
            Standard deviation of the draws, defaults to 1.

    Returns:

        A float64 array of length size.

    Raises:

        InvalidInputError: Unknown law.
    """

    if law == 'normal':
        draws = rng.standard_normal(size)
    elif law == 'student_t':
        draws = rng.standard_t(STUDENT_T_DF, size) * np.sqrt((STUDENT_T_DF - 2.0) / STUDENT_T_DF)
    elif law == 'rademacher':
        draws = rng.integers(0, 2, size).astype(np.float64) * 2.0 - 1.0
    else:
        raise InvalidInputError(f"Invalid innovation law '{law}'. Valid laws are "\
                                f"{VALID_INNOVATION_LAWS}")

    return sigma * draws
