"""
Replication-parallel map with an order-independent reduction.

Work is split into chunks of consecutive replication indices. Each chunk is a copy of a frozen
task dataclass with its own `start` and `stop`, so a worker only needs the task to know which
random streams to draw from. Results come back in chunk order and are concatenated, so the
output does not depend on how many processes ran or in which order they finished.
"""

import dataclasses
import logging
from multiprocessing import Pool
from typing import Any, Callable

import numpy as np

from pytobit.util.config import DEFAULT_CHUNK_SIZE

logger = logging.getLogger(__name__)


def split_chunks(replications: int, chunk_size: int = DEFAULT_CHUNK_SIZE) -> list[tuple[int, int]]:
    """ Split range(replications) into consecutive (start, stop) pairs of at most chunk_size. """

    return [(start, min(start + chunk_size, replications))
            for start in range(0, replications, chunk_size)]


def replicate(worker: Callable[[Any], np.ndarray],
              task: Any,
              replications: int,
              workers: int = 1,
              chunk_size: int = DEFAULT_CHUNK_SIZE,
              label: str = 'replications') -> np.ndarray:
    """ Run worker over all replications and stack the per-replication results.

    Args:

        worker:
            A module-level function taking a task and returning one row per replication in
            [task.start, task.stop).
        task:
            A frozen dataclass with integer fields `start` and `stop`.
        replications:
            Total number of replications.
        workers:
            Number of processes. 1 runs everything in the calling process, defaults to 1.
        chunk_size:
            Replications per chunk, defaults to DEFAULT_CHUNK_SIZE.
        label:
            Name used in progress log lines.

    Returns:

        The concatenation of all chunk results, in replication order.
    """

    tasks = [dataclasses.replace(task, start=start, stop=stop)
             for start, stop in split_chunks(replications, chunk_size)]

    results: list[np.ndarray] = []
    done = 0

    if workers <= 1 or len(tasks) == 1:
        for chunk in tasks:
            results.append(worker(chunk))
            done += chunk.stop - chunk.start
            logger.info("%s: %d/%d done", label, done, replications)
    else:
        with Pool(processes=workers) as pool:
            for chunk, result in zip(tasks, pool.imap(worker, tasks)):
                results.append(result)
                done += chunk.stop - chunk.start
                logger.info("%s: %d/%d done", label, done, replications)

    return np.concatenate(results, axis=0)
