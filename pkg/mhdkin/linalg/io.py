import logging
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse as sp

from mhdkin.core.exceptions import OutputError

logger = logging.getLogger(__name__)


def write_matrix(path: Path, matrix) -> Path:
    """
    Write a sparse matrix in Matrix Market coordinate format.

    Raises:
        OutputError: If the file cannot be written
    """
    path = Path(path).with_suffix(".mtx")
    try:
        scipy.io.mmwrite(str(path), sp.coo_matrix(matrix), field="real")
    except OSError as exc:
        raise OutputError(str(path), str(exc)) from exc
    return path


def read_matrix(path: Path) -> sp.csr_matrix:
    return sp.csr_matrix(scipy.io.mmread(str(path)))


def write_vector(path: Path, vector: np.ndarray) -> Path:
    """Write a vector as a dense Matrix Market array with one column."""
    path = Path(path).with_suffix(".mtx")
    try:
        scipy.io.mmwrite(str(path), np.asarray(vector, dtype=float).reshape(-1, 1))
    except OSError as exc:
        raise OutputError(str(path), str(exc)) from exc
    return path


def read_vector(path: Path) -> np.ndarray:
    return np.asarray(scipy.io.mmread(str(path))).ravel()


def dump_system(system, directory: Path) -> list[Path]:
    """
    Dump every reduced block and right-hand side of an assembled system.

    Files are named after the block (``M.mtx``, ``F_hat_w.mtx``, ...) and
    the field (``rhs_J.mtx``, ...).
    """
    directory = Path(directory)
    try:
        directory.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(str(directory), str(exc)) from exc

    written = [write_matrix(directory / str(name), block) for name, block in system.blocks.items()]
    written += [write_vector(directory / f"rhs_{name}", vector) for name, vector in system.rhs.items()]
    logger.info("Wrote %d Matrix Market files to %s", len(written), directory)
    return written
