"""CSV serialization with atomic writes.

Float cells use the shortest representation that parses back to the
same double, so a written file reproduces values bitwise on read and
rewriting identical data yields identical bytes. Files are written to a
temporary sibling and renamed into place, so readers never observe a
partial file.
"""

from __future__ import annotations

import csv
import os
import tempfile
from contextlib import contextmanager
from typing import Iterable, Iterator, Sequence, TextIO

import numpy as np

from .errors import ValidationError
from .lattice import Lattice
from .quantizer import CentroidConfiguration, SampleSet


def format_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


@contextmanager
def atomic_write(path: str) -> Iterator[TextIO]:
    """Open a temporary file that replaces ``path`` only on clean exit."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            yield handle
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_table(path: str, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with atomic_write(path) as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(list(header))
        for row in rows:
            writer.writerow([format_cell(v) for v in row])


def _is_numeric_row(cells: Sequence[str]) -> bool:
    for cell in cells:
        try:
            float(cell)
        except ValueError:
            return False
    return True


def _read_rows(path: str) -> list[list[str]]:
    with open(path, newline="") as handle:
        rows = [row for row in csv.reader(handle) if row]
    if not rows:
        raise ValidationError(f"{path}: file contains no rows")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ValidationError(f"{path}: rows have inconsistent column counts {sorted(widths)}")
    return rows


def write_samples(path: str, samples: SampleSet) -> None:
    header = [f"x{c}" for c in range(samples.d)]
    write_table(path, header, samples.points)


def read_samples(path: str) -> SampleSet:
    rows = _read_rows(path)
    if not _is_numeric_row(rows[0]):
        rows = rows[1:]
        if not rows:
            raise ValidationError(f"{path}: only a header row, no observations")
    try:
        points = np.array([[float(c) for c in row] for row in rows], dtype=np.float64)
    except ValueError as exc:
        raise ValidationError(f"{path}: non-numeric cell in data rows ({exc})") from None
    try:
        return SampleSet(points)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from None


def write_centroids(path: str, config: CentroidConfiguration) -> None:
    e = config.lattice.ndim
    header = [f"i{a}" for a in range(e)] + [f"x{c}" for c in range(config.d)]
    rows = [
        list(config.lattice.indices[r]) + list(config.points[r])
        for r in range(config.lattice.size)
    ]
    write_table(path, header, rows)


def read_centroids(path: str, lattice: Lattice | None = None) -> CentroidConfiguration:
    """Read a centroid table: lattice index columns, then coordinates.

    The index column count comes from the header (i* names) or from the
    supplied lattice when the file has no header. Rows must enumerate a
    complete lattice box in lexicographic order.
    """
    rows = _read_rows(path)
    if not _is_numeric_row(rows[0]):
        names = rows[0]
        e = sum(1 for name in names if name.startswith("i"))
        if e == 0 or not all(
            n.startswith("i") if k < e else not n.startswith("i") for k, n in enumerate(names)
        ):
            raise ValidationError(
                f"{path}: header must list index columns (i0, i1, ...) before coordinate columns"
            )
        rows = rows[1:]
        if not rows:
            raise ValidationError(f"{path}: only a header row, no centroids")
    elif lattice is not None:
        e = lattice.ndim
    else:
        raise ValidationError(
            f"{path}: headerless centroid files need an explicit lattice to split "
            f"index from coordinate columns"
        )
    width = len(rows[0])
    if width <= e:
        raise ValidationError(f"{path}: {width} columns cannot hold {e} index columns plus coordinates")
    try:
        raw_sites = np.array([[float(c) for c in row[:e]] for row in rows], dtype=np.float64)
        points = np.array([[float(c) for c in row[e:]] for row in rows], dtype=np.float64)
    except ValueError as exc:
        raise ValidationError(f"{path}: non-numeric cell ({exc})") from None
    if raw_sites.size == 0 or (raw_sites < 0).any() or (raw_sites != np.round(raw_sites)).any():
        raise ValidationError(f"{path}: lattice indices must be nonnegative integers")
    sites = raw_sites.astype(np.int64)
    dims = tuple(int(m) + 1 for m in sites.max(axis=0))
    box = lattice if lattice is not None else Lattice(dims)
    if sites.shape[0] != box.size or not np.array_equal(sites, box.indices):
        raise ValidationError(
            f"{path}: rows must enumerate the full lattice box {box.dims} in lexicographic order"
        )
    try:
        return CentroidConfiguration(box, points)
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from None
