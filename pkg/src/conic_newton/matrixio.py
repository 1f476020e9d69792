"""Reading and writing dense matrices as MatrixMarket or CSV files.

MatrixMarket is the primary interchange format: ASCII, widely supported,
and exact for doubles when written with 17 significant digits.  Supported
flavors are ``array real general``, ``array real symmetric``, and
``coordinate real symmetric``.  Any file whose first line does not start
with the MatrixMarket banner is parsed as comma-separated numeric rows.

Parse errors name the offending line.
"""

from __future__ import annotations

import numpy as np


class MatrixFileError(ValueError):
    """Unreadable or malformed matrix file; message names the bad line."""


def _fail(path, line_no, message):
    raise MatrixFileError(f"{path}:{line_no}: {message}")


def read_matrix(path) -> np.ndarray:
    """Load a dense matrix, sniffing the format from the first line."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if lines and lines[0].startswith("%%MatrixMarket"):
        return _parse_matrix_market(path, lines)
    return _parse_csv(path, lines)


def read_vector(path) -> np.ndarray:
    """Load a vector: any matrix file with a single row or column."""
    mat = read_matrix(path)
    if mat.ndim == 1:
        return mat
    if 1 in mat.shape:
        return mat.reshape(-1)
    raise MatrixFileError(f"{path}: expected a vector, got shape {mat.shape}")


def _parse_matrix_market(path, lines):
    header = lines[0].split()
    if len(header) != 5 or header[1] != "matrix" or header[3] != "real":
        _fail(path, 1, f"unsupported MatrixMarket header {lines[0]!r}")
    layout, symmetry = header[2], header[4]
    if layout not in ("array", "coordinate"):
        _fail(path, 1, f"unsupported layout {layout!r}")
    if symmetry not in ("general", "symmetric"):
        _fail(path, 1, f"unsupported symmetry {symmetry!r}")
    if layout == "coordinate" and symmetry != "symmetric":
        _fail(path, 1, "coordinate files must be symmetric")

    body = [
        (no, line)
        for no, line in enumerate(lines[1:], start=2)
        if line.strip() and not line.lstrip().startswith("%")
    ]
    if not body:
        _fail(path, len(lines), "missing size line")
    size_no, size_line = body[0]
    entries = body[1:]
    fields = size_line.split()

    if layout == "array":
        if len(fields) != 2:
            _fail(path, size_no, f"expected 'rows cols', got {size_line!r}")
        try:
            rows, cols = int(fields[0]), int(fields[1])
        except ValueError:
            _fail(path, size_no, f"non-integer size in {size_line!r}")
        expected = rows * cols if symmetry == "general" else cols * (cols + 1) // 2
        if rows != cols and symmetry == "symmetric":
            _fail(path, size_no, "symmetric files must be square")
        positions = (
            [(i, j) for j in range(cols) for i in range(rows)]  # column-major
            if symmetry == "general"
            else [(i, j) for j in range(cols) for i in range(j, rows)]
        )
        out = np.zeros((rows, cols))
        for k, (i, j) in enumerate(positions):
            if k >= len(entries):
                _fail(
                    path,
                    entries[-1][0] if entries else size_no,
                    f"expected {expected} values, found {len(entries)}",
                )
            no, line = entries[k]
            out[i, j] = _parse_value(path, no, line)
            if symmetry == "symmetric":
                out[j, i] = out[i, j]
        if len(entries) > expected:
            _fail(path, entries[expected][0], f"expected {expected} values, found {len(entries)}")
        return out

    # coordinate real symmetric
    if len(fields) != 3:
        _fail(path, size_no, f"expected 'rows cols nnz', got {size_line!r}")
    try:
        rows, cols, nnz = (int(f) for f in fields)
    except ValueError:
        _fail(path, size_no, f"non-integer size in {size_line!r}")
    if rows != cols:
        _fail(path, size_no, "coordinate symmetric files must be square")
    if len(entries) != nnz:
        _fail(
            path,
            entries[-1][0] if entries else size_no,
            f"expected {nnz} entries, found {len(entries)}",
        )
    out = np.zeros((rows, cols))
    for no, line in entries:
        parts = line.split()
        if len(parts) != 3:
            _fail(path, no, f"expected 'i j value', got {line!r}")
        try:
            i, j = int(parts[0]) - 1, int(parts[1]) - 1
            value = float(parts[2])
        except ValueError:
            _fail(path, no, f"malformed entry {line!r}")
        if not (0 <= i < rows and 0 <= j < cols):
            _fail(path, no, f"index out of range in {line!r}")
        out[i, j] = value
        out[j, i] = value
    return out


def _parse_value(path, no, line):
    try:
        return float(line.split()[0])
    except (ValueError, IndexError):
        _fail(path, no, f"expected a number, got {line!r}")


def _parse_csv(path, lines):
    rows = []
    width = None
    for no, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        cells = [c.strip() for c in stripped.split(",")]
        try:
            row = [float(c) for c in cells]
        except ValueError:
            _fail(path, no, f"malformed numeric row {line!r}")
        if width is None:
            width = len(row)
        elif len(row) != width:
            _fail(path, no, f"expected {width} columns, found {len(row)}")
        rows.append(row)
    if not rows:
        raise MatrixFileError(f"{path}: no numeric data found")
    return np.array(rows)


def write_matrix(path, matrix: np.ndarray, fmt: str = "matrixmarket") -> None:
    """Write a dense matrix; format is 'matrixmarket' or 'csv'."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    if fmt == "csv":
        with open(path, "w", encoding="utf-8") as fh:
            for row in matrix:
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
        return
    if fmt != "matrixmarket":
        raise ValueError(f"unknown format {fmt!r}")
    rows, cols = matrix.shape
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("%%MatrixMarket matrix array real general\n")
        fh.write(f"{rows} {cols}\n")
        for j in range(cols):
            for i in range(rows):
                fh.write(f"{matrix[i, j]:.17g}\n")


def write_vector(path, vector: np.ndarray, fmt: str = "matrixmarket") -> None:
    write_matrix(path, np.asarray(vector, dtype=float).reshape(-1, 1), fmt=fmt)


def symmetrize_checked(matrix: np.ndarray, warn) -> np.ndarray:
    """Symmetrize, calling ``warn(message)`` when the skew part is material."""
    matrix = np.asarray(matrix, dtype=float)
    skew = np.linalg.norm(matrix - matrix.T)
    scale = np.linalg.norm(matrix)
    if skew > 1e-9 * max(scale, 1e-30):
        warn(
            f"input matrix is asymmetric (skew norm {skew:.3e}); "
            "proceeding with its symmetric part"
        )
    return 0.5 * (matrix + matrix.T)
