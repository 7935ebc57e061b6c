"""Test-problem construction and file I/O.

Random problems use numpy's PCG64 generator seeded explicitly, so every
matrix, right-hand side and solver run regenerates bit-identically from
its seed on any platform.  Sparse matrices come in through MatrixMarket
files; benchmark inputs are described by a small plain-text manifest.
"""
import os
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.linalg import cho_factor, cho_solve

from .analysis import gram_matrix, jacobi_eigenvalues
from .exceptions import NullSpaceEmpty, ParseError, RankDeficient, UnsupportedField
from .linalg import matvec, transpose_matvec
from .validation import as_csc_matrix, as_matrix, as_vector, is_sparse

# Added to a base seed to draw right-hand sides from a stream independent
# of the matrix stream (seed sequences hash, so any fixed offset works).
RHS_SEED_OFFSET = 0x9E3779B9

_MAX_NULLSPACE_RETRIES = 50


@dataclass
class LsqProblem:
    """A least-squares instance: matrix, rhs, and optional known solution."""

    matrix: object
    rhs: np.ndarray
    known_solution: np.ndarray | None = None
    consistent: bool = False
    label: str = ""
    density: float = 1.0
    condition_estimate: float | None = None

    def __post_init__(self):
        m = self.matrix.shape[0]
        self.rhs = as_vector(self.rhs, size=m, name="rhs")
        if self.known_solution is not None:
            self.known_solution = as_vector(self.known_solution, size=self.matrix.shape[1],
                                            name="known_solution")


def matrix_density(A):
    if is_sparse(A):
        return A.nnz / (A.shape[0] * A.shape[1])
    return 1.0


def gen_gaussian(m, n, seed):
    """Dense m x n matrix of i.i.d. standard normal entries.

    Deterministic per seed: entries come from numpy's PCG64 stream via
    its documented normal transform.
    """
    if m < 1 or n < 1 or m < n:
        raise ValueError(f"need m >= n >= 1, got {m} x {n}")
    rng = np.random.default_rng(seed)
    return np.asfortranarray(rng.standard_normal((m, n)))


def make_consistent(A, seed, label=""):
    """Problem with rhs = A @ x_true for a random normal x_true."""
    A = as_matrix(A)
    rng = np.random.default_rng(seed)
    x_true = rng.standard_normal(A.shape[1])
    return LsqProblem(
        matrix=A,
        rhs=matvec(A, x_true),
        known_solution=x_true,
        consistent=True,
        label=label or f"{A.shape[0]}x{A.shape[1]}",
        density=matrix_density(A),
    )


def make_inconsistent(A, seed, label=""):
    """Problem with rhs = A @ x_true + r0, r0 a nonzero vector with A^T r0 = 0.

    r0 is the component of a random vector orthogonal to the column
    space, obtained by a Gram-matrix projection; x_true stays the unique
    least-squares solution.

    Raises:
        NullSpaceEmpty: if no nonzero orthogonal component can be found
            (square invertible matrix).
    """
    A = as_matrix(A)
    m, n = A.shape
    rng = np.random.default_rng(seed)
    x_true = rng.standard_normal(n)

    gram, lower = _gram_factor(A)
    r0 = None
    for _ in range(_MAX_NULLSPACE_RETRIES):
        z = rng.standard_normal(m)
        w = cho_solve((gram, lower), transpose_matvec(A, z))
        candidate = z - matvec(A, w)
        if np.linalg.norm(candidate) > 1e-8 * np.linalg.norm(z):
            r0 = candidate
            break
    if r0 is None:
        raise NullSpaceEmpty(f"A^T has no usable null space for a {m} x {n} matrix")

    return LsqProblem(
        matrix=A,
        rhs=matvec(A, x_true) + r0,
        known_solution=x_true,
        consistent=False,
        label=label or f"{m}x{n}",
        density=matrix_density(A),
    )


def _gram_factor(A):
    try:
        return cho_factor(gram_matrix(A), lower=False)
    except np.linalg.LinAlgError as exc:
        raise RankDeficient(f"Gram factorization failed: {exc}") from exc


def reference_solution(problem):
    """Solve the normal equations A^T A x = A^T b by Cholesky.

    One refinement step is applied if the normal-equation residual
    exceeds 1e-10 relative to ||A^T b||.
    """
    A = problem.matrix
    rhs_n = transpose_matvec(A, problem.rhs)
    gram, lower = _gram_factor(A)
    x = cho_solve((gram, lower), rhs_n)
    resid = rhs_n - transpose_matvec(A, matvec(A, x))
    scale = np.linalg.norm(rhs_n)
    if scale > 0.0 and np.linalg.norm(resid) > 1e-10 * scale:
        x = x + cho_solve((gram, lower), resid)
    return x


def assert_full_column_rank(A, rel_tolerance=1e-12):
    """Return the Euclidean condition number, raising if rank-deficient.

    Both extreme eigenvalues of the Gram matrix come from the same
    Jacobi iteration used everywhere else; the matrix is declared
    rank-deficient when the smallest is at most ``rel_tolerance`` times
    the largest.
    """
    eigs = jacobi_eigenvalues(gram_matrix(A))
    lam_min, lam_max = float(eigs[0]), float(eigs[-1])
    if lam_min <= rel_tolerance * lam_max:
        raise RankDeficient(
            f"Gram eigenvalue ratio {lam_min:.3e} / {lam_max:.3e} is below {rel_tolerance:.1e}"
        )
    return float(np.sqrt(lam_max / lam_min))


# ---------------------------------------------------------------------------
# MatrixMarket I/O
# ---------------------------------------------------------------------------

_MM_FORMATS = ("coordinate", "array")
_MM_FIELDS = ("real", "integer", "pattern", "complex")
_MM_SYMMETRIES = ("general", "symmetric", "skew-symmetric", "hermitian")


def load_matrix_market(path):
    """Read a MatrixMarket file into canonical CSC storage.

    Coordinate and array formats with real, integer or pattern fields are
    accepted; symmetric and skew-symmetric storage is expanded to full,
    pattern entries get unit values, and duplicate coordinates are summed.

    Raises:
        ParseError: malformed content, with the offending line number.
        UnsupportedField: complex or hermitian files.
    """
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ParseError("empty file", 1)

    header = lines[0].split()
    if len(header) != 5 or not header[0].lower().startswith("%%matrixmarket"):
        raise ParseError("missing %%MatrixMarket header", 1)
    _, obj, mm_format, mm_field, mm_symmetry = (tok.lower() for tok in header)
    if obj != "matrix":
        raise ParseError(f"unsupported object {obj!r}", 1)
    if mm_format not in _MM_FORMATS:
        raise ParseError(f"unknown format {mm_format!r}", 1)
    if mm_field not in _MM_FIELDS:
        raise ParseError(f"unknown field {mm_field!r}", 1)
    if mm_symmetry not in _MM_SYMMETRIES:
        raise ParseError(f"unknown symmetry {mm_symmetry!r}", 1)
    if mm_field == "complex" or mm_symmetry == "hermitian":
        raise UnsupportedField("complex-valued matrices are not supported")
    if mm_format == "array" and mm_field == "pattern":
        raise ParseError("array format cannot use the pattern field", 1)

    # (line_number, content) for everything past comments and blanks.
    body = [(i + 1, ln) for i, ln in enumerate(lines[1:], start=1)
            if ln.strip() and not ln.lstrip().startswith("%")]
    if not body:
        raise ParseError("missing size line", len(lines))

    size_no, size_line = body[0]
    entries = body[1:]
    if mm_format == "coordinate":
        rows, cols, vals, shape = _parse_coordinate(size_no, size_line, entries, mm_field)
    else:
        rows, cols, vals, shape = _parse_array(size_no, size_line, entries, mm_symmetry)

    rows, cols, vals = _expand_symmetry(rows, cols, vals, mm_symmetry, size_no)
    M = sparse.coo_array((vals, (rows, cols)), shape=shape).tocsc()
    return as_csc_matrix(M)


def _parse_coordinate(size_no, size_line, entries, mm_field):
    parts = size_line.split()
    if len(parts) != 3:
        raise ParseError("coordinate size line needs 'rows cols nnz'", size_no)
    try:
        m, n, nnz = (int(p) for p in parts)
    except ValueError:
        raise ParseError(f"bad size line {size_line!r}", size_no) from None
    if m < 1 or n < 1 or nnz < 0:
        raise ParseError(f"bad dimensions {m} x {n} with {nnz} entries", size_no)
    if len(entries) != nnz:
        where = entries[-1][0] if entries else size_no
        raise ParseError(f"expected {nnz} entries, found {len(entries)}", where)

    want = 2 if mm_field == "pattern" else 3
    rows = np.empty(nnz, dtype=np.int64)
    cols = np.empty(nnz, dtype=np.int64)
    vals = np.empty(nnz)
    for k, (no, ln) in enumerate(entries):
        parts = ln.split()
        if len(parts) != want:
            raise ParseError(f"expected {want} fields, got {len(parts)}", no)
        try:
            i, j = int(parts[0]), int(parts[1])
            v = 1.0 if mm_field == "pattern" else float(parts[2])
        except ValueError:
            raise ParseError(f"bad entry {ln!r}", no) from None
        if not (1 <= i <= m and 1 <= j <= n):
            raise ParseError(f"index ({i}, {j}) outside {m} x {n}", no)
        rows[k], cols[k], vals[k] = i - 1, j - 1, v
    return rows, cols, vals, (m, n)


def _parse_array(size_no, size_line, entries, mm_symmetry):
    parts = size_line.split()
    if len(parts) != 2:
        raise ParseError("array size line needs 'rows cols'", size_no)
    try:
        m, n = int(parts[0]), int(parts[1])
    except ValueError:
        raise ParseError(f"bad size line {size_line!r}", size_no) from None
    if m < 1 or n < 1:
        raise ParseError(f"bad dimensions {m} x {n}", size_no)
    if mm_symmetry != "general" and m != n:
        raise ParseError(f"{mm_symmetry} storage needs a square matrix", size_no)

    if mm_symmetry == "general":
        coords = [(i, j) for j in range(n) for i in range(m)]
    elif mm_symmetry == "symmetric":
        coords = [(i, j) for j in range(n) for i in range(j, m)]
    else:  # skew-symmetric: strictly below the diagonal
        coords = [(i, j) for j in range(n) for i in range(j + 1, m)]

    if len(entries) != len(coords):
        where = entries[-1][0] if entries else size_no
        raise ParseError(f"expected {len(coords)} values, found {len(entries)}", where)

    rows = np.empty(len(coords), dtype=np.int64)
    cols = np.empty(len(coords), dtype=np.int64)
    vals = np.empty(len(coords))
    for k, ((i, j), (no, ln)) in enumerate(zip(coords, entries)):
        parts = ln.split()
        if len(parts) != 1:
            raise ParseError(f"expected one value per line, got {ln!r}", no)
        try:
            vals[k] = float(parts[0])
        except ValueError:
            raise ParseError(f"bad value {ln!r}", no) from None
        rows[k], cols[k] = i, j
    return rows, cols, vals, (m, n)


def _expand_symmetry(rows, cols, vals, mm_symmetry, size_no):
    if mm_symmetry == "general":
        return rows, cols, vals
    off = rows != cols
    if mm_symmetry == "skew-symmetric" and np.any(vals[~off] != 0.0):
        raise ParseError("skew-symmetric matrix has a nonzero diagonal entry", size_no)
    sign = -1.0 if mm_symmetry == "skew-symmetric" else 1.0
    return (
        np.concatenate([rows, cols[off]]),
        np.concatenate([cols, rows[off]]),
        np.concatenate([vals, sign * vals[off]]),
    )


def save_matrix_market(A, path, comment=None):
    """Write a matrix back out: coordinate format for sparse storage,
    array format for dense.  Full float precision, so a load round-trips
    exactly."""
    with open(path, "w", encoding="ascii") as fh:
        if is_sparse(A):
            A = as_csc_matrix(A)
            fh.write("%%MatrixMarket matrix coordinate real general\n")
            if comment:
                fh.write(f"% {comment}\n")
            fh.write(f"{A.shape[0]} {A.shape[1]} {A.nnz}\n")
            coo = A.tocoo()
            order = np.lexsort((coo.row, coo.col))
            for k in order:
                fh.write(f"{coo.row[k] + 1} {coo.col[k] + 1} {coo.data[k]:.17g}\n")
        else:
            m, n = A.shape
            fh.write("%%MatrixMarket matrix array real general\n")
            if comment:
                fh.write(f"% {comment}\n")
            fh.write(f"{m} {n}\n")
            for j in range(n):
                for i in range(m):
                    fh.write(f"{A[i, j]:.17g}\n")


def load_vector(path):
    """Read a one-value-per-line vector file ('#' and '%' start comments)."""
    values = []
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        for no, ln in enumerate(fh, start=1):
            text = ln.strip()
            if not text or text.startswith(("#", "%")):
                continue
            try:
                values.append(float(text))
            except ValueError:
                raise ParseError(f"bad vector entry {text!r}", no) from None
    if not values:
        raise ParseError("vector file has no values", 1)
    return np.asarray(values)


def save_vector(v, path):
    with open(path, "w", encoding="ascii") as fh:
        for value in np.asarray(v, dtype=np.float64):
            fh.write(f"{value:.17g}\n")


# ---------------------------------------------------------------------------
# Experiment manifests
# ---------------------------------------------------------------------------

@dataclass
class ManifestEntry:
    """One benchmark row: where the matrix comes from and how rhs is built."""

    label: str
    kind: str  # "random" or "file"
    rows: int = 0
    cols: int = 0
    path: str = ""
    consistent: bool = True
    seed: int | None = None


def load_manifest(path):
    """Parse a manifest: one experiment per line.

    Line format (whitespace separated, '#' starts a comment)::

        label  random:MxN | file:PATH  consistent|inconsistent  [seed]

    File paths are resolved relative to the manifest's directory.
    """
    base = os.path.dirname(os.path.abspath(path))
    entries = []
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        for no, ln in enumerate(fh, start=1):
            text = ln.split("#", 1)[0].strip()
            if not text:
                continue
            parts = text.split()
            if len(parts) not in (3, 4):
                raise ParseError("expected 'label matrix consistency [seed]'", no)
            label, matrix_spec, consistency = parts[0], parts[1], parts[2]
            if consistency not in ("consistent", "inconsistent"):
                raise ParseError(f"consistency must be consistent|inconsistent, got {consistency!r}", no)
            seed = None
            if len(parts) == 4:
                try:
                    seed = int(parts[3])
                except ValueError:
                    raise ParseError(f"bad seed {parts[3]!r}", no) from None
            entry = ManifestEntry(label=label, kind="", consistent=consistency == "consistent", seed=seed)
            if matrix_spec.startswith("random:"):
                dims = matrix_spec[len("random:"):].lower().split("x")
                if len(dims) != 2:
                    raise ParseError(f"bad random spec {matrix_spec!r}; want random:MxN", no)
                try:
                    entry.rows, entry.cols = int(dims[0]), int(dims[1])
                except ValueError:
                    raise ParseError(f"bad random spec {matrix_spec!r}", no) from None
                entry.kind = "random"
            elif matrix_spec.startswith("file:"):
                entry.kind = "file"
                raw = matrix_spec[len("file:"):]
                entry.path = raw if os.path.isabs(raw) else os.path.join(base, raw)
            else:
                raise ParseError(f"matrix spec {matrix_spec!r} must start with random: or file:", no)
            entries.append(entry)
    if not entries:
        raise ParseError("manifest lists no experiments", 1)
    return entries
