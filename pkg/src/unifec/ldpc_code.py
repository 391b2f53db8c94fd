"""Parity-check matrix representation: QC base-matrix expansion and alist I/O.

Row adjacency is the primary view (column indices ascending within each
row, which pins the trellis-position-to-column mapping); the column view
is derived and cross-validated on parse.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AlistFormatError, MatrixConsistencyError

EMPTY = -1  # empty-block marker in base matrices


@dataclass(frozen=True, eq=False)
class BaseMatrix:
    rows: int
    cols: int
    z: int
    shifts: np.ndarray = field(repr=False)  # (rows, cols) int, EMPTY or 0..z-1

    def __post_init__(self):
        if self.shifts.shape != (self.rows, self.cols):
            raise ValueError("shift grid shape does not match rows x cols")
        bad = (self.shifts != EMPTY) & ((self.shifts < 0) | (self.shifts >= self.z))
        if bad.any():
            r, c = np.argwhere(bad)[0]
            raise ValueError(
                f"shift {self.shifts[r, c]} at block ({r},{c}) outside 0..{self.z - 1}")

    @property
    def nonempty_blocks(self) -> int:
        return int((self.shifts != EMPTY).sum())


class ParityCheckMatrix:
    """Sparse binary matrix in row-adjacency form (CSR without values)."""

    def __init__(self, n: int, row_cols, qc_meta: BaseMatrix | None = None):
        self.N = int(n)
        self.M = len(row_cols)
        self.qc_meta = qc_meta
        ptr = np.zeros(self.M + 1, dtype=np.int64)
        cols = []
        for j, rc in enumerate(row_cols):
            rc = np.sort(np.asarray(rc, dtype=np.int64))
            if rc.size and (rc[0] < 0 or rc[-1] >= self.N):
                raise ValueError(f"row {j}: column index outside 0..{self.N - 1}")
            if rc.size != np.unique(rc).size:
                raise ValueError(f"row {j}: duplicate column index")
            cols.append(rc)
            ptr[j + 1] = ptr[j] + rc.size
        self.row_ptr = ptr
        self.col_idx = (np.concatenate(cols) if cols else
                        np.zeros(0, dtype=np.int64))
        self._col_adjacency = None

    @property
    def edges(self) -> int:
        return int(self.col_idx.size)

    def row(self, j: int) -> np.ndarray:
        return self.col_idx[self.row_ptr[j]:self.row_ptr[j + 1]]

    def row_weights(self) -> np.ndarray:
        return np.diff(self.row_ptr)

    def col_adjacency(self):
        if self._col_adjacency is None:
            per_col = [[] for _ in range(self.N)]
            for j in range(self.M):
                for c in self.row(j):
                    per_col[c].append(j)
            self._col_adjacency = [np.asarray(v, dtype=np.int64) for v in per_col]
        return self._col_adjacency

    def col_weights(self) -> np.ndarray:
        return np.bincount(self.col_idx, minlength=self.N)

    def to_dense(self) -> np.ndarray:
        h = np.zeros((self.M, self.N), dtype=np.int8)
        for j in range(self.M):
            h[j, self.row(j)] = 1
        return h

    def __eq__(self, other) -> bool:
        return (isinstance(other, ParityCheckMatrix)
                and self.N == other.N and self.M == other.M
                and np.array_equal(self.row_ptr, other.row_ptr)
                and np.array_equal(self.col_idx, other.col_idx))


def expand_base_matrix(b: BaseMatrix) -> ParityCheckMatrix:
    """Lift each non-empty block to a right-cyclic-shifted ZxZ identity.

    Block (r, c) with shift s puts a 1 at (r*Z + i, c*Z + (i + s) mod Z).
    """
    z = b.z
    row_cols = []
    for r in range(b.rows):
        active = [(c, int(s)) for c, s in enumerate(b.shifts[r]) if s != EMPTY]
        for i in range(z):
            row_cols.append([c * z + (i + s) % z for c, s in active])
    return ParityCheckMatrix(b.cols * z, row_cols, qc_meta=b)


@dataclass(frozen=True)
class CodeStats:
    edges: int
    min_row_weight: int
    max_row_weight: int
    min_col_weight: int
    max_col_weight: int
    rate: float


def code_stats(h: ParityCheckMatrix) -> CodeStats:
    rw = h.row_weights()
    cw = h.col_weights()
    return CodeStats(edges=h.edges,
                     min_row_weight=int(rw.min()), max_row_weight=int(rw.max()),
                     min_col_weight=int(cw.min()), max_col_weight=int(cw.max()),
                     rate=(h.N - h.M) / h.N)


def _ints(line: str, lineno: int):
    try:
        return [int(tok) for tok in line.split()]
    except ValueError:
        raise AlistFormatError("expected whitespace-separated integers",
                               line=lineno) from None


def parse_alist(text: str) -> ParityCheckMatrix:
    """Parse alist text (1-based indices, zero padding entries ignored)."""
    lines = [ln for ln in text.splitlines()]
    # keep positions for error reporting; skip fully blank trailing lines
    rows = [(i + 1, ln) for i, ln in enumerate(lines) if ln.strip()]
    if len(rows) < 4:
        raise AlistFormatError("file too short for an alist header")
    pos = 0

    def take():
        nonlocal pos
        if pos >= len(rows):
            raise AlistFormatError("unexpected end of file")
        lineno, ln = rows[pos]
        pos += 1
        return lineno, ln

    lineno, ln = take()
    head = _ints(ln, lineno)
    if len(head) != 2:
        raise AlistFormatError("expected 'N M' on the first line", line=lineno)
    n, m = head
    if n <= 0 or m <= 0:
        raise AlistFormatError("N and M must be positive", line=lineno)
    lineno, ln = take()
    if len(_ints(ln, lineno)) != 2:
        raise AlistFormatError("expected max column/row degrees", line=lineno)
    lineno, ln = take()
    col_deg = _ints(ln, lineno)
    if len(col_deg) != n:
        raise AlistFormatError(f"expected {n} column degrees", line=lineno)
    lineno, ln = take()
    row_deg = _ints(ln, lineno)
    if len(row_deg) != m:
        raise AlistFormatError(f"expected {m} row degrees", line=lineno)

    col_rows = []
    for c in range(n):
        lineno, ln = take()
        entries = [v for v in _ints(ln, lineno) if v != 0]
        if len(entries) != col_deg[c]:
            raise AlistFormatError(
                f"column {c}: {len(entries)} entries, degree says {col_deg[c]}",
                line=lineno)
        if any(not (1 <= v <= m) for v in entries):
            raise AlistFormatError(f"column {c}: row index out of range",
                                   line=lineno)
        col_rows.append([v - 1 for v in entries])

    row_cols = []
    for r in range(m):
        lineno, ln = take()
        entries = [v for v in _ints(ln, lineno) if v != 0]
        if len(entries) != row_deg[r]:
            raise AlistFormatError(
                f"row {r}: {len(entries)} entries, degree says {row_deg[r]}",
                line=lineno)
        if any(not (1 <= v <= n) for v in entries):
            raise AlistFormatError(f"row {r}: column index out of range",
                                   line=lineno)
        row_cols.append([v - 1 for v in entries])

    h = ParityCheckMatrix(n, row_cols)
    # cross-validate the two sections
    from_cols = [set() for _ in range(m)]
    for c, rws in enumerate(col_rows):
        for r in rws:
            from_cols[r].add(c)
    for r in range(m):
        if from_cols[r] != set(int(c) for c in h.row(r)):
            raise MatrixConsistencyError(
                f"row {r}: row and column sections disagree")
    return h


def serialize_alist(h: ParityCheckMatrix) -> str:
    """Round-trip alist writer (used for fixtures)."""
    col_adj = h.col_adjacency()
    col_deg = [a.size for a in col_adj]
    row_deg = list(h.row_weights())
    lines = [f"{h.N} {h.M}",
             f"{max(col_deg, default=0)} {max(row_deg, default=0)}",
             " ".join(str(d) for d in col_deg),
             " ".join(str(d) for d in row_deg)]
    for a in col_adj:
        lines.append(" ".join(str(r + 1) for r in a))
    for j in range(h.M):
        lines.append(" ".join(str(c + 1) for c in h.row(j)))
    return "\n".join(lines) + "\n"


def parse_base_matrix(text: str) -> BaseMatrix:
    """Header 'rows cols Z', then rows of shifts with -1 as the empty marker."""
    rows = [ln for ln in text.splitlines()
            if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows:
        raise AlistFormatError("empty base-matrix file")
    head = _ints(rows[0], 1)
    if len(head) != 3:
        raise AlistFormatError("expected header 'rows cols Z'", line=1)
    r, c, z = head
    if len(rows) != r + 1:
        raise AlistFormatError(f"expected {r} shift rows after the header")
    grid = []
    for i, ln in enumerate(rows[1:]):
        vals = _ints(ln, i + 2)
        if len(vals) != c:
            raise AlistFormatError(f"expected {c} entries", line=i + 2)
        grid.append(vals)
    return BaseMatrix(rows=r, cols=c, z=z,
                      shifts=np.asarray(grid, dtype=np.int64))


def serialize_base_matrix(b: BaseMatrix) -> str:
    lines = [f"{b.rows} {b.cols} {b.z}"]
    for r in range(b.rows):
        lines.append(" ".join(str(int(v)) for v in b.shifts[r]))
    return "\n".join(lines) + "\n"


def load_code_file(path) -> ParityCheckMatrix:
    """Load .alist, or a base-matrix text file (expanded on the fly)."""
    with open(path, "r", encoding="ascii") as fh:
        text = fh.read()
    if str(path).endswith(".alist"):
        return parse_alist(text)
    return expand_base_matrix(parse_base_matrix(text))


def wlan_648_rate12() -> ParityCheckMatrix:
    """The bundled IEEE 802.11n rate-1/2, n=648 (Z=27) code."""
    from importlib import resources

    text = (resources.files("unifec.codes") / "wlan_n648_r12.txt").read_text()
    return expand_base_matrix(parse_base_matrix(text))
