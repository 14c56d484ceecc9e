"""Construction and verification of complementary binary code matrices.

A code matrix stacks D binary (+1/-1) sequences of length N, one sequence per
pulse.  The design goal is that the per-chip products between a sequence and
its own shifted copy cancel *across the pulse dimension* at every nonzero
integer lag, while adding to D at lag zero.  That pointwise cancellation is
exactly column orthogonality of the D x N matrix (Gram matrix equal to D times
the identity), which is what :func:`verify_wdc` checks with integer
arithmetic.

Two constructions are provided:

* a cascade that grows a complementary seed pair by repeated sign-patterned
  concatenation into a grid of candidate matrices (every grid column is a
  Walsh-Hadamard matrix), and
* a plain Sylvester recursion, as a cross-check built from standard parts.

Cancellation at every lag forces structural constraints on valid matrices:
the pulse count cannot be smaller than the code length, must be even, and
must be divisible by four whenever the code length is odd.  The verification
report carries those flags alongside the lag test itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    DuplicateColumn,
    IndexOutOfRange,
    LagOutOfRange,
    NonOrthogonalSeed,
    SizeOverflow,
    TheoremOneViolation,
)

# Largest candidate size the cascade will build; keeps Gram checks O(4096^2)
# integers and memory for the block grid under control.
MAX_CASCADE_SIZE = 4096


@dataclass
class BinaryCodeMatrix:
    """D binary sequences of length N, one row per pulse.

    Attributes:
        codes: Array of shape (n_pulses, n_chips) with +1/-1 entries.
        block_index: Grid column this matrix was selected from, if any.
        column_indices: Chip columns kept at selection time, if any.
    """

    codes: np.ndarray
    block_index: Optional[int] = None
    column_indices: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        self.codes = np.asarray(self.codes, dtype=np.int8)
        if self.codes.ndim != 2:
            raise ValueError("code matrix must be two-dimensional")
        if not np.all(np.abs(self.codes) == 1):
            raise ValueError("code matrix entries must be +1 or -1")

    @property
    def n_pulses(self) -> int:
        return self.codes.shape[0]

    @property
    def n_chips(self) -> int:
        return self.codes.shape[1]


@dataclass
class CascadeStructure:
    """Block grid holding one binary sequence per (row, column) cell.

    Column ``j`` of the grid, read top to bottom, is candidate matrix ``j``:
    its rows are the cell sequences stacked into a square +1/-1 matrix.
    """

    blocks: np.ndarray  # (grid_rows, grid_cols, sequence_length) int8
    depth: int

    @property
    def n_candidates(self) -> int:
        return self.blocks.shape[1]

    @property
    def sequence_length(self) -> int:
        return self.blocks.shape[2]

    def candidate(self, block_index: int) -> np.ndarray:
        if not 0 <= block_index < self.n_candidates:
            raise IndexOutOfRange(
                f"block index {block_index} outside 0..{self.n_candidates - 1}"
            )
        return self.blocks[:, block_index, :]


@dataclass
class ResponseSequence:
    """Per-chip correlation values at one lag, summed across pulses.

    ``values[k]`` is the product sum at chip position ``n_start + k``; chip
    positions whose shifted partner falls outside the code are omitted rather
    than zero-padded.
    """

    lag: int
    n_start: int
    values: np.ndarray


@dataclass
class VerificationReport:
    """Outcome of the exact complementarity check plus structural flags."""

    n_pulses: int
    n_chips: int
    peak: int
    max_off_peak: int
    is_complementary: bool
    zero_sum_ok: bool
    d_even: bool
    n_odd_d_mod4_ok: bool
    theorem_ok: bool
    first_failure: Optional[Tuple[int, int]] = None  # (lag, chip)

    @property
    def passed(self) -> bool:
        return (
            self.is_complementary
            and self.theorem_ok
            and self.d_even
            and self.n_odd_d_mod4_ok
        )


def golay_seed() -> Tuple[np.ndarray, np.ndarray]:
    """Return the canonical length-2 complementary seed pair."""
    return (
        np.array([1, 1], dtype=np.int8),
        np.array([1, -1], dtype=np.int8),
    )


def build_delta(s0: np.ndarray, s1: np.ndarray) -> CascadeStructure:
    """Arrange a complementary seed pair into the depth-0 block grid.

    The grid is [[s0, reverse(s1)], [s1, -reverse(s0)]]; both of its columns
    stack into orthogonal-row matrices whenever the seeds are orthogonal.

    Raises:
        NonOrthogonalSeed: if the seeds differ in length, contain entries
            other than +1/-1, or are not orthogonal.
    """
    s0 = np.asarray(s0, dtype=np.int64)
    s1 = np.asarray(s1, dtype=np.int64)
    if s0.ndim != 1 or s1.ndim != 1 or len(s0) != len(s1):
        raise NonOrthogonalSeed("seed sequences must be 1-D and equal length")
    if not (np.all(np.abs(s0) == 1) and np.all(np.abs(s1) == 1)):
        raise NonOrthogonalSeed("seed sequences must be +1/-1 valued")
    if int(np.dot(s0, s1)) != 0:
        raise NonOrthogonalSeed("seed sequences are not orthogonal")
    blocks = np.empty((2, 2, len(s0)), dtype=np.int8)
    blocks[0, 0] = s0
    blocks[0, 1] = s1[::-1]
    blocks[1, 0] = s1
    blocks[1, 1] = -s0[::-1]
    return CascadeStructure(blocks=blocks, depth=0)


def cascade(structure: CascadeStructure, iterations: int) -> CascadeStructure:
    """Grow the block grid by ``iterations`` concatenation steps.

    Each step doubles the grid in both directions and doubles every cell
    sequence: the new quadrants are [[BB, (-B)B], [(-B)B, BB]] where ``BB``
    concatenates each cell with itself and ``(-B)B`` prepends the negated
    copy.  Starting from the standard seed, ``r`` steps yield 2**(r+1)
    candidate matrices of size 2**(r+1) square.

    Raises:
        SizeOverflow: if the final sequence length would exceed
            ``MAX_CASCADE_SIZE``.
    """
    if iterations < 0:
        raise ValueError("iterations must be non-negative")
    final = structure.sequence_length << iterations
    if final > MAX_CASCADE_SIZE:
        raise SizeOverflow(
            f"cascade would reach length {final} > cap {MAX_CASCADE_SIZE}"
        )
    blocks = structure.blocks
    for _ in range(iterations):
        same = np.concatenate([blocks, blocks], axis=2)
        flipped = np.concatenate([-blocks, blocks], axis=2)
        top = np.concatenate([same, flipped], axis=1)
        bottom = np.concatenate([flipped, same], axis=1)
        blocks = np.concatenate([top, bottom], axis=0)
    return CascadeStructure(blocks=blocks, depth=structure.depth + iterations)


def select_codeset(
    structure: CascadeStructure,
    block_index: int = 0,
    column_indices: Optional[Iterable[int]] = None,
) -> BinaryCodeMatrix:
    """Pick one candidate matrix and keep a subset of its chip columns.

    Any column subset of a verified candidate stays complementary, so the
    default keeps all columns and callers trim to the length they need.

    Raises:
        IndexOutOfRange: block or column index outside the grid.
        DuplicateColumn: repeated entries in ``column_indices``.
        TheoremOneViolation: more columns requested than the candidate has
            pulses (cancellation is impossible past that point).
    """
    cand = structure.candidate(block_index)
    d, width = cand.shape
    if column_indices is None:
        cols = tuple(range(width))
    else:
        cols = tuple(int(c) for c in column_indices)
        if len(set(cols)) != len(cols):
            raise DuplicateColumn("column selection contains duplicates")
        for c in cols:
            if not 0 <= c < width:
                raise IndexOutOfRange(f"column {c} outside 0..{width - 1}")
    if len(cols) > d:
        raise TheoremOneViolation(
            f"{len(cols)} columns selected from a {d}-pulse candidate"
        )
    return BinaryCodeMatrix(
        codes=cand[:, cols], block_index=block_index, column_indices=cols
    )


def response_sequence(matrix: BinaryCodeMatrix, lag: int) -> ResponseSequence:
    """Chip-wise shifted products summed across pulses at one lag."""
    n = matrix.n_chips
    if not -n < lag < n:
        raise LagOutOfRange(f"lag {lag} has no overlap for length {n}")
    a = matrix.codes.astype(np.int64)
    n_start = max(0, -lag)
    n_stop = min(n, n - lag)
    vals = np.einsum("ij,ij->j", a[:, n_start + lag : n_stop + lag], a[:, n_start:n_stop])
    return ResponseSequence(lag=lag, n_start=n_start, values=vals.astype(np.int64))


def verify_wdc(matrix: BinaryCodeMatrix, strict: bool = False) -> VerificationReport:
    """Exact integer check that every nonzero lag cancels chip by chip.

    The per-chip product sum at lag m, chip n equals the Gram matrix entry
    (n+m, n), so the full lag test reduces to Gram == n_pulses * identity and
    runs in one integer matmul.

    Args:
        matrix: Code matrix to verify.
        strict: Raise ``TheoremOneViolation`` instead of only flagging when
            the code length exceeds the pulse count.
    """
    a = matrix.codes.astype(np.int64)
    d, n = matrix.n_pulses, matrix.n_chips
    theorem_ok = n <= d
    if strict and not theorem_ok:
        raise TheoremOneViolation(f"code length {n} exceeds pulse count {d}")
    gram = a.T @ a
    off = gram - d * np.eye(n, dtype=np.int64)
    max_off_peak = int(np.abs(off).max()) if n > 1 else 0
    is_comp = max_off_peak == 0
    first_failure = None
    if not is_comp:
        rows, cols = np.nonzero(off)
        # report as (lag, chip): entry (n+m, n) sits at row n+m, column n
        first_failure = (int(rows[0] - cols[0]), int(cols[0]))
    # summed response at each nonzero lag (diagonal sums of the Gram matrix)
    zero_sum_ok = all(
        int(np.trace(gram, offset=m)) == 0 for m in range(1, n)
    )
    return VerificationReport(
        n_pulses=d,
        n_chips=n,
        peak=d,
        max_off_peak=max_off_peak,
        is_complementary=is_comp,
        zero_sum_ok=zero_sum_ok,
        d_even=d % 2 == 0,
        n_odd_d_mod4_ok=(n % 2 == 0) or (d % 4 == 0),
        theorem_ok=theorem_ok,
        first_failure=first_failure,
    )


def sylvester_codeset(d: int, n_columns: Optional[int] = None) -> BinaryCodeMatrix:
    """Walsh-Hadamard matrix by the Sylvester doubling recursion.

    Cross-check construction: column-orthogonal by design, so any column
    subset passes the same verification gate as the cascade output.
    """
    if d < 1 or d & (d - 1):
        raise ValueError("Sylvester construction needs a power-of-two size")
    if d > MAX_CASCADE_SIZE:
        raise SizeOverflow(f"size {d} > cap {MAX_CASCADE_SIZE}")
    h = np.array([[1]], dtype=np.int8)
    core = np.array([[1, 1], [1, -1]], dtype=np.int8)
    while h.shape[0] < d:
        h = np.kron(h, core)
    n_columns = d if n_columns is None else int(n_columns)
    if not 1 <= n_columns <= d:
        raise TheoremOneViolation(f"column count {n_columns} outside 1..{d}")
    return BinaryCodeMatrix(codes=h[:, :n_columns])


def write_code_matrix(path, matrix: BinaryCodeMatrix) -> None:
    """Write the text form: a 'D N' header then one +/- row per pulse."""
    lines = [f"{matrix.n_pulses} {matrix.n_chips}"]
    for row in matrix.codes:
        lines.append("".join("+" if c > 0 else "-" for c in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_code_matrix(path) -> BinaryCodeMatrix:
    """Read the text form; rows may be +/- strings or 1/-1 tokens."""
    text = Path(path).read_text().strip().splitlines()
    if not text:
        raise ValueError("empty code matrix file")
    header = text[0].split()
    if len(header) != 2:
        raise ValueError("header must be 'D N'")
    d, n = int(header[0]), int(header[1])
    rows = []
    for line in text[1 : 1 + d]:
        line = line.strip()
        if any(ch in line for ch in " \t"):
            row = [int(tok) for tok in line.split()]
        else:
            row = [1 if ch == "+" else -1 for ch in line]
        if len(row) != n:
            raise ValueError(f"row length {len(row)} != header N {n}")
        rows.append(row)
    if len(rows) != d:
        raise ValueError(f"found {len(rows)} rows, header says {d}")
    return BinaryCodeMatrix(codes=np.array(rows, dtype=np.int8))
