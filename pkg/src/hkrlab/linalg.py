"""Exact linear algebra over Q and Q(i)."""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Sequence

from .algebra import Scalar


def _integer_rows(rows: Sequence[Sequence[Fraction]]) -> list[list[int]]:
    out = []
    for row in rows:
        den = 1
        for x in row:
            den = lcm(den, Fraction(x).denominator)
        out.append([int(Fraction(x) * den) for x in row])
    return out


def bareiss_rank(rows: Sequence[Sequence[Fraction]]) -> int:
    """Rank by fraction-free elimination on the integer-scaled matrix."""
    A = _integer_rows(rows)
    if not A:
        return 0
    nrows, ncols = len(A), len(A[0])
    rank = 0
    prev = 1
    for col in range(ncols):
        pivot = next((r for r in range(rank, nrows) if A[r][col]), None)
        if pivot is None:
            continue
        A[rank], A[pivot] = A[pivot], A[rank]
        p = A[rank][col]
        for r in range(rank + 1, nrows):
            a = A[r][col]
            row_r, row_p = A[r], A[rank]
            for c in range(col, ncols):
                row_r[c] = (p * row_r[c] - a * row_p[c]) // prev
        prev = p
        rank += 1
        if rank == nrows:
            break
    return rank


def _is_zero(x) -> bool:
    return not x


def rref(rows: Sequence[Sequence], one=Fraction(1)) -> tuple[list[list], list[int]]:
    """Reduced row echelon form over a field; returns (matrix, pivot columns)."""
    A = [list(r) for r in rows]
    if not A:
        return A, []
    nrows, ncols = len(A), len(A[0])
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, nrows) if not _is_zero(A[i][c])), None)
        if pivot is None:
            continue
        A[r], A[pivot] = A[pivot], A[r]
        inv = one / A[r][c]
        A[r] = [x * inv for x in A[r]]
        for i in range(nrows):
            if i != r and not _is_zero(A[i][c]):
                f = A[i][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return A[:r], pivots


def rank(rows: Sequence[Sequence]) -> int:
    """Rank, fraction-free when entries are rational and by field elimination otherwise."""
    if not rows or not rows[0]:
        return 0
    flat = [x for row in rows for x in row]
    if all(isinstance(x, (int, Fraction)) or (isinstance(x, Scalar) and x.is_real) for x in flat):
        conv = [[x.re if isinstance(x, Scalar) else Fraction(x) for x in row] for row in rows]
        return bareiss_rank(conv)
    conv = [[Scalar.coerce(x) for x in row] for row in rows]
    return len(rref(conv, Scalar(1))[1])


def nullspace(rows: Sequence[Sequence[Fraction]], ncols: int) -> list[list[Fraction]]:
    """Basis of {x : A x = 0} over Q."""
    R, pivots = rref([[Fraction(x) for x in row] for row in rows]) if rows else ([], [])
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, p in zip(R, pivots):
            v[p] = -row[f]
        basis.append(v)
    return basis


def complement_basis(span: Sequence[Sequence[Fraction]], vectors: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    """Vectors from ``vectors`` extending ``span`` to a basis of span + vectors."""
    chosen = []
    current = [list(v) for v in span]
    r = rank(current) if current else 0
    for v in vectors:
        trial = current + [list(v)]
        rt = rank(trial)
        if rt > r:
            chosen.append(list(v))
            current, r = trial, rt
    return chosen


def inverse(matrix: Sequence[Sequence]) -> list[list[Scalar]]:
    """Inverse of a square matrix of Scalars by Gauss-Jordan."""
    n = len(matrix)
    aug = [
        [Scalar.coerce(x) for x in row] + [Scalar(1 if i == j else 0) for j in range(n)]
        for i, row in enumerate(matrix)
    ]
    R, pivots = rref(aug, Scalar(1))
    if pivots[:n] != list(range(n)) or len(R) < n:
        raise ValueError("matrix is singular")
    return [row[n:] for row in R]
