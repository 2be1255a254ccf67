"""Exact linear algebra over the rationals (row reduction, kernels, PSD test)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

Matrix = list[list[Fraction]]


def to_fractions(rows: Sequence[Sequence]) -> Matrix:
    return [[Fraction(x) for x in row] for row in rows]


def rref(rows: Sequence[Sequence[Fraction]]) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form with first-nonzero pivoting; zero rows dropped."""
    a = to_fractions(rows)
    if not a:
        return [], []
    ncols = len(a[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(a)) if a[i][c] != 0), None)
        if pivot is None:
            continue
        a[r], a[pivot] = a[pivot], a[r]
        lead = a[r][c]
        a[r] = [x / lead for x in a[r]]
        for i in range(len(a)):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == len(a):
            break
    return a[:r], pivots


def rank(rows: Sequence[Sequence[Fraction]]) -> int:
    return len(rref(rows)[1])


def nullspace(rows: Sequence[Sequence[Fraction]], ncols: int | None = None) -> Matrix:
    """Basis of ``{x : A x = 0}``, one vector per free column (free entry 1)."""
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    r, pivots = rref(rows)
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, p in zip(r, pivots):
            v[p] = -row[f]
        basis.append(v)
    return basis


def mat_vec(a: Matrix, v: Sequence[Fraction]) -> list[Fraction]:
    return [sum((x * y for x, y in zip(row, v)), Fraction(0)) for row in a]


def quad(a: Sequence[Sequence[Fraction]], v: Sequence[Fraction]) -> Fraction:
    return sum((v[i] * a[i][j] * v[j] for i in range(len(v)) for j in range(len(v))), Fraction(0))


def is_symmetric(a: Sequence[Sequence]) -> bool:
    n = len(a)
    return all(len(row) == n for row in a) and all(a[i][j] == a[j][i] for i in range(n) for j in range(i))


@dataclass(frozen=True)
class PsdResult:
    """Outcome of :func:`psd_check_exact`.

    For a PSD matrix ``L`` (unit lower triangular) and ``D`` (nonnegative
    diagonal) satisfy ``M = L diag(D) L^T``.  Otherwise ``witness`` is a
    rational vector with ``witness^T M witness < 0``.
    """

    is_psd: bool
    L: Matrix | None = None
    D: list[Fraction] | None = None
    witness: list[Fraction] | None = None

    def __bool__(self) -> bool:
        return self.is_psd


def psd_check_exact(m: Sequence[Sequence]) -> PsdResult:
    """Decide positive semidefiniteness exactly by symmetric elimination.

    A zero pivot whose row is not zero, or a negative pivot, yields a witness.
    Elimination is tracked as ``E M E^T`` so witnesses map back by ``E^T``.
    """
    a = to_fractions(m)
    n = len(a)
    if not is_symmetric(a):
        raise ValueError("matrix is not symmetric")
    e = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    lower = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    diag: list[Fraction] = []

    def lift(y: list[Fraction]) -> list[Fraction]:
        return [sum((y[r] * e[r][c] for r in range(n)), Fraction(0)) for c in range(n)]

    for i in range(n):
        p = a[i][i]
        if p < 0:
            y = [Fraction(0)] * n
            y[i] = Fraction(1)
            return PsdResult(False, witness=lift(y))
        if p == 0:
            j = next((j for j in range(i + 1, n) if a[i][j] != 0), None)
            if j is not None:
                # (t e_i - e_j)^T S (t e_i - e_j) = S_jj - 2 t S_ij; smallest integer |t| that goes negative
                step = math.floor(a[j][j] / (2 * abs(a[i][j]))) + 1
                y = [Fraction(0)] * n
                y[j] = Fraction(-1)
                y[i] = Fraction(step if a[i][j] > 0 else -step)
                return PsdResult(False, witness=lift(y))
            diag.append(Fraction(0))
            continue
        diag.append(p)
        for j in range(i + 1, n):
            f = a[j][i] / p
            if f != 0:
                lower[j][i] = f
                e[j] = [x - f * y for x, y in zip(e[j], e[i])]
        for j in range(i + 1, n):
            if a[j][i] == 0:
                continue
            for c in range(i + 1, n):
                a[j][c] -= a[j][i] * a[i][c] / p
        for j in range(i + 1, n):
            a[i][j] = a[j][i] = Fraction(0)
    return PsdResult(True, L=lower, D=diag)
