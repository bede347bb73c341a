"""Small shared helpers: exact-rational JSON encoding and misc formatting."""

from __future__ import annotations

import json
from fractions import Fraction


class PrecondError(ValueError):
    """Input violates a documented precondition (CLI exit code 3)."""


class ComputeError(RuntimeError):
    """A computation failed to reach its goal (CLI exit code 1)."""


# -- exact rational linear algebra -------------------------------------------


def rref(rows: list[list[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over Fraction; returns (rows, pivot columns)."""
    rows = [list(r) for r in rows]
    pivots = []
    r = 0
    ncols = len(rows[0]) if rows else 0
    for col in range(ncols):
        piv = next((k for k in range(r, len(rows)) if rows[k][col] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = Fraction(1) / rows[r][col]
        rows[r] = [x * inv for x in rows[r]]
        for k in range(len(rows)):
            if k != r and rows[k][col] != 0:
                f = rows[k][col]
                rows[k] = [a - f * b for a, b in zip(rows[k], rows[r])]
        pivots.append(col)
        r += 1
    return rows, pivots


def exact_rank(rows: list[list[Fraction]]) -> int:
    if not rows:
        return 0
    return len(rref(rows)[1])


def invert_exact(A: list[list[Fraction]]) -> list[list[Fraction]] | None:
    """Exact inverse of a square rational matrix, or None if singular."""
    n = len(A)
    aug = [[Fraction(A[i][j]) for j in range(n)] +
           [Fraction(1 if j == i else 0) for j in range(n)] for i in range(n)]
    red, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        return None
    return [row[n:] for row in red[:n]]


def solve_exact(A: list[list[Fraction]], b: list[Fraction]) -> list[Fraction] | None:
    """One solution of A x = b over Fraction (free variables zero), or None."""
    if not A:
        return [] if all(x == 0 for x in b) else None
    aug = [list(row) + [bv] for row, bv in zip(A, b)]
    red, pivots = rref(aug)
    ncols = len(A[0])
    for row in red:
        if all(x == 0 for x in row[:-1]) and row[-1] != 0:
            return None
    x = [Fraction(0)] * ncols
    for i, col in enumerate(pivots):
        if col == ncols:
            return None  # pivot in the augmented column: inconsistent
        x[col] = red[i][-1]
    return x


def frac_str(x: Fraction) -> str:
    """Render a Fraction as 'p' or 'p/q'."""
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def parse_frac(s: str) -> Fraction:
    return Fraction(s)


def jsonable(obj):
    """Recursively convert Fractions (and complex) into JSON-safe values.

    Fractions become 'p/q' strings so round trips stay exact; complex
    numbers become [re, im] pairs; dict keys are stringified.
    """
    if isinstance(obj, Fraction):
        return frac_str(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    return obj


def dump_json(obj, path) -> None:
    with open(path, "w") as fh:
        json.dump(jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")
