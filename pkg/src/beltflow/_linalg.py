"""Exact dense linear solver used by the circulation and LP layers.

Everything is exact rational arithmetic.  When gmpy2 is importable its mpq
type is used inside the elimination loop (same exact semantics, much faster
on big denominators); the public interface speaks fractions.Fraction either
way.
"""

from fractions import Fraction

try:
    from gmpy2 import mpq as _fast_q
except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
    _fast_q = Fraction


class SingularMatrix(Exception):
    pass


def solve_square(matrix, rhs):
    """Solve matrix * x = rhs exactly (n x n, lists of Fractions).

    Gaussian elimination; in each column the pivot is the first remaining row
    with a nonzero entry (with exact arithmetic any nonzero pivot is equally
    good, and "first" keeps runs deterministic — rows are passed in vertex-id
    order by the callers).  Raises SingularMatrix when no pivot exists.
    """
    n = len(matrix)
    a = [[_fast_q(x) for x in row] + [_fast_q(rhs[i])] for i, row in enumerate(matrix)]
    for col in range(n):
        pivot = None
        for row in range(col, n):
            if a[row][col] != 0:
                pivot = row
                break
        if pivot is None:
            raise SingularMatrix("no pivot in column %d" % (col,))
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
        prow = a[col]
        inv = 1 / prow[col]
        for j in range(col, n + 1):
            prow[j] = prow[j] * inv
        for row in range(n):
            if row == col:
                continue
            factor = a[row][col]
            if factor != 0:
                arow = a[row]
                for j in range(col, n + 1):
                    arow[j] = arow[j] - factor * prow[j]
    return [Fraction(int(a[i][n].numerator), int(a[i][n].denominator)) for i in range(n)]
