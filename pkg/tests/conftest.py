import itertools

import numpy as np


def cofactor_det_mod(mat, p: int) -> int:
    """Brute-force determinant mod p by recursive cofactor expansion.

    Independent of the elimination-based determinant in the package; only
    usable for small matrices (factorial cost).
    """
    a = np.asarray(mat, dtype=np.int64) % p
    n = a.shape[0]
    if n == 1:
        return int(a[0, 0]) % p
    total = 0
    sign = 1
    for j in range(n):
        minor = np.delete(np.delete(a, 0, axis=0), j, axis=1)
        total += sign * int(a[0, j]) * cofactor_det_mod(minor, p)
        sign = -sign
    return total % p


def all_sign_matrices_k3():
    """All 64 valid 3x3 sign matrices (zero diagonal, +-1 elsewhere)."""
    pos = [(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)]
    for bits in itertools.product((1, -1), repeat=6):
        lam = [[0, 0, 0], [0, 0, 0], [0, 0, 0]]
        for (r, c), s in zip(pos, bits):
            lam[r][c] = s
        yield tuple(tuple(row) for row in lam)
