"""Pure numpy versions of the compiled kernels in ``_ckernels.pyx``."""
import numpy as np


def permanent(a):
    """Permanent of a square complex matrix (Glynn formula, Gray-code order)."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("permanent requires a square matrix")
    n = m.shape[0]
    if n == 0:
        return 1.0 + 0.0j

    colsum = m.sum(axis=0)
    delta = np.ones(n, dtype=np.int8)
    total = complex(np.prod(colsum))
    sign = 1.0
    count = 1 << (n - 1)
    for k in range(1, count):
        # trailing zeros of k select the flipped row; row 0 is never flipped
        i = (k & -k).bit_length()
        delta[i] = -delta[i]
        colsum += (2.0 * delta[i]) * m[i]
        sign = -sign
        total += sign * complex(np.prod(colsum))
    return total / count


def ket_permanents(u, cols, outputs):
    u = np.asarray(u, dtype=np.complex128)
    cols = np.asarray(cols, dtype=np.int64)
    outputs = np.asarray(outputs, dtype=np.int64)
    n = cols.shape[0]
    sub_cols = u[:, cols]
    levels = np.arange(outputs.shape[1])
    res = np.empty(outputs.shape[0], dtype=np.complex128)
    for o, occ in enumerate(outputs):
        if occ.sum() != n:
            res[o] = 0.0
            continue
        rows = np.repeat(levels, occ)
        res[o] = permanent(sub_cols[rows]) if n else 1.0
    return res
