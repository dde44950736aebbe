"""Pure numpy versions of the hot kernels in ``_kernels.pyx``."""

import numpy as np

_CHUNK = 1 << 22


def weighted_sq_dists(A, B, w):
    """``D[i, j] = sum_k w_k (A[i, k] - B[j, k])**2``.

    Differences are formed explicitly (in row blocks) rather than through the
    ``|a|^2 + |b|^2 - 2ab`` expansion so identical rows give exactly zero.
    """
    A = np.ascontiguousarray(A, dtype=np.float64)
    B = np.ascontiguousarray(B, dtype=np.float64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    n, m, d = A.shape[0], B.shape[0], A.shape[1]
    out = np.empty((n, m))
    step = max(1, _CHUNK // max(1, m * d))
    for s in range(0, n, step):
        diff = A[s:s + step, None, :] - B[None, :, :]
        np.einsum("ijk,ijk,k->ij", diff, diff, w, out=out[s:s + step])
    return out


def u_statistic(Kxx, Kyy, Kxy):
    n = Kxx.shape[0]
    total = (
        Kxx.sum() - np.trace(Kxx)
        + Kyy.sum() - np.trace(Kyy)
        - 2.0 * (Kxy.sum() - np.trace(Kxy))
    )
    return float(total / (n * (n - 1)))


def permuted_u_statistics(K, perms):
    """U-statistic for each row of ``perms`` over the pooled Gram ``K``.

    Row ``p`` labels ``p[:n]`` as the first sample and ``p[n:]`` as the
    second, pairing ``p[i]`` with ``p[n + i]``.
    """
    K = np.asarray(K, dtype=np.float64)
    perms = np.asarray(perms, dtype=np.intp)
    n = perms.shape[1] // 2
    out = np.empty(perms.shape[0])
    for r, p in enumerate(perms):
        Kp = K[np.ix_(p, p)]
        out[r] = u_statistic(Kp[:n, :n], Kp[n:, n:], Kp[:n, n:])
    return out
