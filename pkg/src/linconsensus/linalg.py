"""Dense symmetric eigensolver.

Householder reduction to tridiagonal form followed by the implicit QL
iteration with Wilkinson-style shifts (the classic EISPACK ``tred2``/``tql2``
pair, reorganised so the O(n^3) work is done by numpy row operations).
Intended for the few-hundred-row matrices that appear in this package.
"""

import math

import numpy as np

from .errors import InvalidMatrixError

_MAX_QL_ITER = 60


def _tridiagonalize(a, want_vectors):
    a = np.array(a, dtype=float, copy=True)
    n = a.shape[0]
    q = np.eye(n) if want_vectors else None
    for k in range(n - 2):
        x = a[k + 1:, k]
        tail = np.linalg.norm(x[1:])
        if tail == 0.0:
            continue
        norm_x = math.hypot(x[0], tail)
        alpha = -norm_x if x[0] >= 0 else norm_x
        v = x.copy()
        v[0] -= alpha
        v /= np.linalg.norm(v)
        # A <- H A H with H = I - 2 v v^T acting on indices k+1..n-1
        a[k + 1:, :] -= 2.0 * np.outer(v, v @ a[k + 1:, :])
        a[:, k + 1:] -= 2.0 * np.outer(a[:, k + 1:] @ v, v)
        if q is not None:
            q[:, k + 1:] -= 2.0 * np.outer(q[:, k + 1:] @ v, v)
    d = np.diag(a).copy()
    e = np.zeros(n)
    if n > 1:
        e[:-1] = np.diag(a, -1)
    return d, e, q


def _tql(d, e, zt):
    """Implicit QL on the tridiagonal (d, e); rotations applied to rows of zt."""
    n = d.shape[0]
    eps = np.finfo(float).eps
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > _MAX_QL_ITER:
                raise InvalidMatrixError("QL iteration failed to converge")
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            underflow = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                if zt is not None:
                    f_row = zt[i + 1].copy()
                    zt[i + 1] = s * zt[i] + c * f_row
                    zt[i] = c * zt[i] - s * f_row
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return d


def symmetric_eig(a, vectors=True, symmetry_tol=1e-12):
    """Eigen-decompose a real symmetric matrix.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues sorted in
    descending order and eigenvectors as orthonormal columns (``None`` when
    ``vectors`` is false).
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidMatrixError(f"expected a square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if a.size and np.max(np.abs(a - a.T)) > symmetry_tol * scale:
        raise InvalidMatrixError("matrix is not symmetric")
    n = a.shape[0]
    if n == 0:
        return np.zeros(0), (np.zeros((0, 0)) if vectors else None)
    d, e, q = _tridiagonalize(a, vectors)
    zt = np.ascontiguousarray(q.T) if vectors else None
    vals = _tql(d, e, zt)
    order = np.argsort(-vals, kind="stable")
    vals = vals[order]
    if not vectors:
        return vals, None
    return vals, zt[order].T.copy()
