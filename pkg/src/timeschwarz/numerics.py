"""Dense and banded LU solvers and a cyclic Jacobi symmetric eigensolver.

Everything here works on plain numpy arrays. The banded solver keeps its
storage within ``bl + bu`` fill so the all-at-once time systems (thousands of
unknowns, narrow band) can be factored without ever forming a dense matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIVOT_RTOL = 1e-14
JACOBI_RTOL = 1e-12
JACOBI_MAX_SWEEPS = 100


class SingularMatrixError(np.linalg.LinAlgError):
    """Raised when a pivot vanishes to working precision."""


def _row_scale(M: np.ndarray) -> np.ndarray:
    return np.max(np.abs(M), axis=1)


def lu_solve(M, b) -> np.ndarray:
    """Solve ``M x = b`` by Gaussian elimination with partial pivoting.

    A pivot smaller than ``1e-14`` times the largest entry of its (original)
    row raises :class:`SingularMatrixError`.
    """
    a = np.array(M, dtype=float)
    x = np.array(b, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got shape {a.shape}")
    n = a.shape[0]
    if x.shape[0] != n:
        raise ValueError(f"rhs has length {x.shape[0]}, expected {n}")
    scale = _row_scale(a)
    for k in range(n):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if abs(a[p, k]) < PIVOT_RTOL * scale[p] or scale[p] == 0.0:
            raise SingularMatrixError(f"zero pivot in column {k}")
        if p != k:
            a[[k, p]] = a[[p, k]]
            x[[k, p]] = x[[p, k]]
            scale[[k, p]] = scale[[p, k]]
        l = a[k + 1:, k] / a[k, k]
        a[k + 1:, k:] -= np.outer(l, a[k, k:])
        x[k + 1:] -= np.multiply.outer(l, x[k])
    for k in range(n - 1, -1, -1):
        x[k] = (x[k] - a[k, k + 1:] @ x[k + 1:]) / a[k, k]
    return x


@dataclass
class BandedMatrix:
    """Square matrix with ``bl`` sub- and ``bu`` super-diagonals.

    ``band[i, j - i + bl]`` holds entry ``(i, j)``; everything outside the band
    is zero.
    """

    dim: int
    bl: int
    bu: int
    band: np.ndarray

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if self.dim > 1 and not (0 <= self.bl < self.dim and 0 <= self.bu < self.dim):
            raise ValueError("bandwidths must lie in [0, dim)")
        if self.band.shape != (self.dim, self.bl + self.bu + 1):
            raise ValueError(f"band storage has shape {self.band.shape}")

    @classmethod
    def zeros(cls, dim: int, bl: int, bu: int) -> BandedMatrix:
        return cls(dim, bl, bu, np.zeros((dim, bl + bu + 1)))

    @classmethod
    def from_dense(cls, M, bl: int | None = None, bu: int | None = None) -> BandedMatrix:
        M = np.asarray(M, dtype=float)
        n = M.shape[0]
        rows, cols = np.nonzero(M)
        if bl is None:
            bl = int(max(0, (rows - cols).max(initial=0)))
        if bu is None:
            bu = int(max(0, (cols - rows).max(initial=0)))
        out = cls.zeros(n, bl, bu)
        for i in range(n):
            lo, hi = max(0, i - bl), min(n, i + bu + 1)
            out.band[i, lo - i + bl:hi - i + bl] = M[i, lo:hi]
        offset = np.subtract.outer(np.arange(n), np.arange(n))
        if np.any(M[(offset > bl) | (-offset > bu)]):
            raise ValueError("matrix has entries outside the requested band")
        return out

    def to_dense(self) -> np.ndarray:
        n = self.dim
        M = np.zeros((n, n))
        for i in range(n):
            lo, hi = max(0, i - self.bl), min(n, i + self.bu + 1)
            M[i, lo:hi] = self.band[i, lo - i + self.bl:hi - i + self.bl]
        return M

    def matvec(self, x, dtype=float) -> np.ndarray:
        x = np.asarray(x, dtype=dtype)
        n, bl = self.dim, self.bl
        # pad x so every stored band slot maps to a valid (possibly zero) entry
        pad = np.concatenate([np.zeros((bl,) + x.shape[1:]), x,
                              np.zeros((self.bu,) + x.shape[1:])])
        idx = np.arange(n)[:, None] + np.arange(self.bl + self.bu + 1)[None, :]
        return np.einsum("ij,ij...->i...", self.band.astype(dtype), pad[idx])

    def norm_inf(self) -> float:
        return float(np.abs(self.band).sum(axis=1).max())

    def max_abs(self) -> float:
        return float(np.abs(self.band).max())


class BandedLU:
    """Partial-pivoting LU of a :class:`BandedMatrix`.

    Rows are stored with width ``2*bl + bu + 1`` so the row interchanges of
    partial pivoting fit without leaving band storage. The factorization is
    reusable across right-hand sides.
    """

    def __init__(self, M: BandedMatrix):
        n, bl, bu = M.dim, M.bl, M.bu
        width = 2 * bl + bu + 1
        w = np.zeros((n, width))
        w[:, :bl + bu + 1] = M.band
        scale = np.abs(M.band).max(axis=1)
        mult = np.zeros((n, bl))
        piv = np.arange(n)
        for k in range(n):
            r_end = min(k + bl + 1, n)
            c_end = min(k + bl + bu + 1, n)
            rows = np.arange(k, r_end)
            col = w[rows, k - rows + bl]
            p = k + int(np.argmax(np.abs(col)))
            if scale[p] == 0.0 or abs(col[p - k]) < PIVOT_RTOL * scale[p]:
                raise SingularMatrixError(f"zero pivot in column {k}")
            cols = np.arange(k, c_end)
            if p != k:
                tk = w[k, cols - k + bl].copy()
                w[k, cols - k + bl] = w[p, cols - p + bl]
                w[p, cols - p + bl] = tk
                scale[[k, p]] = scale[[p, k]]
                piv[k] = p
            if r_end > k + 1:
                below = rows[1:]
                l = w[below, k - below + bl] / w[k, bl]
                idx = cols[None, :] - below[:, None] + bl
                w[below[:, None], idx] -= np.outer(l, w[k, cols - k + bl])
                mult[k, :len(l)] = l
        self.dim, self.bl, self.bu = n, bl, bu
        self._w, self._mult, self._piv = w, mult, piv

    def solve(self, b) -> np.ndarray:
        n, bl, bu = self.dim, self.bl, self.bu
        x = np.array(b, dtype=float)
        if x.shape[0] != n:
            raise ValueError(f"rhs has length {x.shape[0]}, expected {n}")
        w, mult, piv = self._w, self._mult, self._piv
        for k in range(n):
            p = piv[k]
            if p != k:
                x[[k, p]] = x[[p, k]]
            r_end = min(k + bl + 1, n)
            if r_end > k + 1:
                x[k + 1:r_end] -= np.multiply.outer(mult[k, :r_end - k - 1], x[k])
        reach = bl + bu
        for k in range(n - 1, -1, -1):
            c_end = min(k + reach + 1, n)
            x[k] = (x[k] - w[k, bl + 1:bl + c_end - k] @ x[k + 1:c_end]) / w[k, bl]
        return x


def banded_solve(M: BandedMatrix, b) -> np.ndarray:
    return BandedLU(M).solve(b)


@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    """Orthogonal diagonalization ``A = P diag(eigenvalues) P^T``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        P = self.eigenvectors
        return (P * self.eigenvalues) @ P.T


def sym_eigen(A) -> EigenDecomposition:
    """Cyclic Jacobi eigensolver for a symmetric matrix.

    Sweeps over all off-diagonal pairs until the off-diagonal Frobenius norm
    drops below ``1e-12 * ||A||_F`` (at most 100 sweeps). Eigenvalues are
    returned in ascending order with matching eigenvector columns.
    """
    a = np.array(A, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got shape {a.shape}")
    amax = np.abs(a).max(initial=0.0)
    if np.abs(a - a.T).max(initial=0.0) > 1e-12 * amax:
        raise ValueError("matrix is not symmetric")
    a = 0.5 * (a + a.T)
    n = a.shape[0]
    P = np.eye(n)
    target = JACOBI_RTOL * np.linalg.norm(a)

    def off_norm():
        return np.linalg.norm(a - np.diag(np.diag(a)))

    for _ in range(JACOBI_MAX_SWEEPS):
        if off_norm() <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                phi = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(phi) / (abs(phi) + np.sqrt(phi * phi + 1.0)) if phi != 0 else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ap, aq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap, aq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp, vq = P[:, p].copy(), P[:, q].copy()
                P[:, p] = c * vp - s * vq
                P[:, q] = s * vp + c * vq
    else:
        if off_norm() > target:
            raise np.linalg.LinAlgError("Jacobi iteration did not converge")
    d = np.diag(a).copy()
    order = np.argsort(d, kind="stable")
    return EigenDecomposition(d[order], P[:, order])
