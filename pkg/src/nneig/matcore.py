"""Dense-matrix primitives shared by the eigenpair solvers.

Everything here operates on plain float64 numpy arrays.  The two masked
projections and the minimal-norm direction encode the sign constraints used
by the nonnegative integrator: entries that are exactly zero in the current
iterate may only move in the nonnegative direction, entries that are
strictly positive are unconstrained.  Zero patterns are therefore always
tested with an exact ``== 0`` comparison; the solvers produce exact zeros by
clamping, so no tolerance is involved.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "StationaryDirectionError",
    "FactorPair",
    "as_matrix",
    "frobenius_inner",
    "zero_pattern",
    "project_zero_pattern",
    "project_feasible_direction",
    "min_norm_direction",
    "thin_qr",
]


class StationaryDirectionError(ValueError):
    """No feasible direction exists: the anchor vector vanishes off-pattern.

    Raised by :func:`min_norm_direction` when every entry of the anchor that
    is allowed to move is zero.  Callers should treat the corresponding
    factor as stationary.
    """


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate and convert ``a`` to a 2-D float64 array.

    Parameters
    ----------
    a : array_like
        Input data, anything ``np.asarray`` accepts.
    name : str
        Label used in error messages.

    Returns
    -------
    numpy.ndarray
        A 2-D float64 array.  A copy is made only when conversion requires
        it.

    Raises
    ------
    ValueError
        If the input is not 2-dimensional or contains NaN/Inf entries.
    """
    M = np.asarray(a, dtype=float)
    if M.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got ndim={M.ndim}")
    if not np.all(np.isfinite(M)):
        raise ValueError(f"{name} contains non-finite entries")
    return M


def frobenius_inner(A: np.ndarray, B: np.ndarray) -> float:
    """Frobenius inner product ``<A, B> = sum_ij A_ij B_ij``.

    Parameters
    ----------
    A, B : numpy.ndarray
        Matrices of identical shape.

    Returns
    -------
    float
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape != B.shape:
        raise ValueError(f"shape mismatch: {A.shape} vs {B.shape}")
    return float(np.sum(A * B))


def zero_pattern(W: np.ndarray) -> np.ndarray:
    """Boolean mask of the entries of ``W`` that are exactly zero."""
    return np.asarray(W) == 0


def project_zero_pattern(W: np.ndarray, Z: np.ndarray) -> np.ndarray:
    """Restrict ``Z`` to the zero pattern of the nonnegative matrix ``W``.

    Returns the matrix that agrees with ``Z`` wherever ``W`` is exactly zero
    and vanishes elsewhere.

    Parameters
    ----------
    W : numpy.ndarray
        Nonnegative matrix carrying the pattern.  Negative entries are
        rejected.
    Z : numpy.ndarray
        Matrix to project, same shape as ``W``.

    Returns
    -------
    numpy.ndarray
    """
    W = np.asarray(W, dtype=float)
    Z = np.asarray(Z, dtype=float)
    if W.shape != Z.shape:
        raise ValueError(f"shape mismatch: {W.shape} vs {Z.shape}")
    if np.any(W < 0):
        raise ValueError("pattern matrix must be entrywise nonnegative")
    return np.where(W == 0, Z, 0.0)


def project_feasible_direction(W: np.ndarray, Z: np.ndarray) -> np.ndarray:
    """Project a direction ``Z`` onto the directions feasible at ``W >= 0``.

    Entries where ``W`` is strictly positive pass through unchanged; entries
    where ``W`` is exactly zero are clipped to be nonnegative, so that a
    small step along the result never leaves the nonnegative orthant through
    an entry that is already at the boundary.

    Parameters
    ----------
    W : numpy.ndarray
        Nonnegative base point.
    Z : numpy.ndarray
        Direction to project, same shape as ``W``.

    Returns
    -------
    numpy.ndarray
    """
    W = np.asarray(W, dtype=float)
    Z = np.asarray(Z, dtype=float)
    if W.shape != Z.shape:
        raise ValueError(f"shape mismatch: {W.shape} vs {Z.shape}")
    if np.any(W < 0):
        raise ValueError("base point must be entrywise nonnegative")
    return np.where(W > 0, Z, np.maximum(Z, 0.0))


def min_norm_direction(a: np.ndarray, zero_idx) -> np.ndarray:
    """Minimal-norm vector with unit inner product against ``a`` and a
    prescribed zero set.

    Solves ``min ||x||_2`` subject to ``<a, x> = 1`` and ``x_i = 0`` for
    ``i`` in ``zero_idx``.  The solution is the restriction of ``a`` to the
    free indices, rescaled so the inner-product constraint holds::

        x* = P(a) / <a, P(a)>

    where ``P`` zeroes the entries listed in ``zero_idx``.

    Parameters
    ----------
    a : numpy.ndarray
        1-D anchor vector.
    zero_idx : array_like
        Either a boolean mask of the same length as ``a`` or an integer
        index collection; marks entries constrained to zero.

    Returns
    -------
    numpy.ndarray
        The minimizer.

    Raises
    ------
    StationaryDirectionError
        If ``a`` vanishes on every free index, so no feasible ``x`` exists.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 1:
        raise ValueError("anchor must be 1-D")
    mask = np.asarray(zero_idx)
    if mask.dtype != bool:
        idx = np.asarray(zero_idx, dtype=int)
        mask = np.zeros(a.shape, dtype=bool)
        mask[idx] = True
    if mask.shape != a.shape:
        raise ValueError("zero mask shape does not match anchor")
    b = np.where(mask, 0.0, a)
    denom = float(np.dot(a, b))  # equals ||b||^2
    if denom == 0.0:
        raise StationaryDirectionError(
            "anchor vanishes on all free indices; no feasible direction"
        )
    return b / denom


def thin_qr(M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Thin QR factorization with a nonnegative-diagonal sign convention.

    Wraps the LAPACK Householder factorization and flips column signs so
    that ``diag(R) >= 0``, which makes the factorization unique for
    full-rank input and deterministic in the rank-deficient case.

    Parameters
    ----------
    M : numpy.ndarray
        Matrix of shape ``(m, k)`` with ``m >= k``.

    Returns
    -------
    (Q, R) : tuple of numpy.ndarray
        ``Q`` has orthonormal columns (shape ``(m, k)``), ``R`` is upper
        triangular (shape ``(k, k)``) with nonnegative diagonal, and
        ``Q @ R`` reconstructs ``M``.
    """
    M = as_matrix(M, "QR input")
    m, k = M.shape
    if m < k:
        raise ValueError(f"thin QR requires m >= k, got shape {M.shape}")
    Q, R = np.linalg.qr(M, mode="reduced")
    d = np.sign(np.diag(R))
    d[d == 0] = 1.0
    return Q * d, d[:, None] * R


@dataclass
class FactorPair:
    """Nonnegative low-rank parametrization ``X = U @ V.T``.

    Attributes
    ----------
    U : numpy.ndarray
        Left factor, shape ``(m, r)``, entrywise nonnegative.
    V : numpy.ndarray
        Right factor, shape ``(n, r)``, entrywise nonnegative.
    """

    U: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        self.U = as_matrix(self.U, "U")
        self.V = as_matrix(self.V, "V")
        if self.U.shape[1] != self.V.shape[1]:
            raise ValueError(
                f"factor rank mismatch: U has {self.U.shape[1]} columns, "
                f"V has {self.V.shape[1]}"
            )
        if self.U.shape[1] < 1:
            raise ValueError("factors must have at least one column")
        if np.any(self.U < 0) or np.any(self.V < 0):
            raise ValueError("factors must be entrywise nonnegative")

    @property
    def rank_bound(self) -> int:
        """Number of factor columns (an upper bound on rank(X))."""
        return self.U.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return (self.U.shape[0], self.V.shape[0])

    def product(self) -> np.ndarray:
        """The represented matrix ``U @ V.T``."""
        return self.U @ self.V.T

    def product_norm(self) -> float:
        """Frobenius norm of ``U @ V.T`` computed through the Gram matrices."""
        g = float(np.sum((self.U.T @ self.U) * (self.V.T @ self.V)))
        return float(np.sqrt(max(g, 0.0)))
