"""Matrix-valued linear operators and their factored evaluations.

Three operator families are provided:

* :class:`MarkovGridOperator` -- weighted sums of two-sided transition maps
  ``X -> sum_p w_p A_p^T X B_p`` built from row-stochastic (or more generally
  nonnegative) matrix pairs;
* :class:`HadamardGrowthOperator` -- diffusion plus an entrywise growth rate,
  ``X -> eps (A X + X A^T) + eps_r (R o X)``;
* :class:`SeparableGrowthOperator` -- diffusion plus a separable growth rate,
  ``X -> eps (A X + X A^T) + r0 X + eps_r diag(phi) X diag(psi)``.

Each operator evaluates either on a dense matrix (``apply_full``) or directly
on a low-rank factor pair (``apply_factored``), where the input product
``U @ V.T`` is never formed except for the entrywise growth term, which has
no factored shortcut.
"""

from __future__ import annotations

import json

import numpy as np

from .matcore import as_matrix, frobenius_inner

__all__ = [
    "LinearMatrixOperator",
    "MarkovGridOperator",
    "HadamardGrowthOperator",
    "SeparableGrowthOperator",
    "neumann_laplacian",
    "grid_points",
    "rayleigh_value",
    "flow_field",
    "vectorize_operator",
    "operator_to_dict",
    "operator_from_dict",
    "save_operator",
    "load_operator",
]


class LinearMatrixOperator:
    """Common interface for the operator families.

    Subclasses set ``shape`` (the shape of matrices the operator acts on)
    and the two structural flags, which are declared from the construction
    parameters rather than detected numerically:

    * ``preserves_nonnegativity`` -- maps entrywise-nonnegative matrices to
      entrywise-nonnegative matrices;
    * ``is_metzler`` -- the similarly-vectorized operator matrix has
      nonnegative off-diagonal entries, so the induced flow keeps the
      nonnegative orthant invariant even when the operator itself does not.
    """

    shape: tuple[int, int]
    preserves_nonnegativity: bool
    is_metzler: bool
    kind: str

    def apply_full(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def apply_factored(self, U: np.ndarray, V: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def default_step(self) -> float:
        """Default integrator step size for this operator family."""
        raise NotImplementedError

    def default_shift(self) -> float:
        """Spectral shift making ``A + shift*I`` nonnegativity-preserving."""
        raise NotImplementedError


class MarkovGridOperator(LinearMatrixOperator):
    """Weighted sum of two-sided transition maps.

    The action on an ``m x n`` matrix is ``sum_p w_p A_p^T X B_p`` with
    ``A_p`` of size ``m x m`` and ``B_p`` of size ``n x n``.  When every
    ``A_p``/``B_p`` is row stochastic and the weights lie on the unit
    simplex, the operator conserves total mass ``sum_ij X_ij`` and its
    rightmost eigenvalue is 1.  The constructor only enforces structural
    validity (shapes, finiteness); probabilistic validity is checked
    separately by :func:`nneig.markovgrid.validate_grid` so that defective
    grids can still be constructed and reported on.

    Parameters
    ----------
    terms : sequence of (weight, A, B) triples
    """

    kind = "markov-grid"

    def __init__(self, terms):
        if not terms:
            raise ValueError("at least one term is required")
        parsed = []
        m = n = None
        for k, (w, A, B) in enumerate(terms):
            A = as_matrix(A, f"term {k}: A")
            B = as_matrix(B, f"term {k}: B")
            if A.shape[0] != A.shape[1] or B.shape[0] != B.shape[1]:
                raise ValueError(f"term {k}: factors must be square")
            if m is None:
                m, n = A.shape[0], B.shape[0]
            elif A.shape[0] != m or B.shape[0] != n:
                raise ValueError(f"term {k}: inconsistent sizes")
            w = float(w)
            if not np.isfinite(w):
                raise ValueError(f"term {k}: non-finite weight")
            parsed.append((w, A, B))
        self.terms = parsed
        self.shape = (m, n)
        nonneg = all(
            w >= 0 and np.all(A >= 0) and np.all(B >= 0) for w, A, B in parsed
        )
        self.preserves_nonnegativity = nonneg
        self.is_metzler = nonneg
        self._split_terms()

    def _split_terms(self) -> None:
        # Evaluation plan.  A term with dense factors runs as two GEMMs on
        # the stacked blocks; a term whose pair is sparse enough (block
        # grids carry one near-empty term per block) is folded into a
        # single sparse Kronecker matrix applied to the vectorized input.
        # The cutoff compares the Kronecker nonzero count against the GEMM
        # flop count with a wide margin for the slower sparse kernels.
        m, n = self.shape
        dense, sparse_terms = [], []
        for w, A, B in self.terms:
            nnz = np.count_nonzero(A) * np.count_nonzero(B)
            if nnz * 16 <= m * n * (m + n):
                sparse_terms.append((w, A, B))
            else:
                dense.append((w, A, B))
        self._dense_wAt = (np.stack([w * A.T for w, A, _ in dense])
                           if dense else None)
        self._dense_Bt = (np.stack([B.T.copy() for _, _, B in dense])
                          if dense else None)
        self._dense_Bv = (np.concatenate([B for _, _, B in dense], axis=0)
                          if dense else None)
        if sparse_terms:
            from scipy import sparse

            # column-major vec: vec(A^T X B) = (B^T kron A^T) vec(X)
            P = sparse.csr_matrix((m * n, m * n))
            for w, A, B in sparse_terms:
                P = P + w * sparse.kron(
                    sparse.csr_matrix(B.T), sparse.csr_matrix(A.T), "csr"
                )
            self._sparse_P = P
        else:
            self._sparse_P = None

    def _apply_dense_terms(self, X: np.ndarray) -> np.ndarray:
        Z = self._dense_wAt @ X
        return Z.transpose(1, 0, 2).reshape(self.shape[0], -1) @ self._dense_Bv

    def _apply_sparse_terms(self, X: np.ndarray) -> np.ndarray:
        m, n = self.shape
        y = self._sparse_P @ X.reshape(-1, order="F")
        return y.reshape((m, n), order="F")

    def apply_full(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        out = None
        if self._dense_wAt is not None:
            out = self._apply_dense_terms(X)
        if self._sparse_P is not None:
            ys = self._apply_sparse_terms(X)
            out = ys if out is None else out + ys
        return out

    def apply_factored(self, U: np.ndarray, V: np.ndarray) -> np.ndarray:
        # dense terms evaluate as sum_p (w_p A_p^T U)(B_p^T V)^T with the
        # sum folded into one product of the horizontally stacked blocks;
        # sparse terms act on the assembled rank-r product, whose cost is
        # of the same order as the stacked product itself
        U = np.asarray(U, dtype=float)
        V = np.asarray(V, dtype=float)
        out = None
        if self._dense_wAt is not None:
            AU = self._dense_wAt @ U
            BV = self._dense_Bt @ V
            out = (AU.transpose(1, 0, 2).reshape(self.shape[0], -1)
                   @ BV.transpose(1, 0, 2).reshape(self.shape[1], -1).T)
        if self._sparse_P is not None:
            ys = self._apply_sparse_terms(U @ V.T)
            out = ys if out is None else out + ys
        return out

    def default_step(self) -> float:
        return 1e-2

    def default_shift(self) -> float:
        return 0.0


def neumann_laplacian(n: int) -> np.ndarray:
    """Second-difference matrix on ``n`` points of [0, 1] with reflecting ends.

    Uses the standard central stencil ``(1, -2, 1) / h^2`` with
    ``h = 1/(n-1)``; the boundary rows eliminate the ghost point by
    mirroring, giving ``(-2, 2) / h^2``.  Row sums vanish, so the constant
    vector is an eigenvector with eigenvalue 0, which is the rightmost
    eigenvalue.  The matrix is Metzler but not symmetric.
    """
    if n < 2:
        raise ValueError("need at least two grid points")
    h2 = (1.0 / (n - 1)) ** 2
    A = np.zeros((n, n))
    idx = np.arange(n)
    A[idx, idx] = -2.0
    A[idx[:-1], idx[:-1] + 1] = 1.0
    A[idx[1:], idx[1:] - 1] = 1.0
    A[0, 1] = 2.0
    A[n - 1, n - 2] = 2.0
    return A / h2


def grid_points(n: int) -> np.ndarray:
    """Uniform grid on [0, 1] with ``n`` points, matching :func:`neumann_laplacian`."""
    return np.linspace(0.0, 1.0, n)


class HadamardGrowthOperator(LinearMatrixOperator):
    """Diffusion plus entrywise growth: ``eps (A X + X A^T) + eps_r (R o X)``.

    ``A`` must be Metzler (nonnegative off-diagonal); the growth rate ``R``
    may change sign, so the operator is Metzler but does not itself map
    nonnegative matrices to nonnegative matrices.

    The entrywise product has no factored shortcut, so ``apply_factored``
    forms the ``m x n`` product for the growth term only.
    """

    kind = "hadamard-growth"

    def __init__(self, A, eps: float, eps_r: float, R):
        self.A = as_matrix(A, "diffusion matrix")
        n = self.A.shape[0]
        if self.A.shape[1] != n:
            raise ValueError("diffusion matrix must be square")
        off = self.A - np.diag(np.diag(self.A))
        if np.any(off < 0):
            raise ValueError("diffusion matrix must be Metzler")
        self.R = as_matrix(R, "growth rate")
        if self.R.shape != (n, n):
            raise ValueError("growth rate must match the diffusion size")
        self.eps = float(eps)
        self.eps_r = float(eps_r)
        if self.eps < 0 or self.eps_r < 0:
            raise ValueError("eps and eps_r must be nonnegative")
        self.shape = (n, n)
        self.preserves_nonnegativity = False
        self.is_metzler = True

    @classmethod
    def standard(cls, n: int, r0: float = 0.1, eps: float = 0.01,
                 eps_r: float = 3 * np.pi) -> "HadamardGrowthOperator":
        """Reflecting diffusion on the unit square with growth rate
        ``r0 + sin(2 pi x) cos(2 pi y)`` sampled on the uniform grid."""
        x = grid_points(n)
        R = r0 + np.outer(np.sin(2 * np.pi * x), np.cos(2 * np.pi * x))
        return cls(neumann_laplacian(n), eps, eps_r, R)

    def apply_full(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return self.eps * (self.A @ X + X @ self.A.T) + self.eps_r * (self.R * X)

    def apply_factored(self, U: np.ndarray, V: np.ndarray) -> np.ndarray:
        U = np.asarray(U, dtype=float)
        V = np.asarray(V, dtype=float)
        P = U @ V.T  # needed by the entrywise term only
        return self.eps * ((self.A @ U) @ V.T + U @ (self.A @ V).T) \
            + self.eps_r * (self.R * P)

    def default_step(self) -> float:
        return 5e-3

    def default_shift(self) -> float:
        return (self.eps_r * float(np.abs(self.R).max())
                + 2 * self.eps * float(np.abs(np.diag(self.A)).max()))


class SeparableGrowthOperator(LinearMatrixOperator):
    """Diffusion plus separable growth:
    ``eps (A X + X A^T) + r0 X + eps_r diag(phi) X diag(psi)``.

    The growth modulation acts by row scaling with ``phi`` and column
    scaling with ``psi``, which factored evaluation exploits directly.
    """

    kind = "separable-growth"

    def __init__(self, A, eps: float, r0: float, eps_r: float, phi, psi):
        self.A = as_matrix(A, "diffusion matrix")
        n = self.A.shape[0]
        if self.A.shape[1] != n:
            raise ValueError("diffusion matrix must be square")
        off = self.A - np.diag(np.diag(self.A))
        if np.any(off < 0):
            raise ValueError("diffusion matrix must be Metzler")
        self.phi = np.asarray(phi, dtype=float).ravel()
        self.psi = np.asarray(psi, dtype=float).ravel()
        if self.phi.shape != (n,) or self.psi.shape != (n,):
            raise ValueError("modulations must be length-n vectors")
        if not (np.all(np.isfinite(self.phi)) and np.all(np.isfinite(self.psi))):
            raise ValueError("modulations contain non-finite entries")
        self.eps = float(eps)
        self.r0 = float(r0)
        self.eps_r = float(eps_r)
        if self.eps < 0 or self.eps_r < 0:
            raise ValueError("eps and eps_r must be nonnegative")
        self.shape = (n, n)
        self.preserves_nonnegativity = False
        self.is_metzler = True

    @classmethod
    def standard(cls, n: int, r0: float = 0.3, eps: float = 0.1,
                 eps_r: float = 0.01) -> "SeparableGrowthOperator":
        """Reflecting diffusion with row modulation ``0.3 sin(3 pi x)`` and
        column modulation ``0.2 cos(pi y)`` on the uniform grid."""
        x = grid_points(n)
        phi = 0.3 * np.sin(3 * np.pi * x)
        psi = 0.2 * np.cos(np.pi * x)
        return cls(neumann_laplacian(n), eps, r0, eps_r, phi, psi)

    def apply_full(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return (self.eps * (self.A @ X + X @ self.A.T) + self.r0 * X
                + self.eps_r * (self.phi[:, None] * X * self.psi[None, :]))

    def apply_factored(self, U: np.ndarray, V: np.ndarray) -> np.ndarray:
        U = np.asarray(U, dtype=float)
        V = np.asarray(V, dtype=float)
        return (self.eps * ((self.A @ U) @ V.T + U @ (self.A @ V).T)
                + self.r0 * (U @ V.T)
                + self.eps_r * ((self.phi[:, None] * U) @ (self.psi[:, None] * V).T))

    def default_step(self) -> float:
        return 1e-4

    def default_shift(self) -> float:
        mod = float(np.abs(np.outer(self.phi, self.psi)).max())
        return (self.eps_r * mod + abs(self.r0)
                + 2 * self.eps * float(np.abs(np.diag(self.A)).max()))


def rayleigh_value(op: LinearMatrixOperator, X: np.ndarray) -> float:
    """Rayleigh functional ``<A(X), X>`` of a unit-Frobenius-norm matrix."""
    return frobenius_inner(op.apply_full(X), X)


def flow_field(op: LinearMatrixOperator, X: np.ndarray):
    """Normalized eigenvalue flow ``G = A(X) - <A(X), X> X`` at ``X``.

    ``X`` must have unit Frobenius norm (checked to 1e-8); the returned
    field is tangent to the unit sphere, and its zeros are exactly the
    eigenmatrices of the operator.

    Returns
    -------
    (G, rho) : tuple
        The flow direction and the Rayleigh value ``rho = <A(X), X>``.
    """
    X = np.asarray(X, dtype=float)
    nrm = float(np.linalg.norm(X))
    if abs(nrm - 1.0) > 1e-8:
        raise ValueError(f"flow field requires unit Frobenius norm, got {nrm!r}")
    Y = op.apply_full(X)
    rho = frobenius_inner(Y, X)
    return Y - rho * X, rho


def vectorize_operator(op: MarkovGridOperator) -> np.ndarray:
    """Kronecker matrix ``P = sum_p w_p B_p (x) A_p`` of a grid operator.

    With columnwise vectorization ``vec``, the operator action satisfies
    ``vec(A(X)) = P.T @ vec(X)``; for a probabilistically valid grid ``P``
    is row stochastic.  Only intended for small sizes, the result is dense
    ``(m*n) x (m*n)``.
    """
    if not isinstance(op, MarkovGridOperator):
        raise TypeError("vectorization is only defined for grid operators")
    m, n = op.shape
    P = np.zeros((m * n, m * n))
    for w, A, B in op.terms:
        P += w * np.kron(B, A)
    return P


# --- JSON serialization ----------------------------------------------------
#
# Plain json round-trips Python floats through repr, which preserves the
# exact binary value, so nothing special is needed for full precision.

def operator_to_dict(op: LinearMatrixOperator) -> dict:
    """JSON-ready description of an operator."""
    if isinstance(op, MarkovGridOperator):
        return {
            "kind": op.kind,
            "m": op.shape[0],
            "n": op.shape[1],
            "terms": [
                {"weight": w, "A": A.tolist(), "B": B.tolist()}
                for w, A, B in op.terms
            ],
        }
    if isinstance(op, HadamardGrowthOperator):
        return {
            "kind": op.kind,
            "n": op.shape[0],
            "eps": op.eps,
            "eps_r": op.eps_r,
            "diffusion": op.A.tolist(),
            "growth": op.R.tolist(),
        }
    if isinstance(op, SeparableGrowthOperator):
        return {
            "kind": op.kind,
            "n": op.shape[0],
            "eps": op.eps,
            "r0": op.r0,
            "eps_r": op.eps_r,
            "diffusion": op.A.tolist(),
            "row_modulation": op.phi.tolist(),
            "col_modulation": op.psi.tolist(),
        }
    raise TypeError(f"cannot serialize operator of type {type(op).__name__}")


def operator_from_dict(d: dict) -> LinearMatrixOperator:
    """Inverse of :func:`operator_to_dict`."""
    try:
        kind = d["kind"]
        if kind == "markov-grid":
            terms = [(t["weight"], t["A"], t["B"]) for t in d["terms"]]
            return MarkovGridOperator(terms)
        if kind == "hadamard-growth":
            return HadamardGrowthOperator(d["diffusion"], d["eps"], d["eps_r"],
                                          d["growth"])
        if kind == "separable-growth":
            return SeparableGrowthOperator(d["diffusion"], d["eps"], d["r0"],
                                           d["eps_r"], d["row_modulation"],
                                           d["col_modulation"])
    except KeyError as exc:
        raise ValueError(f"operator description missing field {exc}") from exc
    raise ValueError(f"unknown operator kind {d.get('kind')!r}")


def save_operator(op: LinearMatrixOperator, path) -> None:
    with open(path, "w") as fh:
        json.dump(operator_to_dict(op), fh)
        fh.write("\n")


def load_operator(path) -> LinearMatrixOperator:
    with open(path) as fh:
        return operator_from_dict(json.load(fh))
