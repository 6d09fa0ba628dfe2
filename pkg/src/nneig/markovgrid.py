"""Generators and validators for synthetic Markov grid operators.

All randomness flows through ``numpy.random.Generator`` seeded with PCG64;
generation is deterministic given the spec, and every spec carries its seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .operators import MarkovGridOperator

__all__ = [
    "BlockGridSpec",
    "RandomGridSpec",
    "GridValidationReport",
    "dirichlet_row",
    "dirichlet_stochastic",
    "sparse_random_stochastic",
    "generate_block_grid",
    "generate_random_grid",
    "rank_one_stationary",
    "stationary_vector",
    "validate_grid",
    "demo_path_walk",
    "demo_clustered_walk",
]


def dirichlet_row(rng: np.random.Generator, k: int) -> np.ndarray:
    """One point drawn uniformly from the k-simplex (Dirichlet, all ones)."""
    if k < 1:
        raise ValueError("need at least one category")
    return rng.dirichlet(np.ones(k))


def dirichlet_stochastic(rng: np.random.Generator, n: int) -> np.ndarray:
    """Row-stochastic n x n matrix with independent simplex-uniform rows."""
    return rng.dirichlet(np.ones(n), size=n)


def sparse_random_stochastic(rng: np.random.Generator, n: int,
                             density: float) -> np.ndarray:
    """Sparse-random row-stochastic matrix.

    Entries are kept with probability ``density`` and filled with uniform
    values, then each row is normalized.  A row that comes out empty gets a
    single unit entry at a random column so the result is always a valid
    transition matrix.
    """
    if not 0 < density <= 1:
        raise ValueError("density must lie in (0, 1]")
    M = np.where(rng.random((n, n)) < density, rng.random((n, n)), 0.0)
    for i in range(n):
        s = M[i].sum()
        if s == 0.0:
            M[i, rng.integers(n)] = 1.0
        else:
            M[i] /= s
    return M


@dataclass
class BlockGridSpec:
    """Specification of a block-structured grid.

    Args:
        sizes: block sizes; the grid has size ``sum(sizes)``.
        delta: weight of the dense fully-connected term, in (0, 1].
        seed: generator seed (PCG64).
        style: ``"stochastic"`` or ``"trap"``.

    The two styles differ in how the ``t`` block terms are completed and
    weighted.  ``"stochastic"`` places the Dirichlet-random block of term
    ``i`` at block ``i`` and the identity elsewhere, and splits the
    remaining weight ``1 - delta`` across the block terms by a Dirichlet
    draw; every term is then a genuine transition pair and the weights lie
    on the simplex.  ``"trap"`` zeroes each block term outside its own block
    and gives every block term the full weight ``1 - delta``; mass outside a
    block is absorbed, the operator is sub-stochastic, and its stationary
    matrix concentrates near the diagonal, which is the regime where
    truncated low-rank approximations go negative.
    """

    sizes: tuple
    delta: float
    seed: int = 0
    style: str = "stochastic"

    def __post_init__(self):
        self.sizes = tuple(int(s) for s in self.sizes)
        if not self.sizes or any(s < 1 for s in self.sizes):
            raise ValueError("block sizes must be positive integers")
        if not 0 < self.delta <= 1:
            raise ValueError("delta must lie in (0, 1]")
        if self.style not in ("stochastic", "trap"):
            raise ValueError(f"unknown style {self.style!r}")

    @property
    def n(self) -> int:
        return sum(self.sizes)


@dataclass
class RandomGridSpec:
    """Specification of an unstructured random grid.

    Args:
        n: grid size.
        t: number of terms (must be 3 for the shared-pair family).
        density: sparsity of the transition matrices, in (0, 1].
        seed: generator seed (PCG64).
        family: ``"independent"`` draws a fresh transition pair per term;
            ``"shared-pair"`` draws a single pair (A, B) and forms the three
            terms ``A^T X``, ``X B`` and ``A^T X B``, whose unique
            stationary matrix is exactly rank one (the outer product of the
            two stationary vectors).
    """

    n: int
    t: int = 3
    density: float = 0.9
    seed: int = 0
    family: str = "independent"

    def __post_init__(self):
        if self.n < 1 or self.t < 1:
            raise ValueError("n and t must be positive")
        if not 0 < self.density <= 1:
            raise ValueError("density must lie in (0, 1]")
        if self.family not in ("independent", "shared-pair"):
            raise ValueError(f"unknown family {self.family!r}")
        if self.family == "shared-pair" and self.t != 3:
            raise ValueError("the shared-pair family always has t = 3 terms")


def generate_block_grid(spec: BlockGridSpec) -> MarkovGridOperator:
    """Build the block grid described by ``spec``. Deterministic given the spec."""
    rng = np.random.default_rng(spec.seed)
    n = spec.n
    t = len(spec.sizes)
    offsets = np.cumsum((0,) + spec.sizes)
    if spec.style == "stochastic":
        w = (1.0 - spec.delta) * dirichlet_row(rng, t) if spec.delta < 1 \
            else np.zeros(t)
    else:
        w = np.full(t, 1.0 - spec.delta)
    terms = []
    for i in range(t):
        lo, hi = offsets[i], offsets[i + 1]
        base = np.eye(n) if spec.style == "stochastic" else np.zeros((n, n))
        A = base.copy()
        B = base.copy()
        A[lo:hi, lo:hi] = dirichlet_stochastic(rng, hi - lo)
        B[lo:hi, lo:hi] = dirichlet_stochastic(rng, hi - lo)
        terms.append((w[i], A, B))
    if spec.style == "stochastic":
        dense_A = dirichlet_stochastic(rng, n)
        dense_B = dirichlet_stochastic(rng, n)
    else:
        # trap style pairs the absorbing blocks with a uniform
        # fully-connected escape term, the teleportation completion; the
        # blocks then re-feed at equal rates and the stationary matrix
        # spreads its mass evenly across them
        dense_A = np.full((n, n), 1.0 / n)
        dense_B = np.full((n, n), 1.0 / n)
    terms.append((spec.delta, dense_A, dense_B))
    return MarkovGridOperator(terms)


def generate_random_grid(spec: RandomGridSpec) -> MarkovGridOperator:
    """Build the random grid described by ``spec``. Deterministic given the spec."""
    rng = np.random.default_rng(spec.seed)
    w = dirichlet_row(rng, spec.t)
    if spec.family == "independent":
        terms = [
            (w[p], sparse_random_stochastic(rng, spec.n, spec.density),
             sparse_random_stochastic(rng, spec.n, spec.density))
            for p in range(spec.t)
        ]
    else:
        A = sparse_random_stochastic(rng, spec.n, spec.density)
        B = sparse_random_stochastic(rng, spec.n, spec.density)
        eye = np.eye(spec.n)
        terms = [(w[0], A, eye), (w[1], eye, B), (w[2], A, B)]
    return MarkovGridOperator(terms)


def stationary_vector(A: np.ndarray, tol: float = 1e-13,
                      max_iters: int = 1_000_000) -> np.ndarray:
    """Stationary distribution of a row-stochastic matrix.

    Damped power iteration on ``(A^T + I) / 2``; the damping handles
    periodic chains.  Convergence is declared when successive iterates
    agree to ``tol`` in the max norm.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    v = np.full(n, 1.0 / n)
    for _ in range(max_iters):
        w = 0.5 * (A.T @ v + v)
        w /= w.sum()
        if np.abs(w - v).max() <= tol:
            return w
        v = w
    raise RuntimeError("stationary vector iteration did not converge")


def rank_one_stationary(A: np.ndarray, B: np.ndarray):
    """Rank-one stationary matrix of the three-term grid built on (A, B).

    For the grid ``w1 A^T X + w2 X B + w3 A^T X B`` with irreducible
    row-stochastic A and B, the stationary matrix is the outer product of
    the stationary vectors of A and B, independent of the weights.

    Returns
    -------
    (mu, nu, X) : stationary vector of A, stationary vector of B, and their
        outer product with total mass one.
    """
    mu = stationary_vector(A)
    nu = stationary_vector(B)
    return mu, nu, np.outer(mu, nu)


@dataclass
class GridValidationReport:
    """Outcome of probabilistic-validity checks on a grid operator."""

    ok: bool
    failures: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.ok


def validate_grid(op: MarkovGridOperator, atol: float = 1e-12) -> GridValidationReport:
    """Check that a grid operator is a convex combination of transition pairs.

    Verifies nonnegative weights summing to one, nonnegative entries, and
    unit row sums for every matrix, all to absolute tolerance ``atol``.
    Each violation is reported as a human-readable string naming the term
    (and row) responsible.
    """
    failures = []
    weights = np.array([w for w, _, _ in op.terms])
    if np.any(weights < -atol):
        bad = int(np.argmin(weights))
        failures.append(f"term {bad}: negative weight {weights[bad]!r}")
    if abs(weights.sum() - 1.0) > atol:
        failures.append(f"weights sum to {weights.sum()!r} (expected 1)")
    for k, (_, A, B) in enumerate(op.terms):
        for label, M in (("A", A), ("B", B)):
            if np.any(M < 0):
                i, j = np.unravel_index(int(np.argmin(M)), M.shape)
                failures.append(
                    f"term {k}: {label}[{i},{j}] = {M[i, j]!r} is negative")
            rows = M.sum(axis=1)
            bad_rows = np.where(np.abs(rows - 1.0) > atol)[0]
            if bad_rows.size:
                i = int(bad_rows[0])
                failures.append(
                    f"term {k}: {label} row {i} sums to {rows[i]!r} "
                    f"(expected 1; {bad_rows.size} rows affected)")
    return GridValidationReport(ok=not failures, failures=failures)


def demo_path_walk() -> MarkovGridOperator:
    """Two-sided neighbor walk on a 3 x 3 state lattice.

    The chain moves to a uniformly random neighbor on the path graph
    1 - 2 - 3, and the grid averages the action on rows and columns:
    ``X -> (A^T X + X A) / 2``.
    """
    A = np.array([[0.0, 1.0, 0.0],
                  [0.5, 0.0, 0.5],
                  [0.0, 1.0, 0.0]])
    eye = np.eye(3)
    return MarkovGridOperator([(0.5, A, eye), (0.5, eye, A)])


def demo_clustered_walk() -> MarkovGridOperator:
    """Three-cluster metastable walk whose stationary matrix is nearly
    diagonal, so its best rank-2 approximation picks up negative entries."""
    A1 = np.array([[0.9, 0.05, 0.05],
                   [1.0, 0.0, 0.0],
                   [1.0, 0.0, 0.0]])
    A2 = np.array([[0.0, 1.0, 0.0],
                   [0.1, 0.8, 0.1],
                   [0.0, 1.0, 0.0]])
    A3 = np.array([[0.0, 0.0, 1.0],
                   [0.0, 0.0, 1.0],
                   [0.075, 0.075, 0.85]])
    third = 1.0 / 3.0
    return MarkovGridOperator([(third, A1, A1), (third, A2, A2),
                               (third, A3, A3)])
