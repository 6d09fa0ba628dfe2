"""Eigenpair solvers: power reference, nonnegative low-rank integrator, and
projector-splitting baseline.

All solvers target the rightmost eigenpair ``A(X) = lam X`` of a
:class:`~nneig.operators.LinearMatrixOperator` and report a unit-Frobenius-
norm ``X``.  They share a common report type and are deterministic given
their seeds (PCG64 generators throughout).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .matcore import FactorPair, project_feasible_direction, thin_qr
from .operators import LinearMatrixOperator

__all__ = [
    "SolverError",
    "HistoryEntry",
    "EigenReport",
    "PSIState",
    "residual",
    "power_reference",
    "rneg_solve",
    "psi_solve",
]


class SolverError(RuntimeError):
    """A solver produced non-finite values or lost its iterate entirely."""


@dataclass
class HistoryEntry:
    step: int
    eigenvalue: float
    residual: float
    step_size: float
    accepted: bool = True


@dataclass
class EigenReport:
    """Outcome of an eigenpair computation.

    ``X`` always has unit Frobenius norm; ``eigenvalue`` is the Rayleigh
    value of ``X`` under the operator, ``residual`` the Frobenius norm of
    ``A(X) - eigenvalue * X``.  ``factors`` is set by the factored solver,
    ``history`` only when the solver was asked to keep it.
    """

    method: str
    eigenvalue: float
    X: np.ndarray
    residual: float
    iterations: int
    converged: bool
    wall_time_s: float
    neg_count: int
    factors: FactorPair | None = None
    psi_state: "PSIState | None" = None
    history: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def to_dict(self, include_matrix: bool = True,
                include_history: bool = False) -> dict:
        d = {
            "method": self.method,
            "eigenvalue": self.eigenvalue,
            "residual": self.residual,
            "iterations": self.iterations,
            "converged": self.converged,
            "wall_time_s": self.wall_time_s,
            "neg_count": self.neg_count,
            "details": dict(self.details),
        }
        if include_matrix:
            d["X"] = self.X.tolist()
            if self.factors is not None:
                d["U"] = self.factors.U.tolist()
                d["V"] = self.factors.V.tolist()
            if self.psi_state is not None:
                d["U"] = self.psi_state.U.tolist()
                d["S"] = self.psi_state.S.tolist()
                d["V"] = self.psi_state.V.tolist()
        if include_history:
            d["history"] = [
                [h.step, h.eigenvalue, h.residual, h.step_size, h.accepted]
                for h in self.history
            ]
        return d


@dataclass
class PSIState:
    """Orthonormal-factor state ``X = U @ S @ V.T`` of the splitting integrator."""

    U: np.ndarray
    S: np.ndarray
    V: np.ndarray

    def product(self) -> np.ndarray:
        return self.U @ self.S @ self.V.T


def residual(op: LinearMatrixOperator, X: np.ndarray, lam: float) -> float:
    """Frobenius norm of ``A(X) - lam X``."""
    X = np.asarray(X, dtype=float)
    return float(np.linalg.norm(op.apply_full(X) - lam * X))


def _check_finite(lam: float, what: str) -> None:
    if not np.isfinite(lam):
        raise SolverError(f"{what} became non-finite")


def power_reference(op: LinearMatrixOperator, tol: float = 1e-8,
                    max_iters: int = 500_000, shift: float | None = None,
                    damping: float = 0.5, X0: np.ndarray | None = None,
                    keep_history: bool = False) -> EigenReport:
    """Damped, shifted power iteration; the reference rightmost eigenpair.

    Iterates ``X <- (1 - damping) (A(X) + shift X) + damping X`` with
    Frobenius renormalization.  For nonnegativity-preserving operators the
    default ``shift=None`` resolves to the operator's stored shift (zero
    for probabilistic grids), making the iteration map the nonnegative
    orthant to itself; the damping term handles periodic chains.  The
    reported eigenvalue is always that of the *unshifted* operator.

    Convergence is declared when ``||A(X) - rho X||_F <= tol``.  If the
    budget runs out first, the best (last) iterate is returned with
    ``converged=False``; this is the expected behavior when the rightmost
    eigenvalues are nearly degenerate, in which case the Rayleigh value is
    still accurate to about the degeneracy gap.
    """
    t0 = time.perf_counter()
    if not 0 <= damping < 1:
        raise ValueError("damping must lie in [0, 1)")
    sigma = op.default_shift() if shift is None else float(shift)
    m, n = op.shape
    if X0 is None:
        X = np.full((m, n), 1.0 / np.sqrt(m * n))
    else:
        X = np.asarray(X0, dtype=float).copy()
        nrm = np.linalg.norm(X)
        if nrm == 0:
            raise ValueError("starting matrix must be nonzero")
        X /= nrm
    history: list[HistoryEntry] = []
    lam = 0.0
    res = np.inf
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        Y = op.apply_full(X)
        lam = float(np.sum(Y * X))
        _check_finite(lam, "power iterate")
        res = float(np.linalg.norm(Y - lam * X))
        if keep_history:
            history.append(HistoryEntry(it, lam, res, damping))
        if res <= tol:
            converged = True
            break
        Z = (1.0 - damping) * (Y + sigma * X) + damping * X
        nrm = float(np.linalg.norm(Z))
        if nrm == 0.0 or not np.isfinite(nrm):
            raise SolverError("power iterate vanished or blew up")
        X = Z / nrm
    return EigenReport(
        method="power",
        eigenvalue=lam,
        X=X,
        residual=res,
        iterations=it,
        converged=converged,
        wall_time_s=time.perf_counter() - t0,
        neg_count=int(np.count_nonzero(X < 0)),
        history=history,
        details={"rng": "none", "shift": sigma, "damping": damping, "tol": tol},
    )


def _factored_gradients(op: LinearMatrixOperator, U: np.ndarray, V: np.ndarray):
    """Evaluate the constrained flow data at nonnegative factors (U, V).

    Returns the Rayleigh value, the raw factor gradients of the flow
    ``A(X) - rho X`` pushed onto each factor, their feasible projections at
    the current sign pattern, and the projection norms.
    """
    F = op.apply_factored(U, V)
    FtU = F.T @ U
    lam = float(np.sum(FtU * V))  # <A(X), UV^T> without forming UV^T
    _check_finite(lam, "factored iterate")
    GU = F @ V - lam * (U @ (V.T @ V))
    GV = FtU - lam * (V @ (U.T @ U))
    PU = project_feasible_direction(U, GU)
    PV = project_feasible_direction(V, GV)
    nU = float(np.linalg.norm(PU))
    nV = float(np.linalg.norm(PV))
    return lam, PU, PV, nU, nV


def _crossing_ratios(U: np.ndarray, PU: np.ndarray) -> np.ndarray:
    """Per-entry step sizes at which positive entries would cross zero.

    Only entries that are positive now and pushed downward constrain the
    step; entries already at zero cannot decrease because the feasible
    projection clips their direction at zero.  Unconstrained entries get
    ``inf``.  The admissible step is the minimum over both factors.
    """
    out = np.full(U.shape, np.inf)
    mask = (U > 0) & (PU < 0)
    out[mask] = U[mask] / -PU[mask]
    return out


def _normalized_product(U: np.ndarray, V: np.ndarray):
    """Rescale factors so the product has unit Frobenius norm."""
    g = float(np.sum((U.T @ U) * (V.T @ V)))
    s = np.sqrt(max(g, 0.0))
    if s == 0.0:
        return None, None
    c = np.sqrt(s)
    return U / c, V / c


def rneg_solve(op: LinearMatrixOperator, rank: int, h0: float | None = None,
               tol: float = 1e-8, nmax: int = 50_000, beta_rej: float = 0.5,
               beta_acc: float = 1.1, seed: int = 0,
               init: FactorPair | None = None,
               accept_mode: str = "prev_accepted",
               accept_slack: float = 1.05, max_rejects: int = 40,
               keep_history: bool = False) -> EigenReport:
    """Nonnegative rank-``rank`` eigenpair by explicit integration of the
    sign-constrained eigenvalue flow on the factors (RNeg).

    The iterate is ``X = U @ V.T`` with entrywise-nonnegative factors on
    the unit Frobenius sphere.  Each step pushes both factors along the
    feasible projection of the flow gradients, clips at zero, and
    renormalizes; zero entries of a factor can therefore only re-activate
    through a positive gradient.  The step is capped by the largest
    admissible value that keeps currently-positive entries nonnegative,
    and adapted by backtracking: a trial step is accepted only when both
    projected-gradient norms do not exceed the acceptance baseline, else
    the step is retaken from the same factors with ``h * beta_rej``.  On
    acceptance the step grows by ``beta_acc`` up to the initial ``h0``.

    Parameters largely follow the operator family: ``h0=None`` resolves to
    the operator's default step.  ``accept_mode`` selects the backtracking
    baseline: ``"prev_accepted"`` compares against the norms recorded at
    the previous accepted step, ``"pre_step"`` against the norms at the
    current factors.

    The projected-gradient norms are not monotone along the flow, so a
    norm-decreasing step size need not exist; insisting on one deadlocks
    the search wherever the trajectory climbs.  ``accept_slack`` gives the
    test multiplicative headroom: a trial passes when neither norm grows
    by more than that factor over the baseline.  The flow's own per-step
    growth is ``1 + O(h)``, so some step size always passes, while the
    compounding jumps of an unstable explicit step still get rejected.
    ``max_rejects`` bounds the halvings per step as a final safety; the
    smallest trial is then taken anyway.

    Termination: ``max(dU, dV) <= tol`` where ``dU``, ``dV`` are the
    Frobenius changes of the normalized factors over the last accepted
    unclamped step; ``nmax`` accepted steps at most.  A step size that
    underflows ``1e-16`` stops the run with ``converged=False``.
    """
    t0 = time.perf_counter()
    m, n = op.shape
    if not 1 <= rank <= min(m, n):
        raise ValueError(f"rank must lie in [1, {min(m, n)}], got {rank}")
    if not 0 < beta_rej < 1:
        raise ValueError("beta_rej must lie in (0, 1)")
    if beta_acc < 1:
        raise ValueError("beta_acc must be at least 1")
    if accept_mode not in ("prev_accepted", "pre_step"):
        raise ValueError(f"unknown accept_mode {accept_mode!r}")
    if accept_slack < 1:
        raise ValueError("accept_slack must be at least 1")
    h_cap = float(op.default_step() if h0 is None else h0)
    if h_cap <= 0:
        raise ValueError("h0 must be positive")
    rng = np.random.default_rng(seed)
    if init is None:
        U = rng.random((m, rank))
        V = rng.random((n, rank))
    else:
        if init.shape != (m, n) or init.rank_bound != rank:
            raise ValueError("init factors do not match operator/rank")
        U = init.U.copy()
        V = init.V.copy()
    U, V = _normalized_product(U, V)
    if U is None:
        raise ValueError("initial factors have zero product")

    lam, PU, PV, nU, nV = _factored_gradients(op, U, V)
    base_U, base_V = np.inf, np.inf
    h = h_cap
    h_floor = 1e-16
    history: list[HistoryEntry] = []
    converged = False
    stalled = False
    accepted_steps = 0

    while accepted_steps < nmax:
        if accept_mode == "pre_step":
            base_U, base_V = nU, nV
        ratio_U = _crossing_ratios(U, PU)
        ratio_V = _crossing_ratios(V, PV)
        h_adm = float(min(ratio_U.min(), ratio_V.min()))
        # backtracking loop: retake the trial step from the same factors
        # until both projected-gradient norms pass the acceptance test,
        # or the rejection budget runs out
        rejects = 0
        while True:
            h_use = min(h, h_adm)
            Ut = np.maximum(U + h_use * PU, 0.0)
            Vt = np.maximum(V + h_use * PV, 0.0)
            # entries whose crossing time is hit this step land exactly on
            # the boundary; roundoff residues there would otherwise shrink
            # the next admissible step to nothing
            Ut[ratio_U <= h_use * (1.0 + 1e-12)] = 0.0
            Vt[ratio_V <= h_use * (1.0 + 1e-12)] = 0.0
            Ut, Vt = _normalized_product(Ut, Vt)
            if Ut is not None:
                lam_t, PU_t, PV_t, nU_t, nV_t = _factored_gradients(op, Ut, Vt)
                if ((nU_t <= accept_slack * base_U and
                     nV_t <= accept_slack * base_V) or rejects >= max_rejects):
                    break
                if keep_history:
                    history.append(HistoryEntry(accepted_steps + 1, lam_t,
                                                np.nan, h_use, accepted=False))
            rejects += 1
            h *= beta_rej
            if h < h_floor:
                stalled = True
                break
        if stalled:
            break
        accepted_steps += 1
        dU = float(np.linalg.norm(Ut - U))
        dV = float(np.linalg.norm(Vt - V))
        U, V = Ut, Vt
        lam, PU, PV, nU, nV = lam_t, PU_t, PV_t, nU_t, nV_t
        base_U, base_V = nU, nV
        h = min(h * beta_acc, h_cap)
        if keep_history:
            res_now = residual(op, U @ V.T, lam)
            history.append(HistoryEntry(accepted_steps, lam, res_now, h_use))
        # a boundary-contact step moves the factors very little however far
        # the iterate is from stationarity; only an unclamped step counts
        # for the termination test.  Both factors must settle: one factor
        # alone can freeze early (its gradient vanishes identically once
        # it aligns, e.g. with a shared Perron direction) while the other
        # is still moving.
        if max(dU, dV) <= tol and h_use >= h:
            converged = True
            break

    X = U @ V.T
    res = residual(op, X, lam)
    return EigenReport(
        method="rneg",
        eigenvalue=lam,
        X=X,
        residual=res,
        iterations=accepted_steps,
        converged=converged,
        wall_time_s=time.perf_counter() - t0,
        neg_count=int(np.count_nonzero(X < 0)),
        factors=FactorPair(U, V),
        history=history,
        details={
            "rng": "PCG64", "seed": seed, "h0": h_cap, "tol": tol,
            "beta_rej": beta_rej, "beta_acc": beta_acc,
            "accept_mode": accept_mode, "accept_slack": accept_slack,
            "stalled": stalled,
        },
    )


def psi_solve(op: LinearMatrixOperator, rank: int, h: float | None = None,
              tol: float = 1e-8, max_steps: int = 500_000,
              init: PSIState | None = None, seed: int = 0,
              keep_history: bool = False) -> EigenReport:
    """Rank-``rank`` eigenpair by a first-order projector-splitting
    integrator (PSI) applied to the eigenvalue flow.

    The state is ``X = U @ S @ V.T`` with orthonormal ``U``, ``V``.  One
    step of size ``h`` integrates the flow ``G(X) = A(X) - <A(X), X> X``
    through the usual three substeps (the middle one runs backward):

    1. K-step:  ``K = U S + h G(X) V``;         QR gives the new ``U``.
    2. S-step:  ``S <- S - h U^T G(X) V``       (minus sign).
    3. L-step:  ``L = V S^T + h G(X)^T U``;     QR gives the new ``V``.

    After each full step ``S`` is renormalized to unit Frobenius norm,
    which keeps the iterate on the unit sphere without affecting the
    fixed points.  No sign constraint is imposed anywhere, so the limit
    generally carries negative entries.

    Stops when ``||X_{k+1} - X_k||_F <= tol * h``.
    """
    t0 = time.perf_counter()
    m, n = op.shape
    if not 1 <= rank <= min(m, n):
        raise ValueError(f"rank must lie in [1, {min(m, n)}], got {rank}")
    step = float(op.default_step() if h is None else h)
    if step <= 0:
        raise ValueError("step size must be positive")
    if init is None:
        rng = np.random.default_rng(seed)
        U, _ = thin_qr(rng.standard_normal((m, rank)))
        V, _ = thin_qr(rng.standard_normal((n, rank)))
        S = np.eye(rank) / np.sqrt(rank)
    else:
        U = init.U.copy()
        S = init.S.copy()
        V = init.V.copy()
        S /= np.linalg.norm(S)

    def flow_times(U_, S_, V_):
        # A(X) for X = U S V^T, plus the Rayleigh value; X is never formed
        F = op.apply_factored(U_ @ S_, V_)
        rho = float(np.sum((U_.T @ F) * (S_ @ V_.T)))
        _check_finite(rho, "splitting iterate")
        return F, rho

    history: list[HistoryEntry] = []
    X_prev = U @ S @ V.T
    converged = False
    rho = 0.0
    k = 0
    for k in range(1, max_steps + 1):
        # K-step
        F, rho = flow_times(U, S, V)
        K = U @ S + step * (F @ V - rho * (U @ S))
        U1, S_hat = thin_qr(K)
        # S-step (backward)
        F, rho = flow_times(U1, S_hat, V)
        S_tilde = S_hat - step * (U1.T @ F @ V - rho * S_hat)
        # L-step
        F, rho = flow_times(U1, S_tilde, V)
        L = V @ S_tilde.T + step * (F.T @ U1 - rho * (V @ S_tilde.T))
        V1, S1t = thin_qr(L)
        S1 = S1t.T
        s_nrm = float(np.linalg.norm(S1))
        if s_nrm == 0.0 or not np.isfinite(s_nrm):
            raise SolverError("splitting core vanished or blew up")
        U, S, V = U1, S1 / s_nrm, V1
        X = U @ S @ V.T
        delta = float(np.linalg.norm(X - X_prev))
        if keep_history:
            history.append(HistoryEntry(k, rho, delta / step, step))
        X_prev = X
        if delta <= tol * step:
            converged = True
            break

    # the factored state has a global sign gauge (the flow is odd, so X and
    # -X evolve identically); canonicalize to nonnegative total mass so the
    # negative-entry count reflects genuine sign mixing, not the gauge
    if float(np.sum(X_prev)) < 0:
        S = -S
        X_prev = -X_prev
    F, rho = flow_times(U, S, V)
    res = float(np.linalg.norm(F - rho * X_prev))
    return EigenReport(
        method="psi",
        eigenvalue=rho,
        X=X_prev,
        residual=res,
        iterations=k,
        converged=converged,
        wall_time_s=time.perf_counter() - t0,
        neg_count=int(np.count_nonzero(X_prev < 0)),
        psi_state=PSIState(U, S, V),
        history=history,
        details={"rng": "PCG64", "seed": seed, "h": step, "tol": tol},
    )
