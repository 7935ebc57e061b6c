"""Coordinate-descent solvers for linear least squares.

Four methods share one iteration loop and differ only in how the working
column is selected:

* ``ggs``: pick the columns whose residual-gradient entry has the largest
  magnitude, then among those take the one with the largest squared entry
  per unit of squared column norm.  Fully deterministic.
* ``ggs-random``: same candidate set, but the winner is sampled with
  probability proportional to that ratio.
* ``grcd``: an adaptive threshold keeps every column whose normalized
  gradient entry is at least halfway between the norm-weighted mean and
  the maximum; the working column is sampled proportionally to its
  squared entry.
* ``rgs``: sample columns with probability proportional to squared column
  norm, independent of the residual.

Each step moves a single coordinate by alpha = (A[:, j] . r) / ||A[:, j]||^2,
which zeroes the gradient entry of the chosen column.  The residual is
maintained incrementally (one column axpy per step) while the full
gradient A^T r is recomputed fresh every iteration; that split is what
makes the per-iteration cost of the greedy rules comparable.
"""
import time
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .exceptions import AllZeroGradient, ZeroColumn
from .linalg import (
    axpy_column,
    column_dot,
    column_norms_sq,
    energy_error_sq,
    matvec,
    transpose_matvec,
)
from .validation import as_vector

# Incremental residuals are rebuilt from scratch this often to stop
# rounding drift from accumulating over very long runs.
DRIFT_CHECK_INTERVAL = 1000


class Method(Enum):
    GGS = "ggs"
    GGS_RANDOMIZED = "ggs-random"
    GRCD = "grcd"
    RGS = "rgs"

    @property
    def randomized(self):
        return self in (Method.GGS_RANDOMIZED, Method.GRCD, Method.RGS)


class StopReason(Enum):
    RES_REACHED = "res_reached"
    GRADIENT_REACHED = "gradient_reached"
    ITERATION_CAP = "iteration_cap"


@dataclass
class SolverConfig:
    """Knobs for a single solve.

    Args:
        method: which selection rule to run.
        max_iterations: hard cap on coordinate steps.
        res_tolerance: stop once the squared relative solution error
            ||x - x_true||^2 / ||x_true||^2 drops to this value (when the
            true solution is known), or once ||A^T r||^2 falls to this
            fraction of ||A^T b||^2 (when it is not).
        tie_tolerance_rel: relative slack for the argmax candidate set;
            entries within this factor of the maximum count as tied.
        seed: PRNG seed, used by the randomized methods only.
        record_trace: keep a per-iteration record of the solve.
    """

    method: Method = Method.GGS
    max_iterations: int = 200_000
    res_tolerance: float = 1e-6
    tie_tolerance_rel: float = 1e-12
    seed: int = 0
    record_trace: bool = False

    def __post_init__(self):
        if isinstance(self.method, str):
            self.method = Method(self.method)
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.res_tolerance <= 0.0:
            raise ValueError("res_tolerance must be positive")
        if not 0.0 <= self.tie_tolerance_rel < 1.0:
            raise ValueError("tie_tolerance_rel must lie in [0, 1)")


@dataclass
class StepRecord:
    """State at iterate k plus the selection made there.

    The final record of a trace carries state only (the solver stopped
    before selecting), so its selection fields are None.
    """

    iteration: int
    chosen_index: int | None = None
    candidate_set_size: int | None = None
    candidate_norm_sum: float | None = None
    residual_gradient_norm_sq: float | None = None
    energy_error_sq: float | None = None
    res: float | None = None
    threshold: float | None = None  # grcd selection threshold, else None


@dataclass
class SolveReport:
    solution: np.ndarray
    iterations: int
    stop_reason: StopReason
    elapsed_seconds: float
    final_res: float
    trace: list[StepRecord] | None = None
    max_drift_rel: float = 0.0


def ggs_select(s, col_norms_sq, tie_tolerance_rel):
    """Two-stage greedy selection.

    Stage 1 keeps every column whose gradient magnitude is within
    ``tie_tolerance_rel`` (relative) of the maximum; stage 2 picks the
    member maximizing s[j]^2 / ||A[:, j]||^2, lowest index on ties.

    Returns:
        (chosen index, candidate index array).

    Raises:
        AllZeroGradient: if s is identically zero.
        ZeroColumn: if a candidate column has zero squared norm.
    """
    abs_s = np.abs(s)
    s_max = abs_s.max()
    if s_max == 0.0:
        raise AllZeroGradient("gradient is zero; the normal equation is satisfied")
    candidates = np.flatnonzero(abs_s >= (1.0 - tie_tolerance_rel) * s_max)
    norms = col_norms_sq[candidates]
    if np.any(norms <= 0.0):
        raise ZeroColumn("candidate column has zero norm")
    ratios = s[candidates] ** 2 / norms
    return int(candidates[int(np.argmax(ratios))]), candidates


def ggs_randomized_select(s, col_norms_sq, tie_tolerance_rel, rng):
    """Like ggs_select, but samples from the candidate set with
    probability proportional to s[j]^2 / ||A[:, j]||^2."""
    abs_s = np.abs(s)
    s_max = abs_s.max()
    if s_max == 0.0:
        raise AllZeroGradient("gradient is zero; the normal equation is satisfied")
    candidates = np.flatnonzero(abs_s >= (1.0 - tie_tolerance_rel) * s_max)
    norms = col_norms_sq[candidates]
    if np.any(norms <= 0.0):
        raise ZeroColumn("candidate column has zero norm")
    weights = s[candidates] ** 2 / norms
    return int(candidates[_sample_inverse_cdf(weights, rng)]), candidates


def grcd_select(s, col_norms_sq, frob_sq, rng):
    """Threshold-based randomized selection.

    The threshold is the average of the largest normalized gradient ratio
    (relative to ||s||^2) and 1 / ||A||_F^2; every column whose squared
    gradient entry clears threshold * ||s||^2 * ||A[:, j]||^2 is kept, and
    the working column is sampled with probability proportional to its
    squared gradient entry.

    Returns:
        (chosen index, member index array, threshold).
    """
    if np.any(col_norms_sq <= 0.0):
        raise ZeroColumn("all columns must have positive norm")
    sq = s * s
    s_norm_sq = float(sq.sum())
    if s_norm_sq == 0.0:
        raise AllZeroGradient("gradient is zero; the normal equation is satisfied")
    ratios = sq / col_norms_sq
    best = int(np.argmax(ratios))
    threshold = 0.5 * (ratios[best] / s_norm_sq + 1.0 / frob_sq)
    mask = sq >= threshold * s_norm_sq * col_norms_sq
    # The maximizing column always qualifies mathematically; force it in
    # so borderline rounding cannot leave the set empty.
    mask[best] = True
    members = np.flatnonzero(mask)
    chosen = int(members[_sample_inverse_cdf(sq[members], rng)])
    return chosen, members, float(threshold)


def rgs_select(col_norms_sq, frob_sq, rng):
    """Sample a column with probability ||A[:, j]||^2 / ||A||_F^2."""
    if frob_sq <= 0.0:
        raise ValueError("frob_sq must be positive")
    return int(_sample_inverse_cdf(col_norms_sq, rng))


def _sample_inverse_cdf(weights, rng):
    """Draw an index proportionally to nonnegative weights (one uniform)."""
    cum = np.cumsum(weights)
    u = rng.random() * cum[-1]
    return min(int(np.searchsorted(cum, u, side="right")), len(cum) - 1)


def step(x, r, A, j, col_norm_sq_j):
    """One coordinate update on column j, mutating x and r in place.

    alpha is computed from the residual before mutation; afterwards the
    new residual is orthogonal to the chosen column.
    """
    if col_norm_sq_j <= 0.0:
        raise ZeroColumn(f"column {j} has zero norm")
    alpha = column_dot(A, j, r) / col_norm_sq_j
    x[j] += alpha
    axpy_column(r, A, j, -alpha)
    return x, r


def solve(problem, config, x0=None):
    """Run the configured method on a least-squares problem.

    Starts from the zero vector unless ``x0`` is given.  Stops when the
    squared relative solution error reaches ``res_tolerance`` (known
    solution), when the squared gradient norm falls to ``res_tolerance``
    times its initial value (unknown solution), or at the iteration cap.

    Args:
        problem: an LsqProblem (matrix, rhs, optional known solution).
        config: a SolverConfig.
        x0: optional warm start; the benchmark protocol never passes one.

    Returns:
        SolveReport with the solution, iteration count, stop reason,
        elapsed wall time and (optionally) the per-iteration trace.
    """
    A = problem.matrix
    m, n = A.shape
    b = as_vector(problem.rhs, size=m, name="rhs")
    x_star = problem.known_solution
    if x_star is not None:
        x_star = as_vector(x_star, size=n, name="known_solution")

    method = config.method
    rng = np.random.default_rng(config.seed) if method.randomized else None
    record = config.record_trace
    tol = config.res_tolerance

    t_start = time.perf_counter()
    col_norms = column_norms_sq(A)
    frob_sq = float(col_norms.sum())

    if x0 is None:
        x = np.zeros(n)
        r = b.copy()
    else:
        x = as_vector(x0, size=n, name="x0").copy()
        r = b - matvec(A, x)
    b_norm = float(np.linalg.norm(b))

    x_star_norm_sq = float(np.dot(x_star, x_star)) if x_star is not None else 0.0
    use_res_stop = x_star is not None and x_star_norm_sq > 0.0
    grad0_sq = None
    if not use_res_stop:
        s0 = transpose_matvec(A, b)
        grad0_sq = float(np.dot(s0, s0))

    # The gradient is needed for selection by every method except rgs,
    # and for the trace / gradient stopping rule regardless of method;
    # its norm only matters for the latter two.
    need_gradient = method is not Method.RGS or record or not use_res_stop
    need_gradient_norm = record or not use_res_stop

    trace = [] if record else None
    max_drift = 0.0
    stop_reason = None
    final_res = 0.0
    k = 0

    while True:
        s = transpose_matvec(A, r) if need_gradient else None
        grad_sq = float(np.dot(s, s)) if s is not None and need_gradient_norm else None

        res = None
        energy = None
        if x_star is not None:
            d = x - x_star
            res = float(np.dot(d, d)) / x_star_norm_sq if x_star_norm_sq > 0.0 else float(np.dot(d, d))
            if record:
                energy = energy_error_sq(A, x, x_star)

        if use_res_stop:
            if res <= tol:
                stop_reason, final_res = StopReason.RES_REACHED, res
                break
        else:
            if grad_sq <= tol * grad0_sq:
                stop_reason = StopReason.GRADIENT_REACHED
                final_res = grad_sq / grad0_sq if grad0_sq > 0.0 else 0.0
                break
        if k >= config.max_iterations:
            stop_reason = StopReason.ITERATION_CAP
            final_res = res if use_res_stop else (grad_sq / grad0_sq if grad0_sq > 0.0 else 0.0)
            break

        try:
            threshold = None
            if method is Method.GGS:
                j, cand = ggs_select(s, col_norms, config.tie_tolerance_rel)
                set_size, norm_sum = len(cand), float(col_norms[cand].sum())
            elif method is Method.GGS_RANDOMIZED:
                j, cand = ggs_randomized_select(s, col_norms, config.tie_tolerance_rel, rng)
                set_size, norm_sum = len(cand), float(col_norms[cand].sum())
            elif method is Method.GRCD:
                j, members, threshold = grcd_select(s, col_norms, frob_sq, rng)
                set_size, norm_sum = len(members), float(col_norms[members].sum())
            else:
                j = rgs_select(col_norms, frob_sq, rng)
                set_size, norm_sum = 1, float(col_norms[j])
        except AllZeroGradient:
            stop_reason = StopReason.GRADIENT_REACHED
            final_res = res if use_res_stop else 0.0
            break

        if record:
            trace.append(StepRecord(
                iteration=k,
                chosen_index=j,
                candidate_set_size=set_size,
                candidate_norm_sum=norm_sum,
                residual_gradient_norm_sq=grad_sq,
                energy_error_sq=energy,
                res=res,
                threshold=threshold,
            ))

        step(x, r, A, j, col_norms[j])
        k += 1

        if k % DRIFT_CHECK_INTERVAL == 0:
            # Drift is judged relative to ||b|| = ||r_0||: on consistent
            # problems the current residual shrinks to rounding level, so
            # normalizing by it would be meaningless.
            fresh = b - matvec(A, x)
            drift = float(np.linalg.norm(r - fresh))
            if b_norm > 0.0:
                drift /= b_norm
            max_drift = max(max_drift, drift)
            r = fresh

    elapsed = time.perf_counter() - t_start

    if record:
        # Close the trace with a state-only record for the final iterate.
        s = transpose_matvec(A, r)
        final_energy = energy_error_sq(A, x, x_star) if x_star is not None else None
        if x_star is not None:
            d = x - x_star
            final_res_entry = float(np.dot(d, d)) / x_star_norm_sq if x_star_norm_sq > 0.0 else float(np.dot(d, d))
        else:
            final_res_entry = None
        trace.append(StepRecord(
            iteration=k,
            residual_gradient_norm_sq=float(np.dot(s, s)),
            energy_error_sq=final_energy,
            res=final_res_entry,
        ))

    return SolveReport(
        solution=x,
        iterations=k,
        stop_reason=stop_reason,
        elapsed_seconds=elapsed,
        final_res=final_res,
        trace=trace,
        max_drift_rel=max_drift,
    )
