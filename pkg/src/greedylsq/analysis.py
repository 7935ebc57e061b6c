"""Convergence-theory checks for the deterministic greedy method.

The greedy two-stage method contracts the squared energy error by a
computable factor every step: the first step by at least
``1 - lambda_min / (|C_0| * S_0 * n)`` and every later step by at least
``1 - lambda_min / (|C_k| * S_k * (n - 1))``, where C_k is the candidate
set, S_k the sum of its squared column norms and lambda_min the smallest
eigenvalue of the Gram matrix A^T A.  The later steps get the sharper
1/(n-1) constant because each step leaves the gradient entry of the
previously chosen column exactly zero.

``verify_trace`` replays a recorded solve against those per-step factors;
``grcd_expected_factor`` gives the corresponding expected-contraction
factor of the threshold-based randomized method for comparison.
"""
from dataclasses import dataclass, field

import numpy as np

from .exceptions import (
    FactorOutOfRange,
    MissingEnergyError,
    NotApplicable,
    RankDeficient,
)
from .linalg import column_norms_sq
from .validation import is_sparse

# Absolute slack on measured contraction ratios, absorbing rounding in
# the recorded energy errors.
RATIO_SLACK = 1e-9


def gram_matrix(A):
    """Dense n x n Gram matrix A^T A."""
    G = (A.T @ A)
    if is_sparse(G):
        G = G.toarray()
    return np.asarray(G, dtype=np.float64)


def jacobi_eigenvalues(G, rel_tolerance=1e-10, max_sweeps=60):
    """All eigenvalues of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps until the off-diagonal Frobenius norm drops below
    ``rel_tolerance`` times the Frobenius norm of G (internally pushed
    near machine precision, which costs at most an extra sweep thanks to
    the quadratic tail of Jacobi iteration).

    Returns eigenvalues in ascending order.
    """
    G = np.array(G, dtype=np.float64)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise ValueError("Jacobi iteration needs a square matrix")
    G = 0.5 * (G + G.T)
    n = G.shape[0]
    if n == 1:
        return G[0, :1].copy()
    norm_f = float(np.linalg.norm(G))
    if norm_f == 0.0:
        return np.zeros(n)

    # Tighter than the caller's tolerance so small eigenvalues keep full
    # relative accuracy; see the smallest-eigenvalue contract below.
    target = min(rel_tolerance, 1e-14) * norm_f
    skip = target / n

    for _ in range(max_sweeps):
        # Norm of the off-diagonal part, summed directly (subtracting the
        # diagonal from ||G||_F^2 would cancel catastrophically).
        off = float(np.linalg.norm(G - np.diag(np.diag(G))))
        if off <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = G[p, q]
                if abs(apq) <= skip:
                    continue
                tau = (G[q, q] - G[p, p]) / (2.0 * apq)
                t = np.sign(tau) / (abs(tau) + np.hypot(1.0, tau)) if tau != 0.0 else 1.0
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                col_p = G[:, p].copy()
                col_q = G[:, q].copy()
                G[:, p] = c * col_p - s * col_q
                G[:, q] = s * col_p + c * col_q
                row_p = G[p, :].copy()
                row_q = G[q, :].copy()
                G[p, :] = c * row_p - s * row_q
                G[q, :] = s * row_p + c * row_q
                G[p, q] = 0.0
                G[q, p] = 0.0
    else:
        raise RuntimeError("Jacobi iteration did not converge")
    return np.sort(np.diag(G))


def lambda_min_pos(A, tolerance=1e-10):
    """Smallest eigenvalue of A^T A via the explicit Gram matrix.

    Raises:
        RankDeficient: if the estimate is at most ``tolerance`` times the
            squared Frobenius norm of A, i.e. the matrix has no usable
            smallest positive eigenvalue.
    """
    G = gram_matrix(A)
    eigs = jacobi_eigenvalues(G, rel_tolerance=tolerance)
    lam = float(eigs[0])
    frob_sq = float(np.trace(G))
    if lam <= tolerance * frob_sq:
        raise RankDeficient(
            f"smallest Gram eigenvalue {lam:.3e} is below {tolerance:.1e} * ||A||_F^2"
        )
    return lam


def _check_factor(f, allow_zero=True):
    lo_ok = f >= 0.0 if allow_zero else f > 0.0
    if not (lo_ok and f < 1.0):
        raise FactorOutOfRange(f"contraction factor {f} outside [0, 1)")
    return float(f)


def ggs_first_step_factor(lambda_min, n, set_size, norm_sum):
    """Guaranteed contraction factor of the first greedy step."""
    if lambda_min <= 0.0 or n < 1 or set_size < 1 or norm_sum <= 0.0:
        raise ValueError("all inputs must be positive")
    return _check_factor(1.0 - lambda_min / (set_size * norm_sum * n))


def ggs_per_step_factor(lambda_min, n, set_size, norm_sum):
    """Guaranteed contraction factor of every later greedy step.

    Raises:
        NotApplicable: for n = 1 (a single column converges in one step).
    """
    if n == 1:
        raise NotApplicable("per-step factor is undefined for a single column")
    if lambda_min <= 0.0 or n < 2 or set_size < 1 or norm_sum <= 0.0:
        raise ValueError("all inputs must be positive")
    return _check_factor(1.0 - lambda_min / (set_size * norm_sum * (n - 1)))


def ggs_cumulative_bound(first_factor, per_step_worst, k, initial_energy_error_sq):
    """Energy-error envelope after k steps: worst^(k-1) * first * initial."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return per_step_worst ** (k - 1) * first_factor * initial_energy_error_sq


def grcd_expected_factor(A, lambda_min):
    """Expected contraction factor of the threshold-based randomized method.

    Equals 1 - (1/(||A||_F^2 - min_j ||A[:, j]||^2) + 1/||A||_F^2) * lambda_min / 2.

    Raises:
        NotApplicable: for n = 1.
    """
    if A.shape[1] == 1:
        raise NotApplicable("expected factor is undefined for a single column")
    norms = column_norms_sq(A)
    frob_sq = float(norms.sum())
    min_norm = float(norms.min())
    f = 1.0 - 0.5 * (1.0 / (frob_sq - min_norm) + 1.0 / frob_sq) * lambda_min
    return _check_factor(f)


@dataclass
class BoundReport:
    """Outcome of checking a recorded greedy solve against its theory.

    ``violations`` lists (iteration, measured ratio, bound) for every step
    whose measured energy contraction exceeded the guaranteed factor plus
    slack; an empty list means the theory held throughout.
    """

    lambda_min: float
    max_set_size: int = 0
    max_norm_sum: float = 0.0
    first_step_factor: float | None = None
    per_step_factors: list[float] = field(default_factory=list)
    cumulative_factor: float | None = None
    grcd_expected: float | None = None
    violations: list[tuple[int, float, float]] = field(default_factory=list)

    def to_text(self):
        """Serialize as key: value lines."""
        lines = [
            f"lambda_min: {self.lambda_min:.12e}",
            f"max_set_size: {self.max_set_size}",
            f"max_norm_sum: {self.max_norm_sum:.12e}",
            f"first_step_factor: {_fmt_opt(self.first_step_factor)}",
            f"worst_per_step_factor: {_fmt_opt(max(self.per_step_factors) if self.per_step_factors else None)}",
            f"cumulative_factor: {_fmt_opt(self.cumulative_factor)}",
            f"grcd_expected_factor: {_fmt_opt(self.grcd_expected)}",
            f"steps_checked: {len(self.per_step_factors) + (1 if self.first_step_factor is not None else 0)}",
            f"violations: {len(self.violations)}",
        ]
        for it, meas, bound in self.violations:
            lines.append(f"violation: iteration={it} measured={meas:.12e} bound={bound:.12e}")
        return "\n".join(lines) + "\n"

    @staticmethod
    def csv_header():
        return "lambda_min,max_set_size,max_norm_sum,first_step_factor,cumulative_factor,grcd_expected_factor,violations"

    def csv_row(self):
        return ",".join([
            f"{self.lambda_min:.12e}",
            str(self.max_set_size),
            f"{self.max_norm_sum:.12e}",
            _fmt_opt(self.first_step_factor),
            _fmt_opt(self.cumulative_factor),
            _fmt_opt(self.grcd_expected),
            str(len(self.violations)),
        ])


def _fmt_opt(v):
    return "" if v is None else f"{v:.12e}"


def verify_trace(trace, lambda_min, n):
    """Check a recorded greedy trace against the per-step factors.

    The measured contraction ratio energy(k+1) / energy(k) of every step
    must not exceed the guaranteed factor by more than RATIO_SLACK.

    Args:
        trace: list of StepRecord from a solve with a known solution,
            ending in the state-only terminal record.
        lambda_min: smallest eigenvalue of the Gram matrix.
        n: number of columns.

    Raises:
        MissingEnergyError: if any record lacks energy data.
    """
    report = BoundReport(lambda_min=lambda_min)
    if not trace:
        return report

    step_records = [rec for rec in trace if rec.chosen_index is not None]
    if any(rec.energy_error_sq is None for rec in trace):
        raise MissingEnergyError("trace was recorded without a known solution")

    if step_records:
        report.max_set_size = max(rec.candidate_set_size for rec in step_records)
        report.max_norm_sum = max(rec.candidate_norm_sum for rec in step_records)

    for idx in range(len(trace) - 1):
        rec, nxt = trace[idx], trace[idx + 1]
        if rec.chosen_index is None:
            continue
        if rec.iteration == 0:
            factor = ggs_first_step_factor(lambda_min, n, rec.candidate_set_size, rec.candidate_norm_sum)
            report.first_step_factor = factor
        else:
            factor = ggs_per_step_factor(lambda_min, n, rec.candidate_set_size, rec.candidate_norm_sum)
            report.per_step_factors.append(factor)
        measured = nxt.energy_error_sq / rec.energy_error_sq if rec.energy_error_sq > 0.0 else 0.0
        if measured > factor + RATIO_SLACK:
            report.violations.append((rec.iteration, measured, factor))

    if step_records and n >= 2 and report.first_step_factor is not None:
        worst = ggs_per_step_factor(lambda_min, n, report.max_set_size, report.max_norm_sum)
        report.cumulative_factor = worst ** (len(step_records) - 1) * report.first_step_factor
    elif report.first_step_factor is not None:
        report.cumulative_factor = report.first_step_factor

    return report
