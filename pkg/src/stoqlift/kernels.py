"""Finite-state stochastic kernels and classical-side operations.

Conventions used throughout the package: transition matrices are
column-stochastic (each column is a probability distribution) and act on
probability column vectors from the left, ``p_later = kernel @ p_earlier``.
A two-parameter family ``kernel(t, s)`` maps the distribution at time ``s``
to the one at time ``t >= s``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import expm

from ._arrays import frozen as _frozen
from .errors import DimensionMismatchError, ValidationError
from .simplex import solve_lp

#: Entrywise negativity tolerance for probabilities; smaller violations clamp to zero.
TOL_PROB = 1e-12
#: Column-sum tolerance for stochastic matrices.
TOL_STOCH = 1e-10
#: Condition-number cap above which divisibility falls back to linear feasibility.
CONDITION_CAP = 1e12


@dataclass(frozen=True)
class KernelValidationReport:
    """Outcome of a stochastic-matrix validation.

    ``max_negative_entry`` is the magnitude of the worst negative entry
    (0.0 when all entries are nonnegative); ``max_column_sum_error`` is the
    largest deviation of a column sum from one.
    """

    passed: bool
    max_negative_entry: float
    max_column_sum_error: float
    tol_entry: float
    tol_colsum: float


def validate_kernel(matrix, tol_entry: float = TOL_PROB,
                    tol_colsum: float = TOL_STOCH) -> KernelValidationReport:
    """Check a square real matrix for column-stochasticity.

    Parameters
    ----------
    matrix : array_like, shape (N, N)
        Candidate transition matrix.
    tol_entry, tol_colsum : float
        Allowed entry negativity and column-sum deviation.

    Returns
    -------
    KernelValidationReport

    Raises
    ------
    DimensionMismatchError
        If the input is not a square matrix.
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise DimensionMismatchError(
            f"expected a nonempty square matrix, got shape {m.shape}")
    max_neg = float(max(0.0, -m.min()))
    col_err = float(np.abs(m.sum(axis=0) - 1.0).max())
    passed = max_neg <= tol_entry and col_err <= tol_colsum
    return KernelValidationReport(passed, max_neg, col_err, tol_entry, tol_colsum)


class ProbabilityVector:
    """Probability distribution over N configurations (a column vector).

    Entries may dip below zero by at most ``tol`` (round-off) and are clamped
    to zero in the stored array; larger negativity or a sum away from one is
    a hard error.
    """

    def __init__(self, entries, tol: float = TOL_PROB, tol_sum: float | None = None):
        arr = np.asarray(entries, dtype=float).reshape(-1)
        if arr.size == 0:
            raise DimensionMismatchError("empty probability vector")
        tol_sum = tol if tol_sum is None else tol_sum
        min_entry = float(arr.min())
        if min_entry < -tol:
            raise ValidationError(
                f"negative probability {min_entry:.3e} exceeds tolerance {tol:.1e}")
        sum_err = abs(float(arr.sum()) - 1.0)
        if sum_err > tol_sum:
            raise ValidationError(
                f"entries sum to 1 {sum_err:.3e} away, tolerance {tol_sum:.1e}")
        self._entries = _frozen(np.maximum(arr, 0.0))

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def n(self) -> int:
        return self._entries.size

    @classmethod
    def basis(cls, index: int, n: int) -> "ProbabilityVector":
        """Point mass on configuration ``index``."""
        e = np.zeros(n)
        e[index] = 1.0
        return cls(e)

    def __repr__(self):
        return f"ProbabilityVector({self._entries.tolist()})"


class StochasticKernel:
    """Column-stochastic transition matrix, optionally time-stamped.

    When both time stamps are given and equal, the matrix must be the
    identity (no evolution over zero elapsed time).
    """

    def __init__(self, matrix, from_time: float | None = None,
                 to_time: float | None = None,
                 tol_entry: float = TOL_PROB, tol_colsum: float = TOL_STOCH):
        report = validate_kernel(matrix, tol_entry=tol_entry, tol_colsum=tol_colsum)
        if not report.passed:
            raise ValidationError(
                "matrix is not column-stochastic "
                f"(worst negative entry {report.max_negative_entry:.3e}, "
                f"worst column-sum error {report.max_column_sum_error:.3e})",
                report=report)
        m = np.asarray(matrix, dtype=float)
        if from_time is not None and to_time is not None and from_time == to_time:
            if np.abs(m - np.eye(m.shape[0])).max() > tol_colsum:
                raise ValidationError(
                    "kernel between equal times must be the identity")
        self._matrix = _frozen(np.maximum(m, 0.0))
        self.from_time = from_time
        self.to_time = to_time

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def n(self) -> int:
        return self._matrix.shape[0]

    @classmethod
    def identity(cls, n: int, from_time: float | None = None,
                 to_time: float | None = None) -> "StochasticKernel":
        return cls(np.eye(n), from_time=from_time, to_time=to_time)

    def __repr__(self):
        times = ""
        if self.from_time is not None or self.to_time is not None:
            times = f", from_time={self.from_time}, to_time={self.to_time}"
        return f"StochasticKernel({self._matrix.tolist()}{times})"


class RateMatrix:
    """Generator of a continuous-time Markov chain.

    Off-diagonal entries are nonnegative transition rates (units 1/time) and
    every column sums to zero, so that probability is conserved.
    """

    def __init__(self, matrix, tol: float = TOL_STOCH):
        m = np.asarray(matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
            raise DimensionMismatchError(
                f"expected a nonempty square matrix, got shape {m.shape}")
        off = m[~np.eye(m.shape[0], dtype=bool)]
        if off.size and off.min() < -tol:
            raise ValidationError(
                f"negative off-diagonal rate {off.min():.3e}")
        col_err = float(np.abs(m.sum(axis=0)).max())
        if col_err > tol:
            raise ValidationError(
                f"columns must sum to zero, worst deviation {col_err:.3e}")
        self._matrix = _frozen(m.copy())

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def n(self) -> int:
        return self._matrix.shape[0]

    def __repr__(self):
        return f"RateMatrix({self._matrix.tolist()})"


class KernelFamily:
    """Two-parameter family of transition kernels over a time grid.

    ``kernel_fn(t, s)`` must produce the transition matrix from time ``s`` to
    time ``t >= s``; the family is checked to return the identity at equal
    times for every grid point.
    """

    def __init__(self, grid: Sequence[float],
                 kernel_fn: Callable[[float, float], object],
                 tol_identity: float = TOL_STOCH):
        g = np.asarray(grid, dtype=float)
        if g.ndim != 1 or g.size < 1:
            raise DimensionMismatchError("grid must be a nonempty 1-d sequence")
        if g.size > 1 and not np.all(np.diff(g) > 0):
            raise ValidationError("grid times must be strictly increasing")
        self.grid = _frozen(g.copy())
        self._fn = kernel_fn
        for s in self.grid:
            k = self.kernel(float(s), float(s))
            if np.abs(k.matrix - np.eye(k.n)).max() > tol_identity:
                raise ValidationError(
                    f"kernel({s}, {s}) is not the identity")

    def kernel(self, t: float, s: float) -> StochasticKernel:
        if t < s:
            raise ValueError(f"kernel requires t >= s, got t={t}, s={s}")
        out = self._fn(t, s)
        if isinstance(out, StochasticKernel):
            return out
        return StochasticKernel(np.asarray(out, dtype=float),
                                from_time=s, to_time=t)

    @classmethod
    def from_rate_matrix(cls, rate: RateMatrix | np.ndarray,
                         grid: Sequence[float]) -> "KernelFamily":
        """Semigroup family ``exp((t - s) R)`` of a constant rate matrix."""
        r = rate if isinstance(rate, RateMatrix) else RateMatrix(rate)
        return cls(grid, lambda t, s: expm((t - s) * r.matrix))

    @classmethod
    def from_theta(cls, theta_fn: Callable[[float, float], np.ndarray],
                   grid: Sequence[float]) -> "KernelFamily":
        """Family of squared moduli ``|theta(t, s)|**2`` of a complex matrix."""
        return cls(grid, lambda t, s: np.abs(np.asarray(theta_fn(t, s))) ** 2)


def compose(later: StochasticKernel, earlier: StochasticKernel) -> StochasticKernel:
    """Chain two kernels: first ``earlier``, then ``later`` (matrix product).

    Column-stochasticity of the product is guaranteed analytically and
    revalidated with tolerances widened by the dimension to absorb the
    accumulated round-off.
    """
    if later.n != earlier.n:
        raise DimensionMismatchError(
            f"cannot compose kernels of dimension {later.n} and {earlier.n}")
    if (later.from_time is not None and earlier.to_time is not None
            and later.from_time != earlier.to_time):
        raise ValidationError(
            f"time chain broken: earlier ends at {earlier.to_time}, "
            f"later starts at {later.from_time}")
    n = later.n
    return StochasticKernel(later.matrix @ earlier.matrix,
                            from_time=earlier.from_time, to_time=later.to_time,
                            tol_entry=TOL_PROB * n, tol_colsum=TOL_STOCH * n)


@dataclass(frozen=True)
class CkTripleResidual:
    s: float
    u: float
    t: float
    residual: float


@dataclass(frozen=True)
class CkFamilyReport:
    """Composition-law residuals for every ordered grid triple s < u < t."""

    passed: bool
    max_residual: float
    triples: tuple[CkTripleResidual, ...]


def check_ck_family(family: KernelFamily, tolerance: float = TOL_STOCH) -> CkFamilyReport:
    """Test the composition law kernel(t,s) = kernel(t,u) @ kernel(u,s).

    Every ordered triple of grid times is checked; the residual is the
    max-norm difference between the direct kernel and the composed one.
    """
    grid = family.grid
    if grid.size < 3:
        raise ValueError("composition check needs a grid with at least 3 times")
    rows = []
    worst = 0.0
    for i, j, k in itertools.combinations(range(grid.size), 3):
        s, u, t = float(grid[i]), float(grid[j]), float(grid[k])
        direct = family.kernel(t, s).matrix
        chained = family.kernel(t, u).matrix @ family.kernel(u, s).matrix
        res = float(np.abs(direct - chained).max())
        worst = max(worst, res)
        rows.append(CkTripleResidual(s, u, t, res))
    return CkFamilyReport(worst <= tolerance, worst, tuple(rows))


@dataclass(frozen=True)
class CDivisibilityResult:
    """Verdict of a classical divisibility query.

    ``witness`` is the stochastic factor when divisible. For the inverse
    route an indivisible verdict carries the validation report of the unique
    linear candidate; for the feasibility route it carries the constraint
    rows that cannot be satisfied and the residual infeasibility mass.
    """

    divisible: bool
    witness: StochasticKernel | None
    route: str
    candidate_validation: KernelValidationReport | None = None
    infeasibility: float | None = None
    violated_constraints: tuple[str, ...] = ()


def c_divisibility_check(gamma_20: StochasticKernel, gamma_10: StochasticKernel,
                         tolerance: float = 1e-9) -> CDivisibilityResult:
    """Decide whether gamma_20 factors as (stochastic) @ gamma_10.

    When ``gamma_10`` is well conditioned the unique linear candidate
    ``gamma_20 @ inv(gamma_10)`` settles the question. Otherwise the
    existence of a stochastic factor is a linear feasibility problem solved
    by a phase-1 simplex.
    """
    if gamma_20.n != gamma_10.n:
        raise DimensionMismatchError(
            f"kernel dimensions differ: {gamma_20.n} vs {gamma_10.n}")
    n = gamma_10.n
    g10 = gamma_10.matrix
    g20 = gamma_20.matrix

    cond = np.linalg.cond(g10)
    if np.isfinite(cond) and cond < CONDITION_CAP:
        candidate = g20 @ np.linalg.inv(g10)
        report = validate_kernel(candidate, tol_entry=tolerance, tol_colsum=tolerance)
        if report.passed:
            witness = StochasticKernel(candidate, tol_entry=tolerance,
                                       tol_colsum=tolerance)
            return CDivisibilityResult(True, witness, "inverse",
                                       candidate_validation=report)
        return CDivisibilityResult(False, None, "inverse",
                                   candidate_validation=report)

    # Feasibility fallback: find X >= 0 with X g10 = g20 and unit column sums.
    # Variables are the row-major entries of X.
    labels = []
    a_rows = []
    b = []
    for i in range(n):
        for j in range(n):
            row = np.zeros(n * n)
            row[i * n:(i + 1) * n] = g10[:, j]
            a_rows.append(row)
            b.append(g20[i, j])
            labels.append(f"product[{i},{j}]")
    for j in range(n):
        row = np.zeros(n * n)
        row[j::n] = 1.0
        a_rows.append(row)
        b.append(1.0)
        labels.append(f"colsum[{j}]")
    result = solve_lp(np.asarray(a_rows), np.asarray(b))
    if result.status == "infeasible":
        return CDivisibilityResult(
            False, None, "feasibility",
            infeasibility=result.infeasibility,
            violated_constraints=tuple(labels[r] for r in result.violated_rows))
    witness_matrix = result.x.reshape(n, n)
    witness = StochasticKernel(witness_matrix,
                               tol_entry=max(tolerance, 1e-9),
                               tol_colsum=max(tolerance, 1e-9))
    return CDivisibilityResult(True, witness, "feasibility", infeasibility=0.0)


@dataclass(frozen=True)
class ShortTimeReport:
    """Finite-difference short-time structure of a kernel family at a time t.

    ``first_derivative`` estimates the rate of departure from the identity,
    ``second_derivative`` its curvature; ``leakage_exponent`` is the ordinary
    least-squares log-log slope of the off-diagonal mass of
    ``kernel(t + h, t)`` against the step ``h``.
    """

    first_derivative: np.ndarray
    second_derivative: np.ndarray
    step_used: float
    leakage_exponent: float
    steps: tuple[float, ...]
    leakage_masses: tuple[float, ...]


def _offdiagonal_mass(matrix: np.ndarray) -> float:
    off = matrix[~np.eye(matrix.shape[0], dtype=bool)]
    return float(np.abs(off).sum())


def short_time_derivatives(family: KernelFamily, t: float,
                           steps: Sequence[float]) -> ShortTimeReport:
    """Estimate the first two step-derivatives of ``kernel(t + h, t)`` at h = 0.

    Kernels are only defined forward in time, so the stencils are one-sided,
    anchored at the exact identity value at zero elapsed time; with the two
    smallest steps they are second-order accurate for the first derivative.
    """
    hs = sorted({float(h) for h in steps})
    if any(h <= 0 for h in hs):
        raise ValueError("all step sizes must be positive")
    if len(hs) < 2:
        raise ValueError("need at least two distinct step sizes")
    values = {h: family.kernel(t + h, t).matrix for h in hs}
    n = values[hs[0]].shape[0]
    eye = np.eye(n)

    h1, h2 = hs[0], hs[1]
    g1, g2 = values[h1], values[h2]
    gap = h2 - h1
    d1 = (-(h1 + h2) / (h1 * h2)) * eye \
        + (h2 / (h1 * gap)) * g1 - (h1 / (h2 * gap)) * g2
    d2 = 2.0 * (eye / (h1 * h2) - g1 / (h1 * gap) + g2 / (h2 * gap))

    masses = [_offdiagonal_mass(values[h]) for h in hs]
    floored = np.maximum(masses, np.finfo(float).tiny)
    slope = float(np.polyfit(np.log(hs), np.log(floored), 1)[0])
    return ShortTimeReport(_frozen(d1), _frozen(d2), h1, slope,
                           tuple(hs), tuple(masses))


def ctmc_propagate(rate: RateMatrix, p0: ProbabilityVector,
                   t: float) -> ProbabilityVector:
    """Evolve ``p0`` for time ``t`` under the master equation dp/dt = R p."""
    if t < 0:
        raise ValueError(f"propagation time must be nonnegative, got {t}")
    p = expm(t * rate.matrix) @ p0.entries
    return ProbabilityVector(p, tol=TOL_STOCH, tol_sum=TOL_STOCH)


@dataclass(frozen=True)
class ScalingRow:
    epsilon: float
    n_steps: int
    sup_error: float


def dtmc_to_ctmc_scaling(rate: RateMatrix, t_star: float, t: float,
                         epsilons: Sequence[float]) -> tuple[ScalingRow, ...]:
    """Accelerated-sampling convergence of a quadratically-leaking chain.

    For each ``eps`` the one-step matrix ``I + eps**2 * t_star * R`` is raised
    to the power ``floor(t / (eps**2 * t_star))`` by repeated squaring and
    compared in sup-norm against ``exp(t R)``. Errors shrink as ``eps**2``.
    """
    if t < 0:
        raise ValueError(f"target time must be nonnegative, got {t}")
    if t_star <= 0:
        raise ValueError(f"microscopic time scale must be positive, got {t_star}")
    target = expm(t * rate.matrix)
    rows = []
    for eps in epsilons:
        eps = float(eps)
        if eps <= 0:
            raise ValueError(f"epsilon must be positive, got {eps}")
        dt = eps * eps * t_star
        step_matrix = np.eye(rate.n) + dt * rate.matrix
        report = validate_kernel(step_matrix)
        if not report.passed:
            raise ValidationError(
                f"epsilon={eps} is too large for the given rates: one-step "
                "matrix fails stochastic validation "
                f"(worst negative entry {report.max_negative_entry:.3e})",
                report=report)
        # Absolute nudge before floor: exact divisions like 1/0.1**2 land a
        # hair below the integer in binary floating point.
        n_steps = int(math.floor(t / dt + 1e-9))
        power = np.linalg.matrix_power(step_matrix, n_steps)
        rows.append(ScalingRow(eps, n_steps, float(np.abs(power - target).max())))
    return tuple(rows)


@dataclass(frozen=True)
class TrivialityRow:
    n_subdivisions: int
    step: float
    alpha: float
    bound: float
    product_distance: float


def theta_markov_triviality_demo(theta_step: Callable[[float], np.ndarray],
                                 t_minus_s: float,
                                 n_values: Sequence[int],
                                 tol_identity: float = 1e-10
                                 ) -> tuple[TrivialityRow, ...]:
    """Composing many squared-moduli steps of a differentiable matrix family.

    For each subdivision count ``n`` the interval is split into steps of size
    ``h``, the per-step hold-back deficit ``alpha(h) = max_j (1 - diag_j)`` of
    the squared-moduli kernel is measured, and the n-fold kernel product is
    compared against the identity. Both the union bound ``n * alpha(h)`` and
    the product distance shrink as ``n`` grows, so a composition law over
    vanishing steps forces the trivial evolution.
    """
    theta0 = np.asarray(theta_step(0.0))
    if np.abs(theta0 - np.eye(theta0.shape[0])).max() > tol_identity:
        raise ValidationError("theta_step(0) must be the identity")
    rows = []
    for n in n_values:
        n = int(n)
        if n < 1:
            raise ValueError("subdivision counts must be positive")
        h = t_minus_s / n
        theta = np.asarray(theta_step(h))
        gamma = StochasticKernel(np.abs(theta) ** 2)
        alpha = float(max(0.0, (1.0 - np.diag(gamma.matrix)).max()))
        product = np.linalg.matrix_power(gamma.matrix, n)
        dist = float(np.abs(product - np.eye(gamma.n)).max())
        rows.append(TrivialityRow(n, h, alpha, n * alpha, dist))
    return tuple(rows)
