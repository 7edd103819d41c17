"""Multi-time memory hiding behind one-step transition statistics.

Two unitaries with identical entrywise squared moduli generate the same
one-step kernel but generally different two-step kernels, because the
squared-moduli map does not respect matrix composition. The distinctions
live in multi-time conditional structure; this module quantifies them:
two-step kernels and their differences, readout through an active channel
(a POVM in disguise), parameter counting, and the affine freedom left in a
three-time conditional law once both two-time kernels are pinned.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatchError, ValidationError
from .kernels import StochasticKernel
from ._arrays import frozen as _frozen, square_complex as _square_complex
from .lifts import TOL_HERM, TOL_PSD, TOL_TP, KrausMap, dictionary_kernel
from .simplex import solve_lp

#: Unitarity tolerance: max-norm deviation of U^dagger U from the identity.
TOL_UNITARY = 1e-10


class PovmEffects:
    """Positive effects summing to the identity; outcome j has probability Tr(E_j rho)."""

    def __init__(self, effects: Sequence[np.ndarray], tol_herm: float = TOL_HERM,
                 tol_psd: float = TOL_PSD, tol_sum: float = TOL_TP):
        ops = [_square_complex(e, "effect") for e in effects]
        if not ops:
            raise ValidationError("a POVM needs at least one effect")
        n = ops[0].shape[0]
        if any(e.shape[0] != n for e in ops):
            raise DimensionMismatchError("effects must share one dimension")
        for idx, e in enumerate(ops):
            herm_err = float(np.abs(e - e.conj().T).max())
            if herm_err > tol_herm:
                raise ValidationError(
                    f"effect {idx} not Hermitian (asymmetry {herm_err:.3e})")
            min_eig = float(np.linalg.eigvalsh((e + e.conj().T) / 2.0)[0])
            if min_eig < -tol_psd:
                raise ValidationError(
                    f"effect {idx} not positive (min eigenvalue {min_eig:.3e})")
        total = sum(ops)
        sum_err = float(np.abs(total - np.eye(n)).max())
        if sum_err > tol_sum:
            raise ValidationError(
                f"effects do not sum to the identity (residual {sum_err:.3e})")
        self._effects = tuple(_frozen(e.copy()) for e in ops)

    @property
    def effects(self) -> tuple[np.ndarray, ...]:
        return self._effects

    @property
    def n(self) -> int:
        return self._effects[0].shape[0]

    def outcome_probabilities(self, rho: np.ndarray) -> np.ndarray:
        """Probabilities Tr(E_j rho) for each outcome j."""
        return np.array([float(np.real(np.trace(e @ rho))) for e in self._effects])

    def __repr__(self):
        return f"PovmEffects(n={self.n}, outcomes={len(self._effects)})"


def mod_square(u) -> np.ndarray:
    """Entrywise squared moduli of a complex matrix."""
    return np.abs(np.asarray(u, dtype=complex)) ** 2


def _require_unitary(u, name: str = "matrix") -> np.ndarray:
    m = _square_complex(u, name)
    residual = float(np.abs(m.conj().T @ m - np.eye(m.shape[0])).max())
    if residual > TOL_UNITARY:
        raise ValidationError(f"{name} is not unitary (residual {residual:.3e})")
    return m


def one_step_indistinguishable(u_x, u_y, tolerance: float = TOL_UNITARY) -> bool:
    """Do two unitaries generate the same one-step kernel?"""
    mx = _require_unitary(u_x, "u_x")
    my = _require_unitary(u_y, "u_y")
    if mx.shape != my.shape:
        raise DimensionMismatchError("unitaries must share one dimension")
    return bool(np.abs(mod_square(mx) - mod_square(my)).max() <= tolerance)


def two_step_kernel(v, u) -> np.ndarray:
    """Kernel of two consecutive unitary steps: squared moduli of the product.

    Generally different from the product of the one-step kernels; that gap is
    exactly the failure of divisibility at the kernel level.
    """
    mv = _require_unitary(v, "v")
    mu = _require_unitary(u, "u")
    if mv.shape != mu.shape:
        raise DimensionMismatchError("unitaries must share one dimension")
    return mod_square(mv @ mu)


def two_step_difference(v, u_x, u_y, x0: int) -> np.ndarray:
    """Two-step statistics separating one-step-indistinguishable realizations.

    Returns column ``x0`` of the difference of the two two-step kernels. Its
    entries always sum to zero (both kernels are column-stochastic), so a
    nonzero result redistributes probability rather than creating it.
    """
    if not one_step_indistinguishable(u_x, u_y):
        raise ValidationError(
            "u_x and u_y are not one-step indistinguishable; the comparison "
            "is only meaningful for realizations sharing a one-step kernel")
    diff = two_step_kernel(v, u_x) - two_step_kernel(v, u_y)
    if not 0 <= x0 < diff.shape[0]:
        raise ValueError(f"basis index {x0} out of range for dimension {diff.shape[0]}")
    return diff[:, x0]


def povm_from_channel(lambda_ops: KrausMap, tol_tp: float = TOL_TP) -> PovmEffects:
    """Effects of reading out in the configuration basis after a channel.

    Coarse-graining the unobserved Kraus branch of the channel turns the
    projective readout into the POVM ``E_j = sum_b L_b^dagger P_j L_b``.
    """
    if lambda_ops.completeness_residual > tol_tp:
        raise ValidationError(
            "channel is not trace preserving (residual "
            f"{lambda_ops.completeness_residual:.3e})")
    n = lambda_ops.n
    effects = []
    for j in range(n):
        proj = np.zeros((n, n), dtype=complex)
        proj[j, j] = 1.0
        effects.append(sum(op.conj().T @ proj @ op for op in lambda_ops.operators))
    return PovmEffects(effects, tol_sum=max(TOL_TP, 2 * lambda_ops.completeness_residual))


def measurement_operators(lambda_ops: KrausMap) -> tuple[tuple[np.ndarray, ...], ...]:
    """Fine-grained operators ``M[j][b] = P_j L_b`` behind the channel POVM.

    Each pair (outcome j, branch b) is a joint event; summing
    ``M^dagger M`` over the unobserved branch index recovers the effects of
    :func:`povm_from_channel`.
    """
    n = lambda_ops.n
    rows = []
    for j in range(n):
        proj = np.zeros((n, n), dtype=complex)
        proj[j, j] = 1.0
        rows.append(tuple(proj @ op for op in lambda_ops.operators))
    return tuple(rows)


def modified_readout_kernel(lambda_ops: KrausMap,
                            evolution: KrausMap) -> StochasticKernel:
    """Kernel of an evolution followed indivisibly by an active readout channel.

    The composed Kraus set ``{L_b K_a}`` is pushed through the squared-moduli
    dictionary in one step; composing the two dictionary kernels instead
    would discard the interference between the branches.
    """
    if lambda_ops.n != evolution.n:
        raise DimensionMismatchError(
            f"channel dimensions differ: {lambda_ops.n} vs {evolution.n}")
    for name, kmap in (("readout channel", lambda_ops), ("evolution", evolution)):
        if not kmap.trace_preserving:
            raise ValidationError(
                f"{name} is not trace preserving "
                f"(residual {kmap.completeness_residual:.3e})")
    composed = KrausMap([lam @ k for lam in lambda_ops.operators
                         for k in evolution.operators])
    return dictionary_kernel(composed, tol_tp=max(
        TOL_TP, 2 * (lambda_ops.completeness_residual
                     + evolution.completeness_residual + 1e-14)))


def dof_counts(n: int, m: int) -> dict[str, int]:
    """Real parameter counts for m steps on n configurations.

    ``path_law``: a general joint law on (m+1)-step paths, ``n**(m+1) - 1``.
    ``unitary_lift``: one unitary per step, ``m * n**2``.
    ``cptp_lift``: one channel per step, ``m * (n**4 - n**2)``.

    The path-law count grows exponentially in m while both lift counts stay
    polynomial: transition data plus a composable lift never pins down the
    full multi-time law.
    """
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise ValueError(f"configuration count must be an integer >= 2, got {n}")
    if not isinstance(m, (int, np.integer)) or m < 1:
        raise ValueError(f"step count must be an integer >= 1, got {m}")
    n, m = int(n), int(m)
    return {
        "path_law": n ** (m + 1) - 1,
        "unitary_lift": m * n * n,
        "cptp_lift": m * (n ** 4 - n ** 2),
    }


@dataclass(frozen=True)
class ThreeTimeFreedomReport:
    """Freedom left in a three-time conditional law given both two-time kernels.

    ``affine_dimension`` is the dimension of the affine solution set of the
    marginalization and normalization constraints (``None`` when they are
    inconsistent). ``sample_conditional`` is a nonnegative solution indexed
    ``[x2, x1, x0]`` when one exists; an interior (strictly positive) sample
    is returned whenever the constraints admit one, in which case the
    nonnegativity boundary does not cut the affine dimension down.
    """

    consistent: bool
    feasible: bool
    strictly_positive: bool
    affine_dimension: int | None
    sample_conditional: np.ndarray | None
    min_entry: float | None


def three_time_freedom(gamma_10: StochasticKernel, gamma_20: StochasticKernel,
                       rank_cutoff: float = 1e-10,
                       interior_tol: float = 1e-9) -> ThreeTimeFreedomReport:
    """Affine freedom in p(x2 | x1, x0) under both two-time kernels.

    The conditional tensor must be normalized over x2 for every (x1, x0) and
    must marginalize through ``gamma_10`` to ``gamma_20``. The dimension of
    the resulting affine set is computed by numerical rank; a strictly
    positive representative is sought with a centering linear program
    (maximize the uniform slack), falling back to a boundary vertex.
    """
    if gamma_10.n != gamma_20.n:
        raise DimensionMismatchError(
            f"kernel dimensions differ: {gamma_10.n} vs {gamma_20.n}")
    n = gamma_10.n
    g10, g20 = gamma_10.matrix, gamma_20.matrix

    def var(x2, x1, x0):
        return (x2 * n + x1) * n + x0

    rows, rhs = [], []
    for x1 in range(n):
        for x0 in range(n):
            row = np.zeros(n ** 3)
            for x2 in range(n):
                row[var(x2, x1, x0)] = 1.0
            rows.append(row)
            rhs.append(1.0)
    for x2 in range(n):
        for x0 in range(n):
            row = np.zeros(n ** 3)
            for x1 in range(n):
                row[var(x2, x1, x0)] = g10[x1, x0]
            rows.append(row)
            rhs.append(g20[x2, x0])
    a = np.asarray(rows)
    b = np.asarray(rhs)

    sv = np.linalg.svd(a, compute_uv=False)
    rank = int((sv > rank_cutoff * sv[0]).sum())
    sv_aug = np.linalg.svd(np.hstack([a, b[:, None]]), compute_uv=False)
    rank_aug = int((sv_aug > rank_cutoff * sv_aug[0]).sum())
    if rank_aug > rank:
        return ThreeTimeFreedomReport(False, False, False, None, None, None)
    affine_dim = n ** 3 - rank

    # Centering program: p = q + t, q >= 0, maximize the uniform slack t.
    a_center = np.hstack([a, (a @ np.ones(n ** 3))[:, None]])
    objective = np.zeros(n ** 3 + 1)
    objective[-1] = 1.0
    result = solve_lp(a_center, b, objective=objective, maximize=True)
    if result.status == "infeasible":
        return ThreeTimeFreedomReport(True, False, False, affine_dim, None, None)
    slack = float(result.x[-1])
    sample = result.x[:-1] + slack
    tensor = sample.reshape(n, n, n)
    return ThreeTimeFreedomReport(
        True, True, slack > interior_tol, affine_dim,
        _frozen(tensor), float(sample.min()))
