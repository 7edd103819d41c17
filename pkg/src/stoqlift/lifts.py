"""Operator-side objects and the stochastic-to-quantum dictionary.

A transition kernel is *lifted* to a linear map on N x N complex matrices
whose diagonal restriction reproduces the kernel: embed a probability vector
as a diagonal operator, apply the map, project back onto the diagonal, and
read out the probabilities. Trace preservation of the map corresponds to
column-stochasticity of the induced kernel, complete positivity to its
entrywise nonnegativity.

Vectorization is column-stacking throughout: ``vec(A X B) = kron(B.T, A) vec(X)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from ._arrays import frozen as _frozen, square_complex as _square_complex
from .errors import DimensionMismatchError, ValidationError
from .kernels import (TOL_PROB, TOL_STOCH, CONDITION_CAP, KernelValidationReport,
                      ProbabilityVector, StochasticKernel, validate_kernel)

#: Hermiticity / trace tolerance for operators.
TOL_HERM = 1e-10
#: Eigenvalue floor for positive-semidefiniteness tests (scale-aware, see ChoiMatrix).
TOL_PSD = 1e-9
#: Completeness-sum tolerance for trace preservation.
TOL_TP = 1e-10
#: Relative cutoff below which singular values count as zero.
PINV_RCOND = 1e-12
#: Kraus operators with Frobenius norm below this are dropped.
KRAUS_DROP_NORM = 1e-14


def vec(matrix: np.ndarray) -> np.ndarray:
    """Column-stacking vectorization."""
    return np.asarray(matrix).reshape(-1, order="F")


def unvec(vector: np.ndarray) -> np.ndarray:
    """Inverse of :func:`vec` for square matrices."""
    v = np.asarray(vector).reshape(-1)
    n = round(v.size ** 0.5)
    if n * n != v.size:
        raise DimensionMismatchError(
            f"vector of length {v.size} is not a vectorized square matrix")
    return v.reshape(n, n, order="F")


def diagonal_injection(n: int) -> np.ndarray:
    """The n^2 x n matrix D with vec(diag(p)) = D p.

    Its transpose extracts the diagonal of a vectorized operator.
    """
    d = np.zeros((n * n, n))
    for i in range(n):
        d[i * (n + 1), i] = 1.0
    return d


def dephasing_projector(n: int) -> np.ndarray:
    """The n^2 x n^2 projector P with vec(diag-part of X) = P vec(X)."""
    d = diagonal_injection(n)
    return d @ d.T


class DensityOperator:
    """Hermitian, unit-trace, positive-semidefinite N x N complex matrix."""

    def __init__(self, matrix, tol_herm: float = TOL_HERM, tol_psd: float = TOL_PSD):
        m = _square_complex(matrix, "density operator")
        herm_err = float(np.abs(m - m.conj().T).max())
        if herm_err > tol_herm:
            raise ValidationError(
                f"not Hermitian: worst asymmetry {herm_err:.3e}")
        trace_err = abs(np.trace(m) - 1.0)
        if trace_err > tol_herm:
            raise ValidationError(f"trace differs from 1 by {trace_err:.3e}")
        eigs = np.linalg.eigvalsh((m + m.conj().T) / 2.0)
        if eigs[0] < -tol_psd:
            raise ValidationError(
                f"not positive semidefinite: minimum eigenvalue {eigs[0]:.3e}")
        self._matrix = _frozen(m.copy())

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def n(self) -> int:
        return self._matrix.shape[0]

    @classmethod
    def basis_projector(cls, index: int, n: int) -> "DensityOperator":
        """Rank-one projector onto the ``index``-th configuration basis vector."""
        m = np.zeros((n, n), dtype=complex)
        m[index, index] = 1.0
        return cls(m)

    def __repr__(self):
        return f"DensityOperator(n={self.n})"


class KrausMap:
    """Operator-sum map ``rho -> sum_b K_b rho K_b^dagger``.

    Near-zero operators (Frobenius norm below ``KRAUS_DROP_NORM``) are
    dropped at construction. Trace preservation is recorded as a checked
    flag, not required: short-time maps are only trace preserving to leading
    order. ``canonical_reduction`` re-extracts at most N^2 operators from the
    Choi spectrum when a redundant set has accumulated, e.g. by composition.
    """

    def __init__(self, operators: Iterable[np.ndarray], tol_tp: float = TOL_TP):
        ops = []
        for op in operators:
            m = _square_complex(op, "Kraus operator")
            if np.linalg.norm(m) >= KRAUS_DROP_NORM:
                ops.append(_frozen(m.copy()))
        if not ops:
            raise ValidationError("Kraus map needs at least one nonzero operator")
        n = ops[0].shape[0]
        if any(op.shape[0] != n for op in ops):
            raise DimensionMismatchError("Kraus operators must share one dimension")
        self._operators = tuple(ops)
        completeness = sum(op.conj().T @ op for op in ops)
        self.completeness_residual = float(
            np.abs(completeness - np.eye(n)).max())
        self.trace_preserving = self.completeness_residual <= tol_tp

    @property
    def operators(self) -> tuple[np.ndarray, ...]:
        return self._operators

    @property
    def n(self) -> int:
        return self._operators[0].shape[0]

    @property
    def rank(self) -> int:
        return len(self._operators)

    def canonical_reduction(self, cutoff: float = PINV_RCOND) -> "KrausMap":
        """Minimal Kraus set (at most N^2 operators) from the Choi spectrum."""
        choi = choi_from_kraus(self)
        return kraus_from_choi(choi, cutoff=cutoff)

    def __repr__(self):
        return f"KrausMap(n={self.n}, rank={self.rank})"


class LeftRightMap:
    """General linear map ``rho -> sum_b A_b rho B_b`` (not necessarily positive)."""

    def __init__(self, left_ops: Iterable[np.ndarray], right_ops: Iterable[np.ndarray]):
        left = tuple(_frozen(_square_complex(a, "left operator").copy())
                     for a in left_ops)
        right = tuple(_frozen(_square_complex(b, "right operator").copy())
                      for b in right_ops)
        if len(left) != len(right):
            raise DimensionMismatchError(
                f"left/right operator counts differ: {len(left)} vs {len(right)}")
        if not left:
            raise ValidationError("left-right map needs at least one term")
        n = left[0].shape[0]
        if any(op.shape[0] != n for op in left + right):
            raise DimensionMismatchError("all operators must share one dimension")
        self.left_ops = left
        self.right_ops = right

    @property
    def n(self) -> int:
        return self.left_ops[0].shape[0]

    def __repr__(self):
        return f"LeftRightMap(n={self.n}, terms={len(self.left_ops)})"


class SuperOperator:
    """N^2 x N^2 matrix acting on column-stacked vectorized operators."""

    def __init__(self, matrix):
        m = _square_complex(matrix, "superoperator")
        n = round(m.shape[0] ** 0.5)
        if n * n != m.shape[0]:
            raise DimensionMismatchError(
                f"superoperator side {m.shape[0]} is not a perfect square")
        self._matrix = _frozen(m.copy())
        self._n = n

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def n(self) -> int:
        """Dimension of the underlying operator space (the N in N^2 x N^2)."""
        return self._n

    @classmethod
    def identity(cls, n: int) -> "SuperOperator":
        return cls(np.eye(n * n, dtype=complex))

    def __repr__(self):
        return f"SuperOperator(n={self.n})"


class ChoiMatrix:
    """Choi matrix of a map; positive semidefiniteness encodes complete positivity."""

    def __init__(self, matrix, tol_herm: float = TOL_HERM):
        m = _square_complex(matrix, "Choi matrix")
        herm_err = float(np.abs(m - m.conj().T).max())
        if herm_err > tol_herm:
            raise ValidationError(
                f"Choi matrix not Hermitian: worst asymmetry {herm_err:.3e}")
        self._matrix = _frozen(m.copy())
        self.eigenvalues = _frozen(np.linalg.eigvalsh((m + m.conj().T) / 2.0))

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues[0])

    def is_completely_positive(self, tol_psd: float = TOL_PSD) -> bool:
        """Scale-aware positivity: the floor grows with the spectral magnitude."""
        scale = max(1.0, float(np.abs(self.eigenvalues).max()))
        return self.min_eigenvalue >= -tol_psd * scale


MapLike = Union[KrausMap, LeftRightMap, SuperOperator]


def _apply_matrix(map_: MapLike, x: np.ndarray) -> np.ndarray:
    """Apply any supported map representation to a raw matrix."""
    if isinstance(map_, KrausMap):
        return sum(k @ x @ k.conj().T for k in map_.operators)
    if isinstance(map_, LeftRightMap):
        return sum(a @ x @ b for a, b in zip(map_.left_ops, map_.right_ops))
    if isinstance(map_, SuperOperator):
        return unvec(map_.matrix @ vec(x))
    raise TypeError(f"unsupported map type {type(map_).__name__}")


def choi_from_kraus(kmap: KrausMap) -> ChoiMatrix:
    n = kmap.n
    choi = np.zeros((n * n, n * n), dtype=complex)
    for k in kmap.operators:
        v = vec(k)
        choi += np.outer(v, v.conj())
    return ChoiMatrix(choi)


def choi_from_superoperator(s: SuperOperator) -> ChoiMatrix:
    """Reshuffle a superoperator into its Choi matrix (an involution)."""
    n = s.n
    choi = s.matrix.reshape(n, n, n, n).transpose(3, 1, 2, 0).reshape(n * n, n * n)
    return ChoiMatrix(choi)


def kraus_from_choi(choi: ChoiMatrix, cutoff: float = PINV_RCOND) -> KrausMap:
    """Kraus operators from the eigendecomposition of a PSD Choi matrix."""
    n = round(choi.matrix.shape[0] ** 0.5)
    eigvals, eigvecs = np.linalg.eigh(
        (choi.matrix + choi.matrix.conj().T) / 2.0)
    scale = max(float(eigvals.max()), 1.0)
    ops = []
    for lam, v in zip(eigvals[::-1], eigvecs.T[::-1]):
        if lam > cutoff * scale:
            ops.append(np.sqrt(lam) * unvec(v))
    if not ops:
        raise ValidationError("Choi matrix has no positive spectral weight")
    return KrausMap(ops)


def embed_diagonal(p: ProbabilityVector) -> DensityOperator:
    """Represent a probability vector as a diagonal density operator."""
    return DensityOperator(np.diag(p.entries.astype(complex)))


def dephase(rho: DensityOperator) -> DensityOperator:
    """Project onto the diagonal in the configuration basis (idempotent, trace preserving)."""
    return DensityOperator(np.diag(np.diag(rho.matrix)))


def readout(rho: DensityOperator, require_diagonal: bool = False,
            tol: float = TOL_HERM) -> ProbabilityVector:
    """Diagonal entries of a density operator as a probability vector.

    With ``require_diagonal`` the off-diagonal mass must not exceed ``tol``;
    otherwise the operator is dephased first.
    """
    m = rho.matrix
    off = m - np.diag(np.diag(m))
    off_mass = float(np.abs(off).max()) if m.shape[0] > 1 else 0.0
    if require_diagonal and off_mass > tol:
        raise ValidationError(
            f"operator is not diagonal: off-diagonal mass {off_mass:.3e}")
    return ProbabilityVector(np.real(np.diag(m)), tol=TOL_HERM, tol_sum=TOL_HERM)


def apply_kraus(kmap: KrausMap, rho: DensityOperator) -> DensityOperator:
    """Apply an operator-sum map to a state.

    Hermiticity and positivity are preserved for any Kraus set; the trace is
    preserved exactly when the map is trace preserving, so the result is
    validated as a density operator.
    """
    if kmap.n != rho.n:
        raise DimensionMismatchError(
            f"map dimension {kmap.n} does not match state dimension {rho.n}")
    return DensityOperator(_apply_matrix(kmap, rho.matrix))


@dataclass(frozen=True)
class CptpReport:
    """Trace-preservation and complete-positivity check of a map."""

    trace_preserving: bool
    tp_residual: float
    completely_positive: bool
    min_choi_eigenvalue: float

    @property
    def passed(self) -> bool:
        return self.trace_preserving and self.completely_positive


def check_cptp(map_: KrausMap | SuperOperator, tol_tp: float = TOL_TP,
               tol_psd: float = TOL_PSD) -> CptpReport:
    """Report whether a map is a quantum channel (CPTP)."""
    if isinstance(map_, KrausMap):
        completeness = sum(k.conj().T @ k for k in map_.operators)
        tp_residual = float(np.abs(completeness - np.eye(map_.n)).max())
        choi = choi_from_kraus(map_)
    elif isinstance(map_, SuperOperator):
        vec_id = vec(np.eye(map_.n))
        tp_residual = float(np.abs(vec_id @ map_.matrix - vec_id).max())
        choi = choi_from_superoperator(map_)
    else:
        raise TypeError(f"unsupported map type {type(map_).__name__}")
    return CptpReport(tp_residual <= tol_tp, tp_residual,
                      choi.is_completely_positive(tol_psd),
                      choi.min_eigenvalue)


@dataclass(frozen=True)
class InducedKernelReport:
    """Transition kernel read off the diagonal action of a lift.

    Entry (j, i) is the diagonal weight the map sends from basis projector i
    to basis projector j. For Kraus input ``dictionary_residual`` compares
    against the squared-moduli dictionary (the two routes agree identically);
    for left-right input the trace condition ``sum_b B_b A_b = I`` and
    entrywise negativity are flagged, since nothing enforces them there.
    """

    kernel: np.ndarray
    validation: KernelValidationReport
    dictionary_residual: float | None = None
    trace_condition_residual: float | None = None
    has_negative_entries: bool = False


def induced_kernel(map_: MapLike) -> InducedKernelReport:
    """Probe the diagonal of a map on the basis projectors."""
    n = map_.n
    kernel = np.empty((n, n))
    for i in range(n):
        proj = np.zeros((n, n), dtype=complex)
        proj[i, i] = 1.0
        kernel[:, i] = np.real(np.diag(_apply_matrix(map_, proj)))
    validation = validate_kernel(kernel)
    if isinstance(map_, KrausMap):
        moduli = sum(np.abs(k) ** 2 for k in map_.operators)
        return InducedKernelReport(
            _frozen(kernel), validation,
            dictionary_residual=float(np.abs(kernel - moduli).max()))
    if isinstance(map_, LeftRightMap):
        trace_cond = sum(b @ a for a, b in zip(map_.left_ops, map_.right_ops))
        return InducedKernelReport(
            _frozen(kernel), validation,
            trace_condition_residual=float(np.abs(trace_cond - np.eye(n)).max()),
            has_negative_entries=bool(kernel.min() < -TOL_PROB))
    return InducedKernelReport(_frozen(kernel), validation)


def dictionary_kernel(kmap: KrausMap, tol_tp: float = TOL_TP) -> StochasticKernel:
    """Squared-moduli dictionary: kernel entry (j, i) = sum_b |K_b[j, i]|^2.

    Trace preservation of the map makes the result column-stochastic, so a
    non-trace-preserving map is rejected with its completeness residual.
    """
    if kmap.completeness_residual > tol_tp:
        raise ValidationError(
            "map is not trace preserving: completeness residual "
            f"{kmap.completeness_residual:.3e} exceeds {tol_tp:.1e}")
    gamma = sum(np.abs(k) ** 2 for k in kmap.operators)
    return StochasticKernel(gamma, tol_colsum=max(TOL_STOCH, kmap.completeness_residual * 2))


def canonical_lift(gamma: StochasticKernel) -> KrausMap:
    """Rank-one lift of a kernel: one operator ``sqrt(gamma[j,i]) |j><i|`` per entry.

    Always a quantum channel; its squared-moduli dictionary returns the input
    kernel identically. Zero-weight operators are dropped.
    """
    m = gamma.matrix
    n = gamma.n
    ops = []
    for i in range(n):
        for j in range(n):
            w = np.sqrt(m[j, i])
            if w >= KRAUS_DROP_NORM:
                op = np.zeros((n, n), dtype=complex)
                op[j, i] = w
                ops.append(op)
    return KrausMap(ops)


@dataclass(frozen=True)
class ThetaConjugationReport:
    """Conjugation lift ``rho -> theta rho theta^dagger`` and its induced kernel.

    The conjugation map is completely positive for any matrix but trace
    preserving exactly when ``theta`` is unitary; the induced kernel is the
    entrywise squared moduli of ``theta``.
    """

    left_right: LeftRightMap
    trace_preserving: bool
    tp_residual: float
    kernel: np.ndarray
    kernel_validation: KernelValidationReport


def theta_conjugation_lift(theta, tol_tp: float = TOL_TP) -> ThetaConjugationReport:
    """Lift a complex matrix by conjugation and report the induced kernel."""
    th = _square_complex(theta, "theta")
    tp_residual = float(np.abs(th.conj().T @ th - np.eye(th.shape[0])).max())
    kernel = np.abs(th) ** 2
    return ThetaConjugationReport(
        LeftRightMap([th], [th.conj().T]),
        tp_residual <= tol_tp, tp_residual,
        _frozen(kernel), validate_kernel(kernel))


def barandes_column_lift(theta) -> KrausMap:
    """Column-selector Kraus set ``K_b = theta P_b`` of a matrix with stochastic moduli.

    Dephases in the configuration basis and then conjugates; always a quantum
    channel, and it agrees with plain conjugation on every diagonal input.
    """
    th = _square_complex(theta, "theta")
    report = validate_kernel(np.abs(th) ** 2)
    if not report.passed:
        raise ValidationError(
            "squared moduli of theta are not column-stochastic "
            f"(worst column-sum error {report.max_column_sum_error:.3e})",
            report=report)
    n = th.shape[0]
    ops = []
    for beta in range(n):
        op = np.zeros((n, n), dtype=complex)
        op[:, beta] = th[:, beta]
        ops.append(op)
    return KrausMap(ops)


@dataclass(frozen=True)
class CompatibilityReport:
    """Residuals of the lift-compatibility diagram on probe distributions."""

    passed: bool
    max_residual: float
    residuals: tuple[float, ...]


def compatibility_check(map_: MapLike, gamma: StochasticKernel,
                        probes: Sequence[ProbabilityVector] | str = "basis",
                        tol: float = 1e-12) -> CompatibilityReport:
    """Verify that dephasing the lifted evolution reproduces the kernel.

    For each probe p the residual is
    ``max | diag(map(diag(p))) - gamma @ p |``; by linearity the N basis
    point masses (``probes="basis"``) decide the condition for all inputs.
    """
    if map_.n != gamma.n:
        raise DimensionMismatchError(
            f"map dimension {map_.n} does not match kernel dimension {gamma.n}")
    if isinstance(probes, str):
        if probes != "basis":
            raise ValueError(f"unknown probe specification {probes!r}")
        probe_list = [ProbabilityVector.basis(i, gamma.n) for i in range(gamma.n)]
    else:
        probe_list = list(probes)
    residuals = []
    for p in probe_list:
        evolved = _apply_matrix(map_, np.diag(p.entries.astype(complex)))
        lhs = np.real(np.diag(evolved))
        rhs = gamma.matrix @ p.entries
        residuals.append(float(np.abs(lhs - rhs).max()))
    worst = max(residuals) if residuals else 0.0
    return CompatibilityReport(worst <= tol, worst, tuple(residuals))


def to_superoperator(map_: KrausMap | LeftRightMap) -> SuperOperator:
    """Liouville matrix of an operator-sum or left-right map."""
    if isinstance(map_, KrausMap):
        pairs = [(k, k.conj().T) for k in map_.operators]
    elif isinstance(map_, LeftRightMap):
        pairs = list(zip(map_.left_ops, map_.right_ops))
    else:
        raise TypeError(f"unsupported map type {type(map_).__name__}")
    n = map_.n
    s = np.zeros((n * n, n * n), dtype=complex)
    for a, b in pairs:
        s += np.kron(b.T, a)
    return SuperOperator(s)


def superop_kernel_extract(s: SuperOperator) -> np.ndarray:
    """Induced kernel of a superoperator: inject, evolve, dephase, read out."""
    d = diagonal_injection(s.n)
    p = dephasing_projector(s.n)
    return np.real(d.T @ p @ s.matrix @ d)


@dataclass(frozen=True)
class QDivisibilityResult:
    """Verdict of a quantum divisibility query.

    ``verdict`` is ``"divisible"``, ``"indivisible"`` or ``"inconclusive"``.
    The candidate factor (when one exists linearly) and its CPTP report are
    always recorded. Inconclusive means: the pseudo-inverse candidate matches
    on the range of the earlier map but is not CPTP there, and a CPTP
    completion off that range, a semidefinite feasibility search, is out of
    scope here.
    """

    verdict: str
    witness: SuperOperator | None
    cptp_report: CptpReport | None
    reason: str
    candidate: np.ndarray | None = None


def q_divisibility_check(e_20: SuperOperator, e_10: SuperOperator,
                         tolerance: float = 1e-9) -> QDivisibilityResult:
    """Decide whether e_20 factors through e_10 as a quantum channel.

    A rank increase rules the factorization out immediately. A well
    conditioned e_10 makes the linear factor unique, so its CPTP check is
    decisive; in the singular case the pseudo-inverse candidate is tested and
    a non-CPTP outcome stays inconclusive.
    """
    if e_20.n != e_10.n:
        raise DimensionMismatchError(
            f"superoperator dimensions differ: {e_20.n} vs {e_10.n}")
    sv_10 = np.linalg.svd(e_10.matrix, compute_uv=False)
    sv_20 = np.linalg.svd(e_20.matrix, compute_uv=False)
    rank_10 = int((sv_10 > PINV_RCOND * sv_10[0]).sum())
    rank_20 = int((sv_20 > PINV_RCOND * sv_20[0]).sum())
    if rank_10 < rank_20:
        return QDivisibilityResult(
            "indivisible", None, None,
            f"rank obstruction: rank {rank_10} cannot factor rank {rank_20}")

    cond = sv_10[0] / sv_10[-1] if sv_10[-1] > 0 else np.inf
    if np.isfinite(cond) and cond < CONDITION_CAP:
        candidate = e_20.matrix @ np.linalg.inv(e_10.matrix)
        report = check_cptp(SuperOperator(candidate),
                            tol_tp=max(TOL_TP, tolerance),
                            tol_psd=max(TOL_PSD, tolerance))
        if report.passed:
            return QDivisibilityResult("divisible", SuperOperator(candidate),
                                       report, "unique factor is CPTP",
                                       candidate=candidate)
        return QDivisibilityResult(
            "indivisible", None, report,
            "earlier map is invertible and its unique factor is not CPTP",
            candidate=candidate)

    candidate = e_20.matrix @ np.linalg.pinv(e_10.matrix, rcond=PINV_RCOND)
    recon = float(np.abs(candidate @ e_10.matrix - e_20.matrix).max())
    if recon > tolerance:
        return QDivisibilityResult(
            "indivisible", None, None,
            f"no linear factorization exists (residual {recon:.3e})",
            candidate=candidate)
    report = check_cptp(SuperOperator(candidate),
                        tol_tp=max(TOL_TP, tolerance),
                        tol_psd=max(TOL_PSD, tolerance))
    if report.passed:
        return QDivisibilityResult("divisible", SuperOperator(candidate),
                                   report, "pseudo-inverse factor is CPTP",
                                   candidate=candidate)
    return QDivisibilityResult(
        "inconclusive", None, report,
        "factor on the range of the earlier map is not CPTP; a CPTP "
        "completion off that range is not searched",
        candidate=candidate)
