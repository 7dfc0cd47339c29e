"""MDL source enumeration per training segment and the attack decision.

Without an attacker every segment carries a single spatial signature, so the
sample autocorrelation has a one-dimensional signal subspace. An attacker
whose CFO differs from Bob's adds a second, linearly independent temporal
signature. The detector estimates the subspace dimension of each segment by
minimum description length and flags an attack when any segment has more
than one source.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, NumericalFailure, UnsupportedConfigurationError
from .signal_model import ReceivedTraining

EIG_FLOOR = 1e-30
# Eigenvalues below this fraction of the largest are rounding noise of the
# eigensolver and are all raised to the same level before scoring.
REL_EIG_FLOOR = 1e-13
NEG_TOL = 1e-10
HERMITIAN_TOL = 1e-10


@dataclass(frozen=True)
class SegmentSpectrum:
    """Eigenvalues of one segment's sample autocorrelation, largest first."""

    eigenvalues: np.ndarray
    sample_count: int

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=float)
        if lam.ndim != 1 or lam.size == 0:
            raise InvalidParameterError("eigenvalues must be a non-empty 1-D array")
        if np.any(np.diff(lam) > 0):
            raise InvalidParameterError("eigenvalues must be sorted in descending order")
        scale = max(lam[0], 0.0)
        if lam[-1] < -NEG_TOL * scale or (scale == 0 and lam[-1] < 0):
            raise InvalidParameterError(f"spectrum is not positive semidefinite (min eigenvalue {lam[-1]:.3e})")
        object.__setattr__(self, "eigenvalues", np.maximum(lam, 0.0))
        if self.sample_count < 1:
            raise InvalidParameterError(f"sample_count must be >= 1, got {self.sample_count}")

    @property
    def M(self) -> int:
        return self.eigenvalues.size


@dataclass(frozen=True)
class DetectionOutcome:
    """Per-segment subspace dimensions and the resulting verdict."""

    dims: np.ndarray

    @property
    def attack_detected(self) -> bool:
        return bool(np.max(self.dims) > 1)


def segment_autocorrelation(Y_k: np.ndarray) -> np.ndarray:
    """Sample autocorrelation ``(1/Q) Y_k^T Y_k^*`` of a ``Q x M`` segment."""
    Y_k = np.asarray(Y_k)
    if Y_k.ndim != 2 or Y_k.shape[0] < 1:
        raise InvalidParameterError(f"expected a Q x M matrix with Q >= 1, got shape {Y_k.shape}")
    R = Y_k.T @ Y_k.conj() / Y_k.shape[0]
    # Exact Hermitian symmetry; BLAS leaves rounding-level asymmetry.
    return 0.5 * (R + R.conj().T)


def hermitian_eigvals_desc(R: np.ndarray, sample_count: int | None = None) -> SegmentSpectrum:
    """Eigenvalues of a Hermitian matrix in descending order.

    Raises:
        InvalidParameterError: if ``R`` is not square and Hermitian to 1e-10
            relative tolerance, or has a clearly negative eigenvalue.
        NumericalFailure: if the eigensolver does not converge.
    """
    R = np.asarray(R)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise InvalidParameterError(f"expected a square matrix, got shape {R.shape}")
    scale = np.max(np.abs(R)) if R.size else 0.0
    if np.max(np.abs(R - R.conj().T), initial=0.0) > HERMITIAN_TOL * max(scale, np.finfo(float).tiny):
        raise InvalidParameterError("matrix is not Hermitian")
    try:
        lam = np.linalg.eigvalsh(R)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"Hermitian eigensolver did not converge: {exc}") from exc
    return SegmentSpectrum(lam[::-1].copy(), R.shape[0] if sample_count is None else sample_count)


def _mdl_scores(lam: np.ndarray, Q: int) -> np.ndarray:
    """MDL scores for d = 1..M-1 along the last axis of ``lam`` (descending)."""
    M = lam.shape[-1]
    floor = np.maximum(REL_EIG_FLOOR * lam[..., :1], EIG_FLOOR)
    lam = np.maximum(lam, floor)
    tail_log = np.flip(np.cumsum(np.flip(np.log(lam), -1), -1), -1)
    tail_sum = np.flip(np.cumsum(np.flip(lam, -1), -1), -1)
    d = np.arange(1, M)
    m = M - d
    return -tail_log[..., 1:] + m * np.log(tail_sum[..., 1:] / m) + d * (2 * M - d) * np.log(Q) / (2 * Q)


def mdl_score(spectrum: SegmentSpectrum, d: int) -> float:
    """Description length of a ``d``-source model for the given spectrum.

    Evaluates ``-sum log lam(i) + (M-d) log(mean lam(i)) + d(2M-d) log(Q)/(2Q)``
    with ``i`` running over the ``M-d`` smallest eigenvalues.
    """
    M = spectrum.M
    if not 1 <= d <= M - 1:
        raise InvalidParameterError(f"candidate dimension must lie in [1, {M - 1}], got {d}")
    return float(_mdl_scores(spectrum.eigenvalues, spectrum.sample_count)[d - 1])


def _check_sizes(M, Q):
    if M < 3:
        raise UnsupportedConfigurationError(f"MDL detection needs at least 3 antennas, got M={M}")
    if Q < M:
        raise UnsupportedConfigurationError(f"sample count Q={Q} is below antenna count M={M}")


def estimate_subspace_dim(spectrum: SegmentSpectrum) -> int:
    """MDL estimate of the signal subspace dimension, ties going to the smaller d."""
    _check_sizes(spectrum.M, spectrum.sample_count)
    return int(np.argmin(_mdl_scores(spectrum.eigenvalues, spectrum.sample_count))) + 1


def segment_dimension(Y_k: np.ndarray) -> int:
    """Runs autocorrelation, eigendecomposition and MDL on one segment."""
    Y_k = np.asarray(Y_k)
    return estimate_subspace_dim(hermitian_eigvals_desc(segment_autocorrelation(Y_k), Y_k.shape[0]))


def detect_segments(segments: np.ndarray) -> DetectionOutcome:
    """Applies the MDL detector to a ``(K, Q, M)`` stack of received segments.

    Equivalent to :func:`segment_dimension` on each segment, with the
    eigendecompositions and scores batched.
    """
    segments = np.asarray(segments)
    if segments.ndim != 3:
        raise InvalidParameterError(f"expected a (K, Q, M) array, got shape {segments.shape}")
    K, Q, M = segments.shape
    _check_sizes(M, Q)
    R = np.einsum("kqm,kqn->kmn", segments, segments.conj()) / Q
    R = 0.5 * (R + np.conj(np.swapaxes(R, 1, 2)))
    try:
        lam = np.linalg.eigvalsh(R)[:, ::-1]
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"Hermitian eigensolver did not converge: {exc}") from exc
    top = np.maximum(lam[:, 0], 0.0)
    if np.any(lam[:, -1] < -NEG_TOL * top):
        raise NumericalFailure("sample autocorrelation lost positive semidefiniteness")
    scores = _mdl_scores(np.maximum(lam, 0.0), Q)
    return DetectionOutcome(np.argmin(scores, axis=1) + 1)


def detect_attack(received: ReceivedTraining) -> DetectionOutcome:
    """Declares an attack when any segment shows more than one source."""
    return detect_segments(received.segments)
