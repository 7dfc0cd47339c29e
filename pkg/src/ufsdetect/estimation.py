"""Single-user maximum-likelihood CFO and channel estimation.

For each segment the CFO estimate maximizes

    J(phi) = || s_k^H diag(ramp(phi))^H Y_k ||^2,

the energy (summed over antennas) of the pilot correlation after
de-rotating by a trial CFO. The search runs an FFT-evaluated coarse grid
over one full period and then refines around the grid winner with
safeguarded parabolic steps on ``log J``. The channel estimate averages the
de-rotated pilot correlations over all segments.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .signal_model import ReceivedTraining


@dataclass(frozen=True)
class GridSearchConfig:
    """Settings of the two-stage CFO search.

    Attributes:
        coarse_step: Grid spacing in cycles/symbol. None means ``1/(8Q)``.
        refine_tol: Refinement stops once the step falls below this.
        search_range: Half-width of the searched CFO interval, at most 0.5.
        max_iter: Cap on refinement iterations.
    """

    coarse_step: float | None = None
    refine_tol: float = 1e-8
    search_range: float = 0.5
    max_iter: int = 30

    def __post_init__(self):
        if self.coarse_step is not None and not self.coarse_step > 0:
            raise InvalidParameterError(f"coarse_step must be positive, got {self.coarse_step}")
        if not self.refine_tol > 0:
            raise InvalidParameterError(f"refine_tol must be positive, got {self.refine_tol}")
        if not 0 < self.search_range <= 0.5:
            raise InvalidParameterError(f"search_range must lie in (0, 0.5], got {self.search_range}")
        if self.max_iter < 1:
            raise InvalidParameterError(f"max_iter must be >= 1, got {self.max_iter}")

    def step_for(self, Q: int) -> float:
        return 1.0 / (8 * Q) if self.coarse_step is None else self.coarse_step


@dataclass(frozen=True)
class CfoEstimate:
    """Per-segment CFO estimates and the objective value attained at each."""

    per_segment: np.ndarray
    objective: np.ndarray


def wrap_cfo(phi):
    """Maps normalized CFOs onto the interval (-0.5, 0.5]."""
    phi = np.asarray(phi, dtype=float)
    return phi - np.ceil(phi - 0.5)


def _evaluate(Z, phi, n):
    """Returns ``J``, ``(log J)'`` and ``(log J)''`` at ``phi`` for every segment."""
    w = 2 * np.pi * n
    e = np.exp(-1j * w * phi[:, None])
    a0, a1, a2 = np.einsum("tkq,kqm->tkm", np.stack([e, -1j * w * e, -(w**2) * e]), Z)
    J = np.sum(a0.real**2 + a0.imag**2, axis=1)
    J1 = 2 * np.sum((a0.conj() * a1).real, axis=1)
    J2 = 2 * np.sum(a1.real**2 + a1.imag**2 + (a0.conj() * a2).real, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        d1 = J1 / J
        d2 = J2 / J - d1**2
    return J, d1, d2


def _coarse_grid(Z, step, search_range):
    K, Q, M = Z.shape
    L = 1.0 / step
    if search_range == 0.5 and abs(L - round(L)) < 1e-9 and round(L) >= Q:
        L = int(round(L))
        F = np.fft.fft(Z, n=L, axis=1)
        J = np.sum(F.real**2 + F.imag**2, axis=2)
        grid = np.arange(L) / L
        grid = np.where(grid > 0.5, grid - 1.0, grid)
    else:
        count = int(np.floor(2 * search_range / step))
        grid = search_range - step * np.arange(count + 1)[::-1]
        grid = grid[grid > -0.5]
        E = np.exp(-2j * np.pi * np.outer(grid, np.arange(Q)))
        F = np.einsum("gq,kqm->kgm", E, Z)
        J = np.sum(F.real**2 + F.imag**2, axis=2)
    best = np.argmax(J, axis=1)
    return grid[best]


def _refine(Z, phi0, step, cfg):
    """Safeguarded parabolic ascent of ``log J`` inside ``phi0 +- step``.

    A step is the vertex of the parabola matching the local slope and
    curvature of ``log J``; steps that lower ``J`` are halved until they
    do not, so ``J`` never drops below its value at the grid winner.
    """
    K, Q, _ = Z.shape
    n = np.arange(Q)
    lo, hi = phi0 - step, phi0 + step
    if cfg.search_range < 0.5:
        lo = np.maximum(lo, -cfg.search_range)
        hi = np.minimum(hi, cfg.search_range)
    phi = phi0.copy()
    J, d1, d2 = _evaluate(Z, phi, n)
    active = J > 0
    for _ in range(cfg.max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        concave = d2[idx] < 0
        move = np.where(concave, -d1[idx] / np.where(concave, d2[idx], -1.0), np.sign(d1[idx]) * step / 4)
        settled = np.abs(move) <= cfg.refine_tol
        if settled.any():
            active[idx[settled]] = False
            idx, move = idx[~settled], move[~settled]
            if idx.size == 0:
                break
        cand = np.clip(phi[idx] + move, lo[idx], hi[idx])
        Zi = Z[idx]
        Jc, d1c, d2c = _evaluate(Zi, cand, n)
        for _ in range(40):
            worse = (Jc < J[idx]) & (np.abs(cand - phi[idx]) > cfg.refine_tol)
            if not worse.any():
                break
            cand[worse] = 0.5 * (cand[worse] + phi[idx][worse])
            Jc[worse], d1c[worse], d2c[worse] = _evaluate(Zi[worse], cand[worse], n)
        keep = Jc >= J[idx]
        delta = np.where(keep, cand - phi[idx], 0.0)
        for arr, new in ((phi, cand), (J, Jc), (d1, d1c), (d2, d2c)):
            arr[idx] = np.where(keep, new, arr[idx])
        active[idx] = np.abs(delta) > cfg.refine_tol
    return phi, J


def _search(Z, cfg):
    K, Q, M = Z.shape
    if Q < 2:
        raise InvalidParameterError(f"CFO is unobservable from Q={Q} < 2 symbols per segment")
    step = cfg.step_for(Q)
    phi, J = _refine(Z, _coarse_grid(Z, step, cfg.search_range), step, cfg)
    return wrap_cfo(phi), J


def estimate_cfo_segment(
    Y_k: np.ndarray, s_k: np.ndarray, cfg: GridSearchConfig = GridSearchConfig()
) -> tuple[float, float]:
    """Estimates one segment's CFO.

    Args:
        Y_k: ``Q x M`` received segment.
        s_k: Length-``Q`` pilot segment.
        cfg: Search settings.

    Returns:
        ``(phi_hat, J(phi_hat))``.

    Raises:
        InvalidParameterError: on inconsistent shapes or ``Q < 2``.
    """
    Y_k = np.asarray(Y_k)
    s_k = np.asarray(s_k)
    if Y_k.ndim != 2 or s_k.shape != (Y_k.shape[0],):
        raise InvalidParameterError(f"pilot segment shape {s_k.shape} does not match Y_k shape {Y_k.shape}")
    phi, J = _search((s_k.conj()[:, None] * Y_k)[None], cfg)
    return float(phi[0]), float(J[0])


def estimate_cfo(
    received: ReceivedTraining, pilot: np.ndarray | None = None, cfg: GridSearchConfig = GridSearchConfig()
) -> CfoEstimate:
    """Estimates Bob's CFO independently in every segment."""
    Y = received.segments
    s = received.pilot_segments() if pilot is None else np.asarray(pilot).reshape(Y.shape[0], -1)
    if s.shape != Y.shape[:2]:
        raise InvalidParameterError(f"pilot of shape {s.shape} does not match segments {Y.shape}")
    phi, J = _search(s.conj()[:, :, None] * Y, cfg)
    return CfoEstimate(per_segment=phi, objective=J)


def estimate_channel(
    received: ReceivedTraining, pilot: np.ndarray, cfo: CfoEstimate | np.ndarray, p_bob: float | None = None
) -> np.ndarray:
    """Averages the de-rotated pilot correlations into a channel estimate.

    The sum is divided by ``N sqrt(P_B)`` so the result estimates ``h`` itself.
    ``p_bob`` defaults to the scenario's value.
    """
    Y = received.segments
    K, Q, M = Y.shape
    phi = np.asarray(cfo.per_segment if isinstance(cfo, CfoEstimate) else cfo, dtype=float)
    if phi.shape != (K,):
        raise InvalidParameterError(f"need {K} CFO estimates, got shape {phi.shape}")
    s = np.asarray(pilot)
    if s.shape != (K * Q,):
        raise InvalidParameterError(f"pilot must have length {K * Q}, got shape {s.shape}")
    p_bob = received.scenario.p_bob if p_bob is None else p_bob
    ref = np.exp(2j * np.pi * phi[:, None] * np.arange(Q)) * s.reshape(K, Q)
    corr = np.einsum("kq,kqm->m", ref.conj(), Y)
    return corr / (K * Q * np.sqrt(p_bob))


def mse(estimate: np.ndarray, truth: np.ndarray) -> float:
    """Squared error ``||estimate - truth||^2`` of one trial."""
    estimate = np.asarray(estimate)
    truth = np.asarray(truth)
    if estimate.shape != truth.shape:
        raise InvalidParameterError(f"shape mismatch: {estimate.shape} vs {truth.shape}")
    d = estimate - truth
    return float(np.sum(d.real**2 + d.imag**2))
