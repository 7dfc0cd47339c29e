"""Closed-form performance expressions for UFS training and UFS-MDL detection.

Powers are linear. ``noise_var`` in the estimation formulas is the noise
variance relative to Bob's power (``sigma^2 / P_B``), which is the plain
noise variance when ``P_B = 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InvalidParameterError


class Bound(NamedTuple):
    """A probability bound and how it was obtained.

    ``clamped`` is set when the raw expression exceeded 1 and was cut back;
    ``below_threshold`` when a power fell to or under ``P_th`` and the bound
    was set to 1 by rule.
    """

    value: float
    clamped: bool = False
    below_threshold: bool = False


@dataclass(frozen=True)
class MissBoundInput:
    p_bob: float
    p_eve: float
    noise_var: float
    M: int
    Q: int
    K: int
    phi_max: float

    def __post_init__(self):
        for name in ("p_bob", "p_eve", "noise_var"):
            if not getattr(self, name) > 0:
                raise InvalidParameterError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("M", "Q", "K"):
            if getattr(self, name) < 1:
                raise InvalidParameterError(f"{name} must be >= 1, got {getattr(self, name)}")
        if not 0 < self.phi_max < 0.5:
            raise InvalidParameterError(f"phi_max must lie in (0, 0.5), got {self.phi_max}")


def lemma1_cfo_mse(Q: int, noise_var: float, h_norm_sq: float = 1.0) -> float:
    """High-SNR CFO estimation MSE ``3 sigma^2 / (2 pi^2 Q (Q^2-1) ||h||^2)``."""
    if Q < 2:
        raise InvalidParameterError(f"Q must be >= 2, got {Q}")
    if noise_var < 0 or not h_norm_sq > 0:
        raise InvalidParameterError("noise_var must be >= 0 and h_norm_sq > 0")
    return 3.0 * noise_var / (2 * math.pi**2 * Q * (Q * Q - 1) * h_norm_sq)


def lemma1_channel_mse(N: int, Q: int, M: int, noise_var: float) -> float:
    """High-SNR channel MSE ``(sigma^2/N) (3/(8 pi^2) (Q-1)/(Q+1) + M)``."""
    _check_channel_dims(N, Q, M, noise_var)
    return noise_var / N * (3.0 / (8 * math.pi**2) * (Q - 1) / (Q + 1) + M)


def first_order_channel_mse(N: int, Q: int, M: int, noise_var: float) -> float:
    """First-order channel MSE of the zero-referenced estimator, ``(sigma^2/N)(1.5 (Q-1)/(Q+1) + M)``.

    A residual CFO error ``e`` rotates the de-rotated pilot by about
    ``pi e (Q-1)`` at the segment centroid. That error is uncorrelated with
    the averaged noise, and its variance is the CFO MSE above, so the excess
    over the synchronous MSE is ``||h||^2 pi^2 (Q-1)^2 E[e^2] / K``, which is
    ``1.5 (Q-1)/(Q+1) sigma^2/N``. :func:`lemma1_channel_mse` has ``3/(8 pi^2)``
    in place of ``1.5``; Monte Carlo runs of the estimator follow this form.
    """
    _check_channel_dims(N, Q, M, noise_var)
    return noise_var / N * (1.5 * (Q - 1) / (Q + 1) + M)


def _check_channel_dims(N, Q, M, noise_var):
    if N < 1 or Q < 1 or M < 1 or N % Q:
        raise InvalidParameterError(f"need positive N, Q, M with Q dividing N, got N={N}, Q={Q}, M={M}")
    if noise_var < 0:
        raise InvalidParameterError(f"noise_var must be >= 0, got {noise_var}")


def sync_benchmark_mse(M: int, N: int, noise_var: float) -> float:
    """Channel MSE ``M sigma^2 / N`` of frequency-synchronous training."""
    return M * noise_var / N


def relative_mse_increase(M: int, Q: int) -> float:
    """Relative channel-MSE increase over SYNC, ``(1/M)(3/(8 pi^2))(Q-1)/(Q+1)``."""
    return 3.0 / (8 * math.pi**2) * (Q - 1) / (Q + 1) / M


def rho(delta_phi: float, Q: int) -> complex:
    """Normalized correlation of two pilot segments offset by ``delta_phi``.

    ``(1 - e^{j2 pi Q dphi}) / (Q (1 - e^{j2 pi dphi}))``, which is the mean of
    ``e^{j2 pi dphi n}`` over ``n = 0..Q-1``; equals 1 at integer ``dphi``.
    """
    if Q < 1:
        raise InvalidParameterError(f"Q must be >= 1, got {Q}")
    # Period 1 in delta_phi; reducing first keeps sin(x) away from its other zeros.
    x = math.pi * (delta_phi - round(delta_phi))
    if x == 0.0:
        return complex(1.0)
    # Numerator and denominator share e^{j pi dphi}, leaving a ratio of sines.
    return math.sin(Q * x) / (Q * math.sin(x)) * complex(math.cos((Q - 1) * x), math.sin((Q - 1) * x))


def pilot_correlation_matrix(p_bob: float, p_eve: float, rho_val: complex) -> np.ndarray:
    """The 2x2 source correlation ``[[P_B, sqrt(P_B P_E) rho], [sqrt(P_B P_E) rho*, P_E]]``."""
    c = math.sqrt(p_bob * p_eve) * rho_val
    return np.array([[p_bob, c], [np.conj(c), p_eve]])


def pilot_correlation_det(p_bob: float, p_eve: float, rho_val: complex) -> float:
    """``det P_k = P_B P_E (1 - |rho|^2)``; positive iff the two pilots are not coherent."""
    return p_bob * p_eve * (1.0 - abs(rho_val) ** 2)


def power_threshold(M: int, Q: int, noise_var: float) -> float:
    """Minimum per-user power ``P_th = M (Q^{1/Q} - 1) sigma^2`` for reliable detection."""
    if Q < 2:
        raise InvalidParameterError(f"Q must be >= 2, got {Q}")
    return M * math.expm1(math.log(Q) / Q) * noise_var


def _segment_miss_factor(Q, phi_max, cos_arg):
    cos_arg = min(max(cos_arg, 0.0), 1.0)
    return 2.0 / (math.pi * Q * phi_max) * math.acos(math.sqrt(cos_arg))


def _powered(factor, K):
    raw = factor**K
    return Bound(min(raw, 1.0), clamped=raw > 1.0)


def miss_prob_bound(inp: MissBoundInput) -> Bound:
    """Asymptotic upper bound on the UFS-MDL miss probability.

    ``(2/(pi Q phi_max) arccos sqrt((1 - P_th/P_B)(1 - P_th/P_E)))^K`` when both
    powers exceed ``P_th``, otherwise 1.
    """
    pth = power_threshold(inp.M, inp.Q, inp.noise_var)
    if min(inp.p_bob, inp.p_eve) <= pth:
        return Bound(1.0, below_threshold=True)
    factor = _segment_miss_factor(inp.Q, inp.phi_max, (1 - pth / inp.p_bob) * (1 - pth / inp.p_eve))
    return _powered(factor, inp.K)


def miss_prob_lower_bound(p_bob: float, P_th: float, Q: int, phi_max: float, K: int) -> Bound:
    """Large-attack-power floor ``(2/(pi Q phi_max) arccos sqrt(1 - P_th/P_B))^K``."""
    if not 0 < phi_max < 0.5:
        raise InvalidParameterError(f"phi_max must lie in (0, 0.5), got {phi_max}")
    if p_bob <= P_th:
        return Bound(1.0, below_threshold=True)
    return _powered(_segment_miss_factor(Q, phi_max, 1 - P_th / p_bob), K)
