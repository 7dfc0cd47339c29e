"""Superimposed-random-sequence (SRS-MDL) baseline.

Bob adds a private Gaussian sequence ``c`` on top of the public pilot:
``x = sqrt(P_B) (sqrt(1-beta) s + sqrt(beta) c)``. An attacker that can only
replay ``s`` adds a temporal signature that is not proportional to ``x``, so
the received block has two sources instead of one. No artificial CFOs are
used; the whole ``N``-symbol block is one MDL snapshot set.

Channel estimation treats ``c`` as an unknown CN(0, 1) sequence and
alternates between estimating ``c`` given the channel (posterior mean) and
re-fitting the channel to the reconstructed transmit signal. This is an EM
iteration, so the likelihood never decreases between rounds.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .detection import DetectionOutcome, estimate_subspace_dim, hermitian_eigvals_desc, segment_autocorrelation
from .errors import InvalidParameterError, NumericalFailure
from .rng import RngStream, as_generator, complex_normal
from .signal_model import TrainingScenario


@dataclass(frozen=True)
class SrsConfig:
    """Power split and estimator depth of the SRS baseline.

    Attributes:
        beta: Fraction of Bob's power given to the random sequence.
        est_iters: Rounds of the iterative channel estimator.
    """

    beta: float = 0.5
    est_iters: int = 3

    def __post_init__(self):
        if not 0 < self.beta < 1:
            raise InvalidParameterError(f"beta must lie in (0, 1), got {self.beta}")
        if int(self.est_iters) != self.est_iters or self.est_iters < 1:
            raise InvalidParameterError(f"est_iters must be a positive integer, got {self.est_iters}")


def random_sequence(N: int, rng: RngStream | np.random.Generator) -> np.ndarray:
    """The private CN(0, 1) sequence Bob superimposes."""
    return complex_normal(as_generator(rng), N, 1.0)


def srs_transmit(
    pilot: np.ndarray, cfg: SrsConfig, p_bob: float, rng: RngStream | np.random.Generator
) -> np.ndarray:
    """Bob's transmitted training signal with the random sequence superimposed."""
    pilot = np.asarray(pilot)
    c = random_sequence(pilot.size, rng)
    return np.sqrt(p_bob) * (np.sqrt(1 - cfg.beta) * pilot + np.sqrt(cfg.beta) * c)


def srs_synthesize(
    scn: TrainingScenario,
    pilot: np.ndarray,
    x: np.ndarray,
    h: np.ndarray,
    g: np.ndarray | None,
    rng: RngStream | np.random.Generator,
) -> np.ndarray:
    """``N x M`` received block: ``x h^T [+ sqrt(P_E) s g^T] + noise``."""
    pilot, x, h = np.asarray(pilot), np.asarray(x), np.asarray(h)
    if pilot.shape != (scn.N,) or x.shape != (scn.N,) or h.shape != (scn.M,):
        raise InvalidParameterError("pilot, transmit signal and channel do not match the scenario")
    Y = np.outer(x, h)
    if scn.attack:
        if g is None or np.shape(g) != (scn.M,):
            raise InvalidParameterError("attack scenario requires Eve's channel of length M")
        Y = Y + np.sqrt(scn.p_eve) * np.outer(pilot, g)
    return Y + complex_normal(as_generator(rng), (scn.M, scn.N), scn.noise_var).T


def srs_detect(Y: np.ndarray) -> DetectionOutcome:
    """MDL dimension of the full ``N x M`` block; attack iff it exceeds one."""
    Y = np.asarray(Y)
    if Y.ndim != 2:
        raise InvalidParameterError(f"expected an N x M matrix, got shape {Y.shape}")
    spectrum = hermitian_eigvals_desc(segment_autocorrelation(Y), Y.shape[0])
    return DetectionOutcome(np.array([estimate_subspace_dim(spectrum)]))


def srs_estimate_channel(
    Y: np.ndarray,
    pilot: np.ndarray,
    cfg: SrsConfig,
    p_bob: float,
    noise_var: float,
    known_sequence: np.ndarray | None = None,
) -> np.ndarray:
    """Iterative channel estimate for SRS training, scaled to target ``h``.

    The first pass correlates ``Y`` with the known pilot component only.
    Each of the ``cfg.est_iters`` rounds then estimates the random sequence
    from the residual and refits the channel to the reconstructed signal.

    Args:
        Y: ``N x M`` received block.
        pilot: Public pilot.
        cfg: SRS settings.
        p_bob: Bob's power.
        noise_var: Noise variance.
        known_sequence: If given, the true random sequence; the channel is then
            fitted once against the exact transmit signal.

    Raises:
        NumericalFailure: if the channel estimate collapses to zero.
    """
    Y = np.asarray(Y)
    s = np.asarray(pilot)
    N = s.size
    if Y.shape[0] != N:
        raise InvalidParameterError(f"Y has {Y.shape[0]} rows but the pilot has {N} symbols")
    a, b = np.sqrt(1 - cfg.beta), np.sqrt(cfg.beta)
    root_p = np.sqrt(p_bob)
    if known_sequence is not None:
        x = root_p * (a * s + b * np.asarray(known_sequence))
        return (x.conj() @ Y) / np.vdot(x, x).real / root_p

    # Work with the effective channel sqrt(P_B) h and a unit-power signature.
    hs = (s.conj() @ Y) / (N * a)
    for _ in range(cfg.est_iters):
        energy = np.vdot(hs, hs).real
        if energy < 1e-24:
            raise NumericalFailure("channel estimate collapsed during SRS iterations")
        den = b * b * energy + noise_var
        c_hat = b * ((Y - a * np.outer(s, hs)) @ hs.conj()) / den
        post_var = noise_var / den
        x_hat = a * s + b * c_hat
        hs = (x_hat.conj() @ Y) / (np.vdot(x_hat, x_hat).real + N * b * b * post_var)
    if np.vdot(hs, hs).real < 1e-24:
        raise NumericalFailure("channel estimate collapsed during SRS iterations")
    return hs / root_p
