"""Uplink training signal at the multi-antenna receiver, with and without an attacker.

Bob sends a public pilot split into ``K`` segments of ``Q`` symbols and
rotates each segment by its own artificial carrier frequency offset (CFO).
Eve, when present, sends the same pilot under CFOs of her own choosing. The
receiver sees, per segment, a ``Q x M`` matrix

    Y_k = sqrt(P_B) diag(ramp(phi_Bk)) s_k h^T
          [+ sqrt(P_E) diag(ramp(phi_Ek)) s_k g^T] + N_k.

Channels, pilots, CFO plans and noise are arrays; the scenario and the
received block are small dataclasses.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError
from .rng import RngStream, as_generator, complex_normal

QPSK = np.exp(1j * np.pi / 4 * np.array([1, 3, 5, 7]))


@dataclass(frozen=True)
class TrainingScenario:
    """System parameters of one training phase.

    Powers and noise variance are linear. ``p_eve`` is ignored when
    ``attack`` is false.
    """

    M: int
    N: int
    K: int
    p_bob: float = 1.0
    p_eve: float = 1.0
    noise_var: float = 0.01
    phi_max: float = 0.2
    attack: bool = False

    def __post_init__(self):
        for name in ("M", "N", "K"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise InvalidParameterError(f"{name} must be a positive integer, got {value}")
        if self.N % self.K:
            raise InvalidParameterError(f"N={self.N} is not a multiple of K={self.K}")
        if not self.p_bob > 0:
            raise InvalidParameterError(f"p_bob must be positive, got {self.p_bob}")
        if not self.p_eve >= 0:
            raise InvalidParameterError(f"p_eve must be non-negative, got {self.p_eve}")
        if not self.noise_var > 0:
            raise InvalidParameterError(f"noise_var must be positive, got {self.noise_var}")
        _check_phi_max(self.phi_max)

    @property
    def Q(self) -> int:
        """Segment length in symbols."""
        return self.N // self.K

    @property
    def snr(self) -> float:
        return self.p_bob / self.noise_var

    def replace(self, **changes) -> TrainingScenario:
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class ReceivedTraining:
    """Received per-segment matrices plus the ground truth that produced them.

    Attributes:
        segments: Array of shape ``(K, Q, M)``; ``segments[k]`` is ``Y_k``.
        scenario: The generating scenario.
        pilot: Full length-``N`` pilot.
        h: Bob's channel.
        plan_b: Bob's per-segment CFOs.
        g: Eve's channel, or None without attack.
        plan_e: Eve's per-segment CFOs, or None without attack.
    """

    segments: np.ndarray
    scenario: TrainingScenario
    pilot: np.ndarray
    h: np.ndarray
    plan_b: np.ndarray
    g: np.ndarray | None = None
    plan_e: np.ndarray | None = None

    @property
    def K(self) -> int:
        return self.segments.shape[0]

    def pilot_segments(self) -> np.ndarray:
        """Pilot reshaped to ``(K, Q)``."""
        return self.pilot.reshape(self.K, -1)

    def stacked(self) -> np.ndarray:
        """All segments stacked into the ``N x M`` received block."""
        K, Q, M = self.segments.shape
        return self.segments.reshape(K * Q, M)


def _check_phi_max(phi_max):
    if not 0 <= phi_max < 0.5:
        raise InvalidParameterError(f"phi_max must lie in [0, 0.5), got {phi_max}")


def gen_channel(M: int, rng: RngStream | np.random.Generator) -> np.ndarray:
    """Draws a Rayleigh channel with i.i.d. CN(0, 1/M) entries (unit expected norm)."""
    if M < 1:
        raise InvalidParameterError(f"antenna count must be >= 1, got {M}")
    return complex_normal(as_generator(rng), M, 1.0 / M)


def gen_qpsk_pilot(N: int, rng: RngStream | np.random.Generator) -> np.ndarray:
    """Draws ``N`` pilot symbols uniformly from the unit-modulus QPSK alphabet."""
    if N < 1:
        raise InvalidParameterError(f"pilot length must be >= 1, got {N}")
    return QPSK[as_generator(rng).integers(0, 4, N)]


def phase_ramp(phi: float, L: int) -> np.ndarray:
    """Returns ``exp(j 2 pi phi n)`` for ``n = 0..L-1``, the diagonal of E(phi)."""
    if L < 1:
        raise InvalidParameterError(f"ramp length must be >= 1, got {L}")
    return np.exp(2j * np.pi * phi * np.arange(L))


def draw_cfo_plan(K: int, phi_max: float, rng: RngStream | np.random.Generator) -> np.ndarray:
    """Draws ``K`` normalized CFOs uniformly on ``[-phi_max, phi_max]``."""
    _check_phi_max(phi_max)
    if K < 1:
        raise InvalidParameterError(f"segment count must be >= 1, got {K}")
    return as_generator(rng).uniform(-phi_max, phi_max, K)


def synthesize_received(
    scn: TrainingScenario,
    pilot: np.ndarray,
    plan_b: np.ndarray,
    plan_e: np.ndarray | None,
    h: np.ndarray,
    g: np.ndarray | None,
    rng: RngStream | np.random.Generator,
) -> ReceivedTraining:
    """Builds the received training block for one realization.

    Each segment's ramp restarts at phase zero. Noise for segment ``k`` comes
    from substream ``rng.child(k)`` (drawn antenna by antenna), so a segment
    is reproducible on its own. Passing a plain numpy Generator instead draws
    all segments from it in order.

    Raises:
        InvalidParameterError: on any dimension mismatch, or when the scenario
            is an attack and Eve's CFO plan or channel is missing.
    """
    pilot = np.asarray(pilot)
    plan_b = np.asarray(plan_b, dtype=float)
    h = np.asarray(h)
    K, Q, M = scn.K, scn.Q, scn.M
    if pilot.shape != (scn.N,):
        raise InvalidParameterError(f"pilot must have length {scn.N}, got shape {pilot.shape}")
    if plan_b.shape != (K,):
        raise InvalidParameterError(f"Bob's CFO plan must have length {K}, got shape {plan_b.shape}")
    if h.shape != (M,):
        raise InvalidParameterError(f"h must have length {M}, got shape {h.shape}")
    if scn.attack:
        if plan_e is None or g is None:
            raise InvalidParameterError("attack scenario requires Eve's CFO plan and channel")
        plan_e = np.asarray(plan_e, dtype=float)
        g = np.asarray(g)
        if plan_e.shape != (K,):
            raise InvalidParameterError(f"Eve's CFO plan must have length {K}, got shape {plan_e.shape}")
        if g.shape != (M,):
            raise InvalidParameterError(f"g must have length {M}, got shape {g.shape}")

    s = pilot.reshape(K, Q)
    n = np.arange(Q)
    bob = np.exp(2j * np.pi * plan_b[:, None] * n) * s
    Y = np.sqrt(scn.p_bob) * bob[:, :, None] * h[None, None, :]
    if scn.attack:
        eve = np.exp(2j * np.pi * plan_e[:, None] * n) * s
        Y = Y + np.sqrt(scn.p_eve) * eve[:, :, None] * g[None, None, :]

    if isinstance(rng, RngStream):
        noise = np.stack([complex_normal(rng.child(k).generator(), (M, Q), scn.noise_var).T for k in range(K)])
    else:
        gen = as_generator(rng)
        noise = np.stack([complex_normal(gen, (M, Q), scn.noise_var).T for _ in range(K)])

    return ReceivedTraining(
        segments=Y + noise,
        scenario=scn,
        pilot=pilot,
        h=h,
        plan_b=plan_b,
        g=g if scn.attack else None,
        plan_e=plan_e if scn.attack else None,
    )


def composite_channel(h: np.ndarray, g: np.ndarray, p_bob: float, p_eve: float) -> np.ndarray:
    """Channel Alice learns under a frequency-coherent attack: ``h + sqrt(P_E/P_B) g``."""
    return np.asarray(h) + np.sqrt(p_eve / p_bob) * np.asarray(g)
