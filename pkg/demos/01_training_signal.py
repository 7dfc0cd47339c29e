"""Build one UFS training block by hand and look at what the receiver gets."""
import numpy as np

from ufsdetect.rng import RngStream
from ufsdetect.signal_model import (
    TrainingScenario,
    composite_channel,
    draw_cfo_plan,
    gen_channel,
    gen_qpsk_pilot,
    phase_ramp,
    synthesize_received,
)

scn = TrainingScenario(M=16, N=64, K=4, noise_var=0.01, phi_max=0.2, attack=True)
base = RngStream(2016, (0,))

pilot = gen_qpsk_pilot(scn.N, base.child(0))
h = gen_channel(scn.M, base.child(1))
g = gen_channel(scn.M, base.child(2))
plan_b = draw_cfo_plan(scn.K, scn.phi_max, base.child(3))  # Bob's random shifts
plan_e = draw_cfo_plan(scn.K, scn.phi_max, base.child(4))  # Eve can only guess

print("segments K, length Q:", scn.K, scn.Q)
print("Bob's CFO plan:", np.round(plan_b, 4))
print("Eve's CFO plan:", np.round(plan_e, 4))
print("||h||^2 =", round(float(np.vdot(h, h).real), 4))

rx = synthesize_received(scn, pilot, plan_b, plan_e, h, g, base.child(5))
print("received block shape (K, Q, M):", rx.segments.shape)
print("mean energy per symbol:", round(float(np.sum(np.abs(rx.segments) ** 2) / scn.N), 4))

# The ramp restarts in every segment.
print("ramp of segment 0, first 4 symbols:", np.round(phase_ramp(plan_b[0], 4), 3))

# If Eve copied Bob's shifts exactly, the two signals would merge into one
# composite channel and the block would stay rank one.
coherent = synthesize_received(scn.replace(noise_var=1e-300), pilot, plan_b, plan_b, h, g, base.child(5))
heq = composite_channel(h, g, scn.p_bob, scn.p_eve)
ramp = np.concatenate([phase_ramp(p, scn.Q) for p in plan_b]) * pilot
print("coherent attack equals composite-channel model:",
      np.allclose(coherent.stacked(), np.outer(ramp, heq), atol=1e-12))
print("singular values of coherent block:", np.round(np.linalg.svd(coherent.stacked(), compute_uv=False)[:3], 6))
