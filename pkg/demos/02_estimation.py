"""CFO and channel estimation without an attacker, against the closed forms."""
import numpy as np

from ufsdetect import analytics
from ufsdetect.estimation import estimate_cfo, estimate_channel, mse, wrap_cfo
from ufsdetect.rng import RngStream
from ufsdetect.signal_model import TrainingScenario, draw_cfo_plan, gen_channel, gen_qpsk_pilot, synthesize_received

M, N, sigma2 = 16, 64, 0.01
TRIALS = 1000

for K in (1, 2, 4, 8):
    scn = TrainingScenario(M=M, N=N, K=K, noise_var=sigma2)
    ch, cfo, cfo_unit = [], [], []
    for t in range(TRIALS):
        base = RngStream(7, (K, t))
        h = gen_channel(M, base.child(0))
        plan = draw_cfo_plan(K, 0.2, base.child(1))
        rx = synthesize_received(scn, gen_qpsk_pilot(N, base.child(2)), plan, None, h, None, base.child(3))
        est = estimate_cfo(rx)
        err2 = wrap_cfo(est.per_segment - plan) ** 2
        cfo.append(err2.mean())
        cfo_unit.append(err2.mean() * np.vdot(h, h).real)
        ch.append(mse(estimate_channel(rx, rx.pilot, est), h))
    Q = scn.Q
    print(f"K={K} Q={Q}")
    print(f"  CFO MSE (unit gain) {np.mean(cfo_unit):.3e}   closed form {analytics.lemma1_cfo_mse(Q, sigma2):.3e}")
    print(f"  channel MSE         {np.mean(ch):.4e}")
    print(f"    reference form    {analytics.lemma1_channel_mse(N, Q, M, sigma2):.4e}")
    print(f"    first-order form  {analytics.first_order_channel_mse(N, Q, M, sigma2):.4e}")
    print(f"    SYNC benchmark    {analytics.sync_benchmark_mse(M, N, sigma2):.4e}")

# The estimated channel barely depends on K: shorter segments give worse CFO
# estimates, but the residual phase error averages over more segments.
