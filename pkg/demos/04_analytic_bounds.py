"""Closed-form miss-probability bounds across attack power, CFO range and K."""
import numpy as np

from ufsdetect import analytics

M, N, sigma2 = 16, 64, 0.01

print("pilot correlation |rho| vs CFO difference (Q=16)")
for d in (0.0, 0.01, 0.03, 1 / 16, 0.1, 0.2):
    print(f"  dphi={d:.4f}  |rho|={abs(analytics.rho(d, 16)):.4f}")

for K in (1, 2, 4):
    Q = N // K
    pth = analytics.power_threshold(M, Q, sigma2)
    print(f"\nK={K} Q={Q} P_th={pth:.4f}")
    for ratio_db in (-20, -10, 0, 10, 15):
        p_eve = 1 / 10 ** (ratio_db / 10)
        b = analytics.miss_prob_bound(analytics.MissBoundInput(1.0, p_eve, sigma2, M, Q, K, 0.2))
        print(f"  P_B/P_E={ratio_db:+d} dB  bound={b.value:.3e}  clamped={b.clamped}  below={b.below_threshold}")
    print(f"  strong-Eve floor {analytics.miss_prob_lower_bound(1.0, pth, Q, 0.2, K).value:.3e}")

print("\nfloor vs phi_max at K=4")
pth = analytics.power_threshold(M, 16, sigma2)
for phi in np.arange(0.05, 0.35, 0.05):
    print(f"  phi_max={phi:.2f}  {analytics.miss_prob_lower_bound(1.0, pth, 16, phi, 4).value:.3e}")
