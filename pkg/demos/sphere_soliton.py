"""Shrinking round 2-sphere: every functional in closed form.

The sphere s(t) = 1 - 2t collapses at t = 0.5.  Taking the reference time
at the collapse makes it a shrinking soliton, so W is constant in t and its
derivative formula vanishes identically.
"""
import numpy as np

from flowlab.sphere import sphere_flow, sphere_reports

S0, DIM, C, K = 1.0, 2, 0.25, 1.0
T_STAR = S0 / (2 * (DIM - 1))

print(f"{'t':>6} {'vol':>9} {'lambda':>9} {'lambda_bar':>11} {'dF_1':>9} {'W':>12} {'dW':>9}")
for t in np.linspace(0.0, 0.45, 10):
    s = sphere_flow(S0, DIM, t)
    r = sphere_reports(s, C, K, T_ref=T_STAR)
    print(f"{t:6.3f} {s.volume:9.4f} {r.lam:9.4f} {r.lam_bar:11.6f} {r.dF_k:9.3f} {r.W:12.9f} {r.dW:9.1e}")

# lambda grows like 1/s while the volume shrinks like s: lambda * vol is fixed
print(f"\nW stays at log 2 - 1 = {np.log(2) - 1:.9f}")
print(f"lambda_bar stays at c R vol = {C * 2 * 4 * np.pi:.6f}")
