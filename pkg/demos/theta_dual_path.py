"""Theta(V) along Ricci, List and Ricci-harmonic flows, computed two ways.

Theta is evaluated from its general definition, with B - Delta A taken from
a finite difference of A along the computed trajectory, and compared with
the closed form each flow admits.  On Ricci flow Theta vanishes identically.
Halving h (and quartering dt) should cut the discrepancy by about 4.
"""
from flowlab import verification as ver

for check in (ver.check_theta_ricci, ver.check_dual_paths):
    for verdict in check():
        print(verdict.line())
