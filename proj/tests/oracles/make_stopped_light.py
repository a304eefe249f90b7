"""Tabulated stopped-light profile: rho ~ 1/sqrt(w_c - w), w_c = 1.0005.

d(rho)/d(omega) / rho at omega0 = 1 / (2 (w_c - 1)) = 1e3.
"""
import numpy as np

wc = 1.0005
# 5e-6 spacing, omega0 on a node
w = np.linspace(0.99, 1.00045, 2091)
rho = 1.0 / np.sqrt(wc - w)
with open("tests/data/stopped_light.csv", "w") as f:
    f.write("omega,rho\n")
    for a, b in zip(w, rho):
        f.write(f"{a:.17g},{b:.17g}\n")
