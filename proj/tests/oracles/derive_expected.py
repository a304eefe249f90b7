#!/usr/bin/env python3
"""Independent oracle for the frozen expected values used in the C++ tests.

Everything here is brute force (dense scans, numpy eigvals, mpmath arithmetic)
and shares no code with the library. Re-run to regenerate the numbers quoted in
tests/*.cpp.
"""
import mpmath as mp
import numpy as np

mp.mp.dps = 40


def header(title):
    print(f"\n== {title}")


def power_rate(gamma, n, w):
    return gamma * w ** n


def generator(omega, g1, g2, n, averaged=True):
    k1 = (power_rate(g1, n, 1 + omega) - power_rate(g1, n, 1 - omega)) / 2
    k2 = (power_rate(g2, n, 1 + omega) - power_rate(g2, n, 1 - omega)) / 2
    if averaged:
        d1 = (power_rate(g1, n, 1 + omega) + power_rate(g1, n, 1 - omega)) / 2
        d2 = (power_rate(g2, n, 1 + omega) + power_rate(g2, n, 1 - omega)) / 2
    else:
        d1, d2 = g1, g2
    return np.array([[-1j - d1, -1j * omega - k1], [-1j * omega - k2, -1j - d2]])


def delta(omega, g1, g2, n):
    ev = np.linalg.eigvals(generator(omega, g1, g2, n))
    return abs(ev[0] - ev[1])


header("exact arithmetic")
print("K exact n=3:", mp.nstr((mp.mpf("1.08") ** 3 - mp.mpf("0.92") ** 3) / 2 * mp.mpf("1e-3"), 20))
print("gbar n=2 factor:", mp.nstr((mp.mpf("1.08") ** 2 + mp.mpf("0.92") ** 2) / 2, 20))
print("K n=2 factor:", mp.nstr((mp.mpf("1.08") ** 2 - mp.mpf("0.92") ** 2) / 2, 20))
print("split Off 0.02/0.01 at 0.02:", mp.nstr(mp.sqrt(mp.mpf("0.02") ** 2 - mp.mpf("0.005") ** 2), 20))
print("g flat bath:", mp.nstr(mp.sqrt(mp.mpf("0.01") * mp.mpf("5e-4") / mp.pi), 20))
print("t_rec:", mp.nstr(2 * mp.pi / mp.mpf("5e-4"), 20))
print("usc sqrt(1.24):", mp.nstr(mp.sqrt(mp.mpf("1.24")), 20))
for w in ["0.01", "0.05", "0.1"]:
    W = mp.mpf(w)
    s = mp.sqrt(1 + 2 * W + 4 * W ** 2)
    a = mp.sqrt(1 - 2 * W + 4 * W ** 2)
    print(f"usc Omega={w}: S={mp.nstr(s, 20)} A={mp.nstr(a, 20)} shift_s/(2W)={mp.nstr((s - 1 - W) / (2 * W), 12)}")

header("transition n=2, g1=0.02, g2=0.01 (1e4-point scan + local 1e4 rescan)")
ws = np.linspace(1e-6, 0.1, 10001)
d = np.array([delta(w, 0.02, 0.01, 2) for w in ws])
i = int(np.argmin(d))
fine = np.linspace(ws[max(i - 1, 0)], ws[i + 1], 10001)
df = np.array([delta(w, 0.02, 0.01, 2) for w in fine])
print("argmin:", repr(fine[int(np.argmin(df))]), "min delta:", df.min())

header("min delta over (0,0.1] for n=2, g1=0.02, g2=0.01")
print("min:", d.min())

header("Omega_CP(n) by dense 2-D scan (ratio 2, averaged rates, exact difference)")


def boundary(g, n, wmax=0.5):
    ws = np.linspace(0.0, wmax, 4001)
    d = np.array([delta(w, g, 2 * g, n) for w in ws])
    i = int(np.argmin(d))
    if i == 0 or i == len(ws) - 1:
        return None
    lo, hi = ws[i - 1], ws[i + 1]
    for _ in range(3):
        f = np.linspace(lo, hi, 401)
        fd = np.array([delta(w, g, 2 * g, n) for w in f])
        j = int(np.argmin(fd))
        lo, hi = f[max(j - 1, 0)], f[min(j + 1, 400)]
    return 0.5 * (lo + hi)


for n in [1, 2, 3, 4]:
    gs = np.geomspace(1e-3, 1.0, 600) / n
    vals = [boundary(g, n) for g in gs]
    best_i = max((k for k, v in enumerate(vals) if v is not None), key=lambda k: vals[k])
    # local refinement of the maximum in g
    glo, ghi = gs[max(best_i - 1, 0)], gs[min(best_i + 1, len(gs) - 1)]
    for _ in range(3):
        g2 = np.geomspace(glo, ghi, 61)
        v2 = [boundary(g, n) or 0.0 for g in g2]
        k = int(np.argmax(v2))
        glo, ghi = g2[max(k - 1, 0)], g2[min(k + 1, 60)]
    print(f"n={n}: Omega_CP={max(v2):.6e} at gamma1={g2[k]:.4e}")

header("real splitting Off g1=0.01 g2=0.02")
for w in [0.003, 0.005, 0.01, 0.05]:
    print(w, 2 * mp.sqrt(max(mp.mpf(w) ** 2 - mp.mpf("2.5e-5"), 0)))
