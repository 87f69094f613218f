"""Independent high-precision evaluation of the expected values frozen into the unit tests.

Run with: python3 tests/oracles/freeze_values.py
"""
from mpmath import mp, mpf, cos, sin, sqrt, pi, tanh, findroot

mp.dps = 40
L = mpf("0.24")


def g(phi):
    return (1 - cos(phi)) / phi


def bisect(target, lo=mpf("1e-30"), hi=pi / 2):
    for _ in range(400):
        mid = (lo + hi) / 2
        if g(mid) < target:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


print("ik phi for r/L = 0.5      :", mp.nstr(bisect(mpf("0.5")), 20))
print("ik phi for r/L = 2/pi-1e-9:", mp.nstr(bisect(2 / pi - mpf("1e-9")), 20))
print("peak of g                 :", mp.nstr(findroot(lambda p: p * sin(p) - 1 + cos(p), 2.3), 20),
      mp.nstr(g(findroot(lambda p: p * sin(p) - 1 + cos(p), 2.3)), 20))
print("2L/pi                     :", mp.nstr(2 * L / pi, 20))
phi = pi / 2
print("fk(phi=pi/2) x,z          :", mp.nstr(L / phi * (1 - cos(phi)), 20), mp.nstr(L / phi * sin(phi), 20))

D = mpf("0.01")


def f(a, b):
    return (tanh((a + b) * mpf(10) ** 6) + 1) / 2


for sx, sy in [("0.06", "0.05"), ("-0.06", "0.05")]:
    sx, sy = mpf(sx), mpf(sy)
    v = sqrt(sx**2 + sy**2)
    r3 = f(sx, v) * (sx + v) * f(-sx, D) + (v - D) * f(sx, D)
    r4 = f(-sx, v) * (-sx + v) * f(sx, D) + (v - D) * f(-sx, D)
    print("radii", mp.nstr(sx, 3), mp.nstr(sy, 3), "v", mp.nstr(v, 20), "rho3", mp.nstr(r3, 20), "rho4", mp.nstr(r4, 20))

# Chord length sum for a phi = pi limb sampled at 64 points.
n = 64
pts = []
for k in range(n):
    xi = mpf(k) / (n - 1)
    pts.append((L / pi * (1 - cos(xi * pi)), L / pi * sin(xi * pi)))
chord = sum(sqrt((pts[i + 1][0] - pts[i][0]) ** 2 + (pts[i + 1][1] - pts[i][1]) ** 2) for i in range(n - 1))
print("chord sum phi=pi n=64     :", mp.nstr(chord, 20), "rel err", mp.nstr(1 - chord / L, 6))
