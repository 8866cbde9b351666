"""Exact rational evaluation of the worked examples used as frozen test values.

Runs independently of the package: everything here is Fraction arithmetic
written out by hand from the defining formulas.
"""
from fractions import Fraction as F

A, B, C, D = F(16, 100), F(1), F(1), F(1, 10)
y1, y2 = F(1, 2), F(1, 100)

f1 = -A * y1**3 + B * y2
f2 = -C * y1 - D * y2**3
rate = 2 * (y1 * f1 + y2 * f2)
tau_l = -(f1**2 + f2**2) / rate
tau = tau_l + F(1, 1000)
c = F(1) / (1 + tau)            # dt = phi = 1
n1, n2 = y1 + c * f1, y2 + c * f2
v0 = y1**2 + y2**2
v1 = n1**2 + n2**2

print("f", float(f1), float(f2))
print("rate", float(rate))
print("tau_L", float(tau_l))
print("nsfd step dt=1", float(n1), float(n2))
print("V0", float(v0), "V1", float(v1), "dV", float(v1 - v0))
print("tau*_1", float(-f1 / y1), "tau*_2", float(-f2 / y2))
print("tau_combined", float(max(tau_l, -f2 / y2) + F(1, 1000)))
# y = (1, 0)
g1, g2 = -A, -C
print("tau_L(1,0)", float((g1**2 + g2**2) / (2 * A)))
# rk4 on y' = -y, y=1, h=0.1
h = F(1, 10)
k1 = -F(1); k2 = -(1 + h / 2 * k1); k3 = -(1 + h / 2 * k2); k4 = -(1 + h * k3)
print("rk4", float(1 + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)))
