"""Regenerate the frozen Q values used in test_theory.py.

Independent of the package: w comes from mpmath polyroots with the Herglotz
branch, the integral from mpmath (smooth profiles) or scipy per-period
quadrature (indicator, whose transform only decays like 1/p).

    python3 tests/oracles/theory_oracles.py
"""

import math

import mpmath as mp
import numpy as np
from scipy import integrate, special

mp.mp.dps = 40


def w_of(v, z):
    z = mp.mpc(z)
    roots = mp.polyroots([v * v, z, 1])
    return [r for r in roots if mp.im(r) * mp.im(z) > 0][0]


def q_mp(psi_t, v, z1, z2):
    w1, w2 = w_of(v, z1), w_of(v, z2)
    x = v * v * w1 * w2
    f = lambda p: psi_t(p) / (1 - x * psi_t(p)) ** 2
    val = 2 * mp.quad(f, [0, 1, 4, 16, 64, mp.inf])
    return v * v * w1**2 * w2**2 / (mp.pi * (1 - v * v * w1**2) * (1 - v * v * w2**2)) * val


def q_indicator(z1, z2, periods=8000):
    w1, w2 = complex(w_of(1, z1)), complex(w_of(1, z2))
    x = w1 * w2
    pt = lambda p: np.sinc(p / (2 * math.pi))
    # integrand minus psi_tilde, whose integral is 2 pi psi(0) = 2 pi
    g = lambda p: x * pt(p) ** 2 * (2 - x * pt(p)) / (1 - x * pt(p)) ** 2
    two_pi = 2 * math.pi
    head = 0j
    for k in range(periods):
        re = integrate.quad(lambda p: g(p).real, two_pi * k, two_pi * (k + 1), epsabs=1e-17, epsrel=1e-13)[0]
        im = integrate.quad(lambda p: g(p).imag, two_pi * k, two_pi * (k + 1), epsabs=1e-17, epsrel=1e-13)[0]
        head += complex(re, im)
    L = two_pi * periods
    si, _ = special.sici(L)
    tail = 2 * x * (2 / L - 2 * math.cos(L) / L + 2 * (math.pi / 2 - si))
    pref = x * x / (math.pi * (1 - w1 * w1) * (1 - w2 * w2))
    return pref * (2 * math.pi + 2 * (head + tail))


if __name__ == "__main__":
    gauss = lambda p: mp.exp(-p * p / (4 * mp.pi))
    expo = lambda p: 1 / (1 + p * p)
    stab = lambda p: mp.exp(-mp.power(p, mp.mpf(3) / 2))
    print("gaussian v=1 (4i,-4i)", q_mp(gauss, 1, 4j, -4j))
    print("gaussian v=1.2 (1+3.5i,2-3.2i)", q_mp(gauss, mp.mpf("1.2"), mp.mpc(1, 3.5), mp.mpc(2, -3.2)))
    print("exponential (4i,-4i)", q_mp(expo, 1, 4j, -4j))
    print("exponential (0.5+4i,3i)", q_mp(expo, 1, mp.mpc(0.5, 4), 3j))
    print("stable 1.5 (4i,-4i)", q_mp(stab, 1, 4j, -4j))
    print("indicator (4i,-4i)", q_indicator(4j, -4j))
