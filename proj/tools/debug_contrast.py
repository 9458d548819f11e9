#!/usr/bin/env python3
"""Cross-check the 1/100-contrast sounding with independent references."""
import numpy as np
from scipy import special
from scipy.integrate import quad
import mpmath as mp

import importlib.util
spec = importlib.util.spec_from_file_location("mk", "/root/proj/tools/make_j1_filter.py")
mk = importlib.util.module_from_spec(spec)
spec.loader.exec_module(mk)

W = mk.solve_weights()
mk.W = W

res = np.array([1.0, 100.0])
thick = np.array([0.5])


def rho_a_mp(resv, thickv, r, dps=25):
    """mpmath quad on scipy-located Bessel-zero panels, tanh-sinh per panel."""
    mp.mp.dps = dps
    c = mp.mpf(thickv[0])
    r1, rn = mp.mpf(resv[0]), mp.mpf(resv[-1])
    r_ = mp.mpf(r)
    analytic = rn + (r1 - rn) * (1 - r_ ** 3 / (c * c + r_ * r_) ** mp.mpf(1.5))

    def T1(lam):
        T = rn
        for i in range(len(resv) - 2, -1, -1):
            th = mp.tanh(lam * mp.mpf(thickv[i]))
            T = (T + resv[i] * th) / (1 + T * th / resv[i])
        return T

    def delta(lam):
        s = rn + (r1 - rn) * (1 - mp.exp(-c * lam))
        return (T1(lam) - s) * mp.besselj(1, r_ * lam) * lam

    lam_max = 50.0 / float(min(c, 2 * thickv[0]))
    zeros = special.jn_zeros(1, max(10, int(r * lam_max / 3.0) + 10)) / r
    pts = [0.0] + [z for z in zeros if z < lam_max] + [lam_max]
    total = mp.mpf(0)
    for a_, b_ in zip(pts[:-1], pts[1:]):
        total += mp.quad(delta, [mp.mpf(a_), mp.mpf(b_)])
    return float(analytic + r_ * r_ * total)


for r in [0.5, 2.0, 5.0, 10.0, 50.0]:
    fa = mk.rho_a_filter(res, thick, r)
    qa = mk.rho_a_quad(res, thick, r)
    ma = rho_a_mp(res, thick, r)
    print(f"r={r:8.2f}  filter={fa:12.6f}  scipyquad={qa:12.6f}  mpmath={ma:12.6f}  "
          f"filt/mp rel={abs(fa-ma)/abs(ma):.3e}  quad/mp rel={abs(qa-ma)/abs(ma):.3e}")
