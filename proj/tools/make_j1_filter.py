#!/usr/bin/env python3
"""Design the 47-point J1 digital linear filter used by the resistivity forward model.

A Hankel transform f(r) = int_0^inf K(lam) J1(r lam) dlam is approximated by
    f(r) ~= (1/r) * sum_i W_i K(b_i / r),        b_i = 10**(A + i*S)
i.e. a convolution on a log-spaced grid. The weights W_i are obtained by damped
least squares against analytic transform pairs sampled over a wide range of r:

    K(lam) = lam * exp(-lam)      <->  f(r) = r / (1 + r^2)^(3/2)
    K(lam) = lam^2 * exp(-lam)    <->  f(r) = 3 r / (1 + r^2)^(5/2)
    K(lam) = exp(-lam)            <->  f(r) = (1/r) (1 - 1/sqrt(1 + r^2))

plus the moment condition sum_i W_i b_i = 1, which is the Abel-regularized
identity r^2 int_0^inf J1(r lam) lam dlam = 1 and makes the filter exact for a
homogeneous half-space.

The script validates the fit on the design pairs, on the moment condition, and
on layered-earth soundings evaluated independently with slow adaptive
quadrature (panels between Bessel zeros after subtracting the asymptotic part
of the kernel), then prints the table ready to paste into C++.
"""

import numpy as np
from scipy import special

N = 47
A = -3.05
S = 0.1059
BASE = 10.0 ** (A + S * np.arange(N))


def design_matrix(r, kernel):
    # rows: one equation  sum_i W_i K(b_i/r_m) = r_m f(r_m)  per sample r_m
    lam = BASE[None, :] / r[:, None]
    return kernel(lam)


def solve_weights():
    r = np.logspace(-3.5, 4.5, 1200)
    pairs = [
        (lambda l: l * np.exp(-l), lambda r: r * r / (1 + r * r) ** 1.5, 1.0),
        (lambda l: l * l * np.exp(-l), lambda r: 3 * r * r / (1 + r * r) ** 2.5, 1.0),
        (lambda l: np.exp(-l), lambda r: 1 - 1 / np.sqrt(1 + r * r), 0.3),
    ]
    rows = []
    rhs = []
    for kern, rf, wt in pairs:
        m = design_matrix(r, kern)
        scale = wt / np.maximum(np.abs(rf(r)), 1e-2)  # relative-error weighting
        rows.append(m * scale[:, None])
        rhs.append(rf(r) * scale)
    # moment condition, strongly weighted
    rows.append(BASE[None, :] * 1e4)
    rhs.append(np.array([1e4]))
    Amat = np.vstack(rows)
    b = np.concatenate(rhs)
    # damped least squares: truncate tiny singular values
    W, res, rank, sv = np.linalg.lstsq(Amat, b, rcond=1e-12)
    return W


def check_pairs(W):
    r = np.logspace(-3, 4, 400)
    out = {}
    for name, kern, rf in [
        ("lam*exp(-lam)", lambda l: l * np.exp(-l), lambda r: r * r / (1 + r * r) ** 1.5),
        ("lam^2*exp(-lam)", lambda l: l * l * np.exp(-l), lambda r: 3 * r * r / (1 + r * r) ** 2.5),
        ("exp(-lam)", lambda l: np.exp(-l), lambda r: 1 - 1 / np.sqrt(1 + r * r)),
    ]:
        approx = design_matrix(r, kern) @ W
        exact = rf(r)
        mask = np.abs(exact) > 1e-8
        rel = np.max(np.abs(approx[mask] - exact[mask]) / np.abs(exact[mask]))
        out[name] = rel
    out["moment |sum W b - 1|"] = abs(BASE @ W - 1.0)
    return out


def transform_T1(res, thick, lam):
    """Bottom-up resistivity transform recursion for a layered half-space."""
    T = np.full_like(lam, res[-1], dtype=float)
    for i in range(len(res) - 2, -1, -1):
        th = np.tanh(lam * thick[i])
        T = (T + res[i] * th) / (1 + T * th / res[i])
    return T


def rho_a_filter(res, thick, r):
    lam = BASE / r
    Tm = transform_T1(res, thick, lam) - res[-1]
    return res[-1] + r * np.sum(W * lam * Tm)


def rho_a_quad(res, thick, r):
    """Reference: adaptive panel quadrature between Bessel zeros.

    Subtracts s(lam) = res[-1] + (res[0]-res[-1])(1 - exp(-c lam)), whose
    transform is known in closed form, leaving an absolutely convergent
    integrand."""
    from scipy.integrate import quad

    c = thick[0]
    r1, rn = res[0], res[-1]
    analytic = rn + (r1 - rn) * (1 - r ** 3 / (c * c + r * r) ** 1.5)

    def delta(lam):
        s = rn + (r1 - rn) * (1 - np.exp(-c * lam))
        return (transform_T1(res, thick, np.atleast_1d(lam))[0] - s)

    # integrate delta(lam) * J1(r lam) * lam over panels between Bessel zeros
    lam_max = 45.0 / min(c, 2 * thick[0])
    nz = max(10, int(r * lam_max / np.pi) + 10)
    zeros = special.jn_zeros(1, nz) / r
    pts = [0.0] + [z for z in zeros if z < lam_max] + [lam_max]
    total = 0.0
    for a_, b_ in zip(pts[:-1], pts[1:]):
        val, _ = quad(lambda l: delta(l) * special.j1(r * l) * l, a_, b_, limit=200)
        total += val
    return analytic + r * r * total


def main():
    global W
    W = solve_weights()
    print("# pair/moment validation (max relative error):")
    for k, v in check_pairs(W).items():
        print(f"#   {k:24s} {v:.3e}")

    # layered-earth cross-validation
    rng = np.random.default_rng(7)
    z = np.logspace(-1, 5, 19)                      # 20-layer grid, log-spaced boundaries
    thick20 = np.diff(np.concatenate([[0.0], z]))
    res20 = np.exp(rng.normal(np.log(10.0), 1.0, 20))
    cases = [
        ("two-layer 1/10", [1.0, 10.0], [1.0]),
        ("two-layer 10/1", [10.0, 1.0], [1.0]),
        ("three-layer 5/50/10", [5.0, 50.0, 10.0], [10.0, 990.0]),
        ("contrast 1/100", [1.0, 100.0], [0.5]),
        ("contrast 100/1", [100.0, 1.0], [0.5]),
        ("random 20-layer", list(res20), list(thick20)),
    ]
    print("# layered cross-validation vs quadrature:")
    for name, resv, thickv in cases:
        resv = np.array(resv)
        thickv = np.array(thickv)
        worst = 0.0
        for r in np.logspace(-1, 2.5, 15):
            fa = rho_a_filter(resv, thickv, r)
            qa = rho_a_quad(resv, thickv, r)
            worst = max(worst, abs(fa - qa) / abs(qa))
        print(f"#   {name:22s} max rel {worst:.3e}")

    # asymptotes
    resv, thickv = np.array([1.0, 10.0]), np.array([1.0])
    print(f"# shallow limit rho_a(0.005)  = {rho_a_filter(resv, thickv, 0.005):.6f} (want 1)")
    print(f"# deep    limit rho_a(2e4)    = {rho_a_filter(resv, thickv, 2e4):.6f} (want 10)")

    print()
    print(f"inline constexpr double kJ1FilterLogOffset = {A};")
    print(f"inline constexpr double kJ1FilterLogSpacing = {S};")
    print(f"inline constexpr std::array<double, {N}> kJ1FilterWeights = {{")
    for i in range(0, N, 3):
        chunk = ", ".join(f"{w:+.16e}" for w in W[i:i + 3])
        print(f"    {chunk},")
    print("};")


if __name__ == "__main__":
    main()
