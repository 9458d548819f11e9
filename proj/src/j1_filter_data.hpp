#pragma once

#include <array>

namespace leki::detail {

// 47-point digital linear filter for Hankel-J1 transforms on a log grid:
//   int_0^inf K(lam) J1(r lam) dlam ~= (1/r) sum_i W_i K(b_i / r),
//   b_i = 10^(offset + i * spacing).
// Generated by tools/make_j1_filter.py: damped least squares against analytic
// transform pairs plus the moment condition sum_i W_i b_i = 1, validated there
// against adaptive quadrature on layered-earth kernels (max relative error
// ~4e-5, moment residual ~2e-13). Regenerate with that script if the grid
// geometry changes.
inline constexpr double kJ1FilterLogOffset = -3.05;
inline constexpr double kJ1FilterLogSpacing = 0.1059;
inline constexpr std::array<double, 47> kJ1FilterWeights = {
    +6.8260205385262066e-06, -2.7374475310940061e-05, +5.2576601624879716e-05,
    -5.3705130517763889e-05, +1.5950516377731354e-05, +5.8519311980531171e-05,
    -1.4138428134756632e-04, +2.2759324132722169e-04, -2.8996092476781806e-04,
    +3.6236492074551494e-04, -3.9590531048240102e-04, +4.8253413819476142e-04,
    -4.8471395568267303e-04, +6.3659381876907670e-04, -5.6519829700884335e-04,
    +8.8533450275162233e-04, -6.0332122807668035e-04, +1.3458200271300074e-03,
    -4.7482397659444998e-04, +2.2995079431391797e-03, +1.7539983894097874e-04,
    +4.4625636491385998e-03, +2.3109160372147236e-03, +9.6810261023329638e-03,
    +8.4667339220454892e-03, +2.2672303235590666e-02, +2.5009176079302153e-02,
    +5.4934122130733898e-02, +6.6223540543132231e-02, +1.3023315355424045e-01,
    +1.5348976971737766e-01, +2.7031065689413802e-01, +2.5390944449318764e-01,
    +3.4481522884606214e-01, +9.6559388028381946e-03, -1.4074297177530790e-01,
    -6.0920725853507462e-01, +4.1185872459604300e-01, +1.0574886358416037e-01,
    -2.1855235901006187e-01, +1.3214575280121882e-01, -5.5798991790605185e-02,
    +1.9439879536184059e-02, -5.7293310772178275e-03, +1.3607176581963863e-03,
    -2.3109383764353193e-04, +2.0850953441977959e-05,
};

}  // namespace leki::detail
