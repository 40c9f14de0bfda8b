#pragma once

#include <array>
#include <utility>

namespace tempus::detail {

// Calibration, not a theorem: minimum of W(|chi|^2, a) W(|chi~|^2, a) / hbar over chirped Gaussians
// and two-lobe Gaussian pairs (see calibrate_overall_width_constant, tools/calibrate_overall_width.cpp).
inline constexpr std::array<std::pair<double, double>, 10> overall_width_table{{
    {0.55, 0.895427},
    {0.60, 1.149861},
    {0.65, 1.487544},
    {0.70, 1.907867},
    {0.75, 2.417481},
    {0.80, 3.124670},
    {0.85, 4.093173},
    {0.90, 5.365073},
    {0.95, 7.495156},
    {0.99, 12.088409},
}};

}  // namespace tempus::detail
