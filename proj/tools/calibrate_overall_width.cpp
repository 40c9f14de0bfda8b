// Regenerates include/tempus/detail/overall_width_table.hpp.
#include <cstdio>

#include <tempus/widths.hpp>

int main() {
    const double alphas[] = {0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95, 0.99};
    for (double a : alphas) {
        const auto p = tempus::calibrate_overall_width_constant(a);
        std::printf("%.2f %.6f %s\n", a, p.value, p.argmin.c_str());
    }
}
