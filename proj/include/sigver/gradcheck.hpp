#ifndef SIGVER_GRADCHECK_HPP
#define SIGVER_GRADCHECK_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace sigver {

struct GradCheckEntry {
    std::string layer;
    double max_rel_err = 0.0;
    int seeds = 0;
};

struct GradCheckReport {
    std::vector<GradCheckEntry> entries;
    double tolerance = 1e-4;

    bool all_passed() const {
        for (const auto& e : entries)
            if (!(e.max_rel_err < tolerance)) return false;
        return true;
    }
};

// Central finite-difference checks of every layer's analytic gradients in
// double precision, over randomized shapes and values. Piecewise-linear
// layers (pool, relu, dropout) use a smaller step and inputs redrawn away
// from their kinks.
GradCheckReport run_gradient_checks(int seeds_per_layer, double tolerance, std::uint64_t seed);

} // namespace sigver

#endif
