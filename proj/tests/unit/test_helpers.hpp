#pragma once

#include <random>

#include "liouville/geometry.hpp"

namespace testing_support {

inline liouville::Point random_in_disk(std::mt19937_64& rng, double radius = 0.999) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double r = radius * std::sqrt(u(rng));
    return liouville::polar(r, liouville::kTwoPi * u(rng));
}

}  // namespace testing_support
