#pragma once

#include <cmath>

#include "ncbal/models.hpp"

namespace ncbal::detail {

ModelPtr make_shallow_water(int dimension, const ModelParams& params);
ModelPtr make_porous_euler(const ModelParams& params);
ModelPtr make_lagrangian(const ModelParams& params);

/// x − 1 − ln x written in terms of d = x − 1; nonnegative and accurate near d = 0.
inline double log_gap(double d) {
    if (std::abs(d) < 1e-3) {
        const double d2 = d * d;
        return d2 * (0.5 - d / 3.0 + d2 / 4.0 - d2 * d / 5.0 + d2 * d2 / 6.0);
    }
    return d - std::log1p(d);
}

}  // namespace ncbal::detail
