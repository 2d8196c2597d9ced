#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace ucp {

using Point = std::vector<double>;

// Hard cap on the spatial dimension; path kernels keep coordinates in
// fixed-size stack arrays of this length.
inline constexpr int kMaxDim = 8;

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double dist2_sq(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

inline double dist2(std::span<const double> a, std::span<const double> b) {
    return std::sqrt(dist2_sq(a, b));
}

} // namespace ucp
