// Copyright (C) 2026 the dil authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "dil/errors.hpp"

namespace dil {

using Vec = std::vector<double>;

inline void check_dim(const Vec& x, std::size_t dim, const char* what) {
    if (x.size() != dim) {
        fail(ErrorCode::shape, std::string(what) + ": expected dimension " +
                                   std::to_string(dim) + ", got " + std::to_string(x.size()));
    }
}

inline double dot(const Vec& a, const Vec& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double max_abs_diff(const Vec& a, const Vec& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

inline Vec sub(const Vec& a, const Vec& b) {
    Vec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

inline Vec add(const Vec& a, const Vec& b) {
    Vec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

inline Vec scaled(const Vec& a, double k) {
    Vec out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = k * a[i];
    return out;
}

inline void add_scaled_inplace(Vec& a, double k, const Vec& b) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += k * b[i];
}

}  // namespace dil
