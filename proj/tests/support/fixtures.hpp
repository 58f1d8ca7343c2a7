#pragma once

// Seeded instance generators shared by unit and acceptance tests.

#include <random>
#include <vector>

#include "pmdlab/types.hpp"

namespace fixtures {

/// Rows mixing a heavy coordinate with small entries, so that rounding has work to do.
inline pmdlab::ParamMatrix skewed_matrix(std::uint64_t seed, int n, int k, double small = 0.06) {
    pmdlab::Rng rng(seed);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < n; ++i) {
        std::vector<double> r(k);
        double s = 0;
        for (auto& v : r) {
            v = u(rng) < 0.5 ? small * u(rng) : u(rng);
            s += v;
        }
        for (auto& v : r) v /= s;
        rows.push_back(std::move(r));
    }
    return pmdlab::ParamMatrix::from_rows(rows, k);
}

/// Uniformly random rows (normalized uniforms).
inline pmdlab::ParamMatrix uniform_matrix(std::uint64_t seed, int n, int k) {
    pmdlab::Rng rng(seed);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < n; ++i) {
        std::vector<double> r(k);
        double s = 0;
        for (auto& v : r) s += (v = u(rng));
        for (auto& v : r) v /= s;
        rows.push_back(std::move(r));
    }
    return pmdlab::ParamMatrix::from_rows(rows, k);
}

/// Rows that put all their mass on one of two coordinate groups.
inline pmdlab::ParamMatrix two_group_matrix(std::uint64_t seed, int n) {
    pmdlab::Rng rng(seed);
    std::uniform_real_distribution<double> u(0.3, 0.7);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < n; ++i) {
        double p = u(rng);
        if (i % 2 == 0)
            rows.push_back({p, 1 - p, 0, 0});
        else
            rows.push_back({0, 0, p, 1 - p});
    }
    return pmdlab::ParamMatrix::from_rows(rows, 4);
}

}  // namespace fixtures
