#pragma once

#include <vector>

#include "pmdlab/errors.hpp"
#include "pmdlab/types.hpp"

namespace pmdlab {

/// One (x, y) pass of the parameter rounding.
struct RoundingPlan {
    int x = 0;
    int y = 0;
    std::vector<int> group;     // rows with 0 < rho(i,x) < c whose heaviest coordinate is y
    std::vector<int> retained;  // rows whose x-entry becomes c
    double mass_before = 0;     // column-x mass over the group
    double mass_after = 0;
};

/// Plans the (x, y) pass on `pm` without applying it.
RoundingPlan plan_rounding_pass(const ParamMatrix& pm, int x, int y, double c);
ParamMatrix apply_rounding_pass(const ParamMatrix& pm, const RoundingPlan& plan, double c);

/// Moves every entry out of (0, c). Requires 0 < c <= 1/(2k).
ParamMatrix round_parameters(const ParamMatrix& pm, double c, std::vector<RoundingPlan>* passes = nullptr);

/// Lexicographically first heaviest coordinate of a row.
int heaviest_coordinate(std::span<const double> row);

/// The two-branch resampling process. Returns the index of the drawn basis vector.
int fork_sample(std::span<const double> row, int x, int y, Rng& rng);

}  // namespace pmdlab
