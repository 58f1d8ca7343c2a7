#pragma once

#include <Eigen/Dense>

#include "pmdlab/errors.hpp"
#include "pmdlab/types.hpp"

namespace pmdlab {

/// Exact PMD pmf on {x >= 0 : sum x = n} by the row-by-row recurrence.
SparsePmf pmd_pmf_exact(const ParamMatrix& pm);

/// Exact pmf of the (n,k)-SIIRV (0,1,...,k-1) . Y on {0..(k-1)n}.
SparsePmf siirv_pmf_exact(const ParamMatrix& pm);

Point pmd_sample(const ParamMatrix& pm, Rng& rng);
/// Index of the basis vector drawn from one probability row.
int crv_sample(std::span<const double> row, Rng& rng);

double tv_distance(const SparsePmf& p, const SparsePmf& q);
double kolmogorov_distance_1d(const SparsePmf& p, const SparsePmf& q);

SparsePmf convolve(const SparsePmf& p, const SparsePmf& q);

/// Covariance of a truncated CRV with visible probabilities `row`.
Eigen::MatrixXd crv_covariance(std::span<const double> row);

/// Empirical pmf of a sample set.
SparsePmf empirical_pmf(const std::vector<Point>& samples);

/// Round half to even.
std::int64_t round_half_even(double v);

}  // namespace pmdlab
