#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "pmdlab/errors.hpp"
#include "pmdlab/types.hpp"

namespace pmdlab {

/// Minimum admissible covariance eigenvalue for box integrals.
inline constexpr double kEigenvalueFloor = 1e-8;

struct BoxEstimate {
    double value = 0;
    double error = 0;
};

/// Pr[lo <= N(mu, sd^2) <= hi], accurate in both tails.
double normal_interval(double mu, double sd, double lo, double hi);

/// Pr[X in box] for X ~ N(mu, sigma). Nested adaptive quadrature up to 3 dims,
/// shifted lattice rules for 4..8 dims.
BoxEstimate gaussian_box_probability(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                                     const Eigen::VectorXd& lo, const Eigen::VectorXd& hi);

/// Splits off coordinates with zero variance. They are point masses at the
/// half-even rounding of their means.
struct DegenerateSplit {
    std::vector<int> fixed;      // coordinates with zero variance
    std::vector<int> free;       // remaining coordinates
    Eigen::VectorXd free_mean;
    Eigen::MatrixXd free_cov;
};
DegenerateSplit split_degenerate(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                                 double zero_tol = 1e-12);

/// Mass of the unit box centred at lattice point x.
BoxEstimate discretized_gaussian_pmf_estimate(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                                              const Point& x);
double discretized_gaussian_pmf(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma, const Point& x);

/// One block of a structure-preserving rounding. `mean` and `cov` are indexed by
/// the non-pivot coordinates in increasing order.
struct GaussianBlock {
    std::vector<int> coords;  // sorted
    int pivot = 0;
    std::int64_t total = 0;
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;

    std::vector<int> free_coords() const;
};

class BlockGaussian {
public:
    BlockGaussian() = default;
    BlockGaussian(int k, std::vector<GaussianBlock> blocks);

    int k() const { return k_; }
    const std::vector<GaussianBlock>& blocks() const { return blocks_; }
    bool empty() const { return blocks_.empty(); }

private:
    int k_ = 0;
    std::vector<GaussianBlock> blocks_;
};

double block_gaussian_pmf(const BlockGaussian& bg, const Point& x);

/// Precomputes per-block factorizations so repeated pmf queries are cheap.
/// Immutable and safe to share between threads.
class BlockGaussianEvaluator {
public:
    explicit BlockGaussianEvaluator(const BlockGaussian& bg);
    ~BlockGaussianEvaluator();
    BlockGaussianEvaluator(BlockGaussianEvaluator&&) noexcept;
    BlockGaussianEvaluator& operator=(BlockGaussianEvaluator&&) noexcept;

    double pmf(const Point& x) const;
    const BlockGaussian& gaussian() const { return bg_; }

    struct Impl;

private:
    BlockGaussian bg_;
    std::vector<bool> covered_;
    std::vector<std::unique_ptr<Impl>> blocks_;
};
Point block_gaussian_sample(const BlockGaussian& bg, Rng& rng);

/// Tabulates a block Gaussian over +-tail_sd standard deviations per free coordinate.
SparsePmf tabulate_block_gaussian(const BlockGaussian& bg, double tail_sd = 8.0);

/// Tabulated 1-D discretized Gaussian.
SparsePmf tabulate_gaussian_1d(double mu, double variance, double tail_sd = 8.0);

}  // namespace pmdlab
