#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "pmdlab/errors.hpp"
#include "pmdlab/types.hpp"

namespace pmdlab {

struct EmpiricalMoments {
    std::size_t m = 0;
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;  // divisor m - 1
};

EmpiricalMoments empirical_moments(const std::vector<Point>& samples);
/// Moments of the samples restricted to coordinates `coords`.
EmpiricalMoments empirical_moments(const std::vector<Point>& samples, const std::vector<int>& coords);

/// v_i / sqrt(lambda_i) for every eigenpair of sigma, then all pairwise sums i < j.
std::vector<Eigen::VectorXd> eigen_direction_set(const Eigen::MatrixXd& sigma);

/// `count` unit directions: half uniform on the sphere, half perturbed eigenvectors of `reference`.
std::vector<Eigen::VectorXd> sample_directions(const Eigen::MatrixXd& reference, int count, Rng& rng);

struct DirectionVerdict {
    double mean_ratio = 0;  // |y^T(mu_hat - mu)| / sqrt(y^T Sigma y)
    double cov_ratio = 0;   // |y^T(Sigma_hat - Sigma) y| / y^T Sigma y
    bool mean_ok = true;
    bool cov_ok = true;
};

struct DirectionalReport {
    std::vector<DirectionVerdict> directions;
    bool mean_ok = true;
    bool cov_ok = true;
    bool pass() const { return mean_ok && cov_ok; }
};

/// Requires sigma's minimum eigenvalue >= 1.
DirectionalReport directional_error_check(const EmpiricalMoments& est, const Eigen::VectorXd& mu,
                                          const Eigen::MatrixXd& sigma,
                                          const std::vector<Eigen::VectorXd>& directions, double eps);

struct PsdCoverSpec {
    double eps1 = 0;
    double eps2 = 0;
    double eps = 0.1;
    double eps_prime = 0;  // 0: sqrt(eps) ((1+eps2) k)^{-3/2} / 8

    double resolved_eps_prime(int k) const;
    void validate() const;
};

/// Candidate eigenvalues per index of `eigs` (all >= 1).
std::vector<std::vector<double>> eigen_candidates(const std::vector<double>& eigs, double eps1, double eps2,
                                                  double eps);

/// Address of one cover element: an eigenvalue choice and gridded eigenvector coordinates per index.
struct PsdCoverIndex {
    std::vector<int> eigen;             // index into candidates[z]
    std::vector<std::vector<int>> proj;  // proj[z][i]: grid multiple of the projection on e_i
};

/// Spectral cover of PSD matrices around a reference. Elements are
/// Q diag(lambda') Q^T where Q is the polar factor of the gridded eigenvector matrix.
class PsdCover {
public:
    PsdCover(const Eigen::MatrixXd& a_hat, PsdCoverSpec spec);

    int dims() const { return k_; }
    const std::vector<std::vector<double>>& candidates() const { return cands_; }
    double step(int z, int i) const { return step_(z, i); }
    /// Number of raw grid combinations (before the orthonormality filter).
    double raw_size() const;

    /// Element at an index, or nullopt when the gridded vectors are too far from orthonormal.
    std::optional<Eigen::MatrixXd> element_at(const PsdCoverIndex& idx) const;
    /// Grid index nearest to B's spectral decomposition.
    PsdCoverIndex locate(const Eigen::MatrixXd& b) const;

    /// Enumerates valid elements in index order; stops after `limit` raw combinations.
    std::optional<Eigen::MatrixXd> next();
    void set_enumeration_limit(double limit) { limit_ = limit; }

    /// Eigenvalues used for an element (same order as indices).
    std::vector<double> eigenvalues_of(const PsdCoverIndex& idx) const;

private:
    int grid_half(int z, int i) const;
    bool advance();

    int k_;
    PsdCoverSpec spec_;
    Eigen::VectorXd mu_;
    Eigen::MatrixXd u_;
    Eigen::MatrixXd step_;
    std::vector<std::vector<double>> cands_;
    PsdCoverIndex cur_;
    bool started_ = false, done_ = false;
    double limit_ = 1e7, visited_ = 0;
};

/// Builds the cover and returns it; throws CapExceeded if raw size exceeds `cap` and enumeration is requested.
PsdCover psd_cover(const Eigen::MatrixXd& a_hat, const PsdCoverSpec& spec);

/// max over directions of |y^T (s1 - s2) y| / y^T s1 y.
double directional_ratio(const Eigen::MatrixXd& s1, const Eigen::MatrixXd& s2,
                         const std::vector<Eigen::VectorXd>& directions);
/// Same supremum over all directions (generalized eigenvalues).
double exact_directional_ratio(const Eigen::MatrixXd& s1, const Eigen::MatrixXd& s2);

struct DriftVerdict {
    double ratio = 0;
    double bound = 0;
    bool pass = false;
};
/// Requires min eigenvalue of s1 >= 1/eps^3; compares the ratio to 9 eps.
DriftVerdict rounding_drift_check(const Eigen::MatrixXd& s1, const Eigen::MatrixXd& s2, double eps,
                                  const std::vector<Eigen::VectorXd>& directions);

/// 2 eps k with eps the smallest value meeting both directional conditions over all directions.
double directional_gaussian_tv_bound(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                                     const Eigen::VectorXd& mu2, const Eigen::MatrixXd& sigma2);

struct BlockStructure {
    std::vector<std::vector<int>> blocks;
    std::vector<int> pivots;
};
std::vector<BlockStructure> block_structure_guesses(int k);

/// Per-block totals sum_{B} x - l for l in 0..sparse_cap (clipped at 0), as a Cartesian product.
std::vector<std::vector<std::int64_t>> block_total_guesses(const Point& x, const BlockStructure& s, int sparse_cap);

/// Grid of mean vectors: center + sum_z j_z * step * sqrt(lambda_z) v_z with |j_z * step| <= half_width.
std::vector<Eigen::VectorXd> mean_cover(const Eigen::VectorXd& center, const Eigen::MatrixXd& sigma, double step,
                                        double half_width);

}  // namespace pmdlab
