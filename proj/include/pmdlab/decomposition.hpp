#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "pmdlab/hypothesis.hpp"
#include "pmdlab/types.hpp"

namespace pmdlab {

struct DecompositionConfig {
    double c = 0.01;
    double t = 20;
    double gamma = 6.5;
    bool theory_mode = false;

    /// Accuracy-derived constants: c = (eps^2/k^5)^1.1, t = (k^19/(c eps^6))^1.1.
    static DecompositionConfig theory(double eps, int k);
    void validate(int k) const;
};

/// Largest t that decompose will run with in theory mode.
inline constexpr double kTheoryExecutionCap = 1e6;

/// A Gaussian block over coordinate set `coords` with the pivot kept explicitly:
/// the mean covers every coordinate and `cov` has the all-ones vector in its kernel.
struct FullBlock {
    std::vector<int> coords;  // sorted
    int pivot = 0;
    std::int64_t total = 0;
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
    std::size_t rows = 0;  // CRVs absorbed, for reporting

    int index_of(int coord) const;
    /// Mean and covariance with `coord` removed.
    std::pair<Eigen::VectorXd, Eigen::MatrixXd> drop(int coord) const;
    GaussianBlock to_block() const;
};

struct GmdMoments {
    std::vector<int> coords;  // every coordinate except the dropped one
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

/// Group index (heaviest coordinate, ties to the lowest index) for every row.
std::vector<std::vector<int>> partition_by_heaviest(const ParamMatrix& pm);

/// Level l with l^gamma t <= size < (l+1)^gamma t.
int bucket_level(std::size_t size, double t, double gamma);

/// Buckets the rows of one group (heavy coordinate `heavy`) by support pattern size.
std::map<int, std::vector<int>> bucketize(const ParamMatrix& pm, const std::vector<int>& group, int heavy,
                                          double t, double gamma);

struct SparseSplit {
    std::vector<int> dense;
    std::vector<int> leftover;
};
/// Removes rows touching columns with fewer than t nonzeros until none remain.
SparseSplit sparse_bin_split(const ParamMatrix& pm, const std::vector<int>& rows, double t);

GmdMoments gmd_moments(const ParamMatrix& pm, const std::vector<int>& rows, int dropped);

/// Rebuilds the pivot row and column so every row of the covariance sums to 0.
FullBlock extend_to_full_block(const std::vector<int>& coords, int dropped, std::int64_t total,
                               const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov);

struct CostedBlock {
    FullBlock block;
    double cost = 0;
};
CostedBlock swap_pivot(const FullBlock& b, int new_pivot, int k);
CostedBlock merge_blocks(const FullBlock& a, const FullBlock& b, int k);

/// Smallest eigenvalue of the covariance with the pivot dropped (0 for single-coordinate blocks).
double retained_min_eigenvalue(const FullBlock& b);

/// Valiant-Valiant CLT bound k^{4/3}/sigma^{1/3} * 2.2 (3.1 + 0.83 log n)^{2/3}.
double clt_bound(int k, double sigma, double n);

struct LedgerEntry {
    std::string step;
    double cost = 0;
};

struct DecompositionResult {
    StructuralDecomposition decomposition;
    ParamMatrix rounded;
    std::vector<LedgerEntry> ledger;
    std::vector<FullBlock> blocks;
    std::vector<int> sparse_rows;

    double ledger_total() const;
};

DecompositionResult decompose(const ParamMatrix& pm, const DecompositionConfig& cfg);

}  // namespace pmdlab
