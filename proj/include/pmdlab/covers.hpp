#pragma once

#include <map>
#include <optional>
#include <vector>

#include "pmdlab/gaussian.hpp"
#include "pmdlab/types.hpp"

namespace pmdlab {

using MultiIndex = std::vector<int>;

/// All u >= 0 in `dims` coordinates with |u| <= w, graded then lexicographic.
std::vector<MultiIndex> multi_indices(int dims, int w);

/// Probability rows whose first k-1 entries lie on g*Z with sum <= 1; the last entry is the remainder.
std::vector<std::vector<double>> grid_rows(int k, double granularity);

/// Lazy stream of n-row matrices built from grid rows, as sorted multisets.
class GridPmdCover {
public:
    GridPmdCover(int n, int k, double granularity);
    std::optional<ParamMatrix> next();
    std::size_t emitted() const { return emitted_; }
    /// Number of elements without enumerating them.
    double size() const;
    const std::vector<std::vector<double>>& rows() const { return rows_; }

private:
    int n_, k_;
    std::vector<std::vector<double>> rows_;
    std::vector<std::size_t> idx_;
    bool done_ = false;
    std::size_t emitted_ = 0;
};

GridPmdCover grid_cover_sparse_pmd(int n, int k, double granularity);

struct GridSpec {
    double param_granularity = 0.1;
    double mean_cube = 1.0;
    double chol_granularity = 1.0;
    std::int64_t total_min = 0;
    std::int64_t total_max = -1;  // -1: use n
    void validate() const;
};

/// Lazy stream of single-structure block Gaussians. Each block gets integer total,
/// mean on a cube grid within [0, total], covariance L L^T with gridded lower-triangular L.
class GridGaussianCover {
public:
    /// `blocks` partitions [k]; `pivots[b]` must lie in `blocks[b]`. Empty: one block over [k], pivot k-1.
    GridGaussianCover(int n, int k, GridSpec spec, std::vector<std::vector<int>> blocks = {},
                      std::vector<int> pivots = {});
    std::optional<BlockGaussian> next();
    double size() const;

private:
    struct BlockGrid {
        std::vector<int> coords;
        int pivot;
        std::vector<GaussianBlock> elements;
    };
    int k_;
    std::vector<BlockGrid> grids_;
    std::vector<std::size_t> idx_;
    bool done_ = false;
};

GridGaussianCover grid_cover_gaussian(int n, int k, const GridSpec& spec);

/// Quantization of profile entries: entry at |u| = i is keyed by floor(v / g^i). g <= 0 keeps exact values.
struct ProfileQuantizer {
    double g = 0;
};

struct MomentProfile {
    int order = 0;
    int dims = 0;
    std::vector<MultiIndex> index;
    std::vector<double> values;
    std::vector<std::int64_t> keys;  // quantized (empty when exact)

    bool matches(const MomentProfile& o) const;
};

/// Power sums over the visible columns (all but the last) of `pm`.
MomentProfile moment_profile(const ParamMatrix& pm, int w, ProfileQuantizer quantizer = {});

/// Number of boxes per visible coordinate, ceil(4 e d^3) for d visible columns.
int mean_box_count(int k);
/// Rows grouped by box index v (1-based, half-open ((v-1)/B, v/B]) over visible columns.
std::map<std::vector<int>, std::vector<int>> group_by_mean_box(const ParamMatrix& pm);

/// Profile signature of a candidate: per mean box, its quantized moment profile.
std::vector<std::pair<std::vector<int>, MomentProfile>> cover_signature(const ParamMatrix& pm, int w,
                                                                        ProfileQuantizer quantizer);

/// Keeps the first candidate for every distinct signature. Returns indices into `candidates`.
std::vector<std::size_t> moment_matching_cover(const std::vector<ParamMatrix>& candidates, int w,
                                               ProfileQuantizer quantizer);

/// Multinomial mass at visible point x with visible probabilities q (invisible q0 = 1 - sum q).
double multinomial_pmf(int n, const std::vector<double>& q, const std::vector<std::int64_t>& x);

/// Coefficients of prod_i (1 + sum_j (rho(i,j) - q_j) z_j), truncated at total degree w.
std::map<MultiIndex, double> roos_coefficients(const GmdParams& rho, const std::vector<double>& q, int w);

/// Truncated expansion sum_u a_u Delta^u M(n - |u|, q, x), with Delta_j h(x) = h(x - e_j) - h(x).
double roos_approximator_pmf(const GmdParams& rho, const std::vector<double>& q, int w,
                             const std::vector<std::int64_t>& x);

/// Same value for many points, reusing one coefficient table.
class RoosApproximator {
public:
    RoosApproximator(const GmdParams& rho, std::vector<double> q, int w);
    double operator()(const std::vector<std::int64_t>& x) const;

private:
    int n_;
    std::vector<double> q_;
    std::map<MultiIndex, double> coef_;
};

double roos_alpha(const GmdParams& rho, const std::vector<double>& q);

/// Exact pmf of a GMD over its visible coordinates.
SparsePmf gmd_pmf_exact(const GmdParams& rho);

/// Per-column mean of the visible parameters.
std::vector<double> mean_matched_q(const GmdParams& rho);

/// Desk default w = min(n, ceil(k log2(1/eps))).
int default_profile_order(int n, int k, double eps);

}  // namespace pmdlab
